#ifndef STREE_TREE_GEOMETRY_HPP
#define STREE_TREE_GEOMETRY_HPP

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "stree/common.hpp"

namespace stree {

/// Homogeneous tree of degree q+1 and its spectral constants.
struct TreeParams {
  int q = 2;
  double gamma = 0.0;  ///< 2 sqrt(q) / (q+1)
  double b2 = 0.0;     ///< 1 - gamma, bottom of the spectrum of the Laplacian
  double R0 = 0.0;     ///< (q-1)/(q+1), speed of the simple random walk

  /// Throws DomainError unless q >= 2.
  static TreeParams make(int q);
};

/// Vertex as a reduced word in the letters {0..q}: consecutive letters differ.
/// Appending the last letter again steps back towards the root, so the
/// reversal of a step is the step itself.
struct Vertex {
  std::vector<std::uint8_t> word;

  int depth() const { return static_cast<int>(word.size()); }
  auto operator<=>(const Vertex&) const = default;
  bool operator==(const Vertex&) const = default;
};

inline Vertex root_vertex() { return {}; }

/// Neighbour of v across the edge labelled `label`.
Vertex step(const Vertex& v, int label);

int distance(const Vertex& u, const Vertex& v);

/// Exact (q+1) q^(n-1) for n >= 1, saturating at UINT64_MAX.
std::uint64_t sphere_size(const TreeParams& p, int n);
std::uint64_t ball_volume(const TreeParams& p, int r);

/// Same counts in floating point (exact up to 2^53), for kernel weights.
double sphere_size_real(const TreeParams& p, int n);
double log_sphere_size(const TreeParams& p, int n);
double ball_volume_real(const TreeParams& p, int r);

/// Number of vertices at distance `n` from a vertex at depth `k`, split by
/// their own depth. Entries are (depth, count) in increasing depth.
struct ShellCount {
  int depth;
  double count;
};
std::vector<ShellCount> shell_counts(const TreeParams& p, int k, int n);

struct Ball {
  Vertex center;
  int radius = 0;
  std::vector<Vertex> vertices;   // breadth-first by depth, lexicographic within depth
  std::vector<int> parent;        // index of parent, -1 for the center
  std::vector<int> depth;         // distance to center
  std::map<Vertex, int> index_of;

  std::size_t size() const { return vertices.size(); }
  std::string to_json() const;
};

inline constexpr std::size_t kDefaultVertexBudget = 50000;

/// Ball of radius r about the root. Throws BudgetError when too large.
Ball enumerate_ball(const TreeParams& p, int r, std::size_t budget = kDefaultVertexBudget);

struct VolumeReport {
  int r_max = 0;
  int A = 1;
  double c1_witnessed = 0.0;  ///< max_r V(r) / V(r+A)
  double ratio_min = 0.0;     ///< min_r V(r+1) / V(r)
  double ratio_max = 0.0;
  bool pass = false;
};

/// Checks V(r) <= c1 V(r+1) with c1 < 1 and a bounded ratio V(r+1)/V(r) for 1 <= r <= r_max.
VolumeReport check_volume_conditions(const TreeParams& p, int r_max);

/// Uniform vertex on the sphere of radius n about x (n >= 1).
template <class Rng>
Vertex uniform_sphere_vertex(const TreeParams& p, const Vertex& x, int n, Rng& rng) {
  if (n < 1) throw DomainError("uniform_sphere_vertex: n must be >= 1");
  Vertex v = x;
  std::uniform_int_distribution<int> first(0, p.q);
  std::uniform_int_distribution<int> next(0, p.q - 1);
  int prev = first(rng);
  v = step(v, prev);
  for (int i = 1; i < n; ++i) {
    int label = next(rng);
    if (label >= prev) ++label;  // skip the reversal of the previous step
    v = step(v, label);
    prev = label;
  }
  return v;
}

}  // namespace stree

#endif  // STREE_TREE_GEOMETRY_HPP
