#ifndef STREE_PROCESS_SIM_HPP
#define STREE_PROCESS_SIM_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "stree/subordinator.hpp"
#include "stree/tree_geometry.hpp"

namespace stree {

inline constexpr int kDefaultJumpDepth = 60;

/// Jump law of the stable process: rate nu(n) to each vertex at distance n.
/// Jumps longer than N_jump form the "far" class, drawn with probability eps_tail.
struct JumpLaw {
  TreeParams tree;
  StableParams stable;
  int N_jump = 0;
  double total_rate = 0.0;            ///< lambda* = sum_n m(n) nu(n)
  std::vector<double> nu;             ///< index n = 0..N_jump, nu[0] = 0
  std::vector<double> distance_cdf;   ///< P(jump length <= n), ends at 1 - eps_tail
  double eps_tail = 0.0;

  double far_rate() const { return eps_tail * total_rate; }
  /// sum_{n > r} m(n) nu(n), including the far class.
  double tail_jump_rate(int r) const;
  /// Jump length, or -1 for the far class.
  template <class Rng>
  int sample_length(Rng& rng) const;
};

/// Throws ConvergenceError when eps_tail exceeds max_tail.
JumpLaw build_jump_law(const TreeParams& p, const StableParams& s, int N_jump = kDefaultJumpDepth,
                       double max_tail = 0.5);

/// Piecewise-constant path. After a far jump the state is not materialized and
/// the path ends with `far` set; returning from there needs a jump of length
/// > N_jump back into a bounded set, which the simulation neglects.
struct Path {
  std::vector<double> times;   ///< jump times, times[0] = 0
  std::vector<Vertex> states;  ///< state held from times[i]
  bool far = false;
  double far_time = 0.0;

  /// State at time t, or nullopt once the path has gone far.
  std::optional<Vertex> at(double t) const;
};

template <class Rng>
Path simulate_path(const JumpLaw& law, const Vertex& x0, double t_max, Rng& rng);

/// Distance of X_t from the start, or -1 when the path has gone far.
int simulate_distance(const JumpLaw& law, double t, std::uint64_t seed, std::uint64_t stream);

/// Distance from the root of the nearest-neighbour walk after Poisson(S_t) steps.
/// Returns -1 when S_t > s_far or the walk passes distance d_far.
int subordinated_distance(const TreeParams& p, const StableParams& s, double t, std::uint64_t seed,
                          std::uint64_t stream, double s_far = 2000.0, int d_far = 60);

/// Histogram of distances 0..n_bins-2 with the last bin collecting the rest.
std::vector<long> distance_histogram(const JumpLaw& law, double t, long n_samples, int n_bins, std::uint64_t seed);
std::vector<long> subordinated_histogram(const TreeParams& p, const StableParams& s, double t, long n_samples,
                                         int n_bins, std::uint64_t seed);

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
double chi_square_sf(double x, int df);
/// Pearson statistic of counts against probabilities (summing to 1).
double chi_square_statistic(const std::vector<long>& counts, const std::vector<double>& probs);
/// Two-sample statistic for equal-length histograms; empty bins are skipped.
double chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b, int* df = nullptr);

struct TailEstimate {
  double t = 0.0;
  int r = 0;
  long n_samples = 0;
  double p_hat = 0.0;
  double se = 0.0;
};

/// P_x[d(x, X_t) > r]; translation invariance lets x be the root.
TailEstimate estimate_tail(const JumpLaw& law, double t, int r, long n_samples, std::uint64_t seed);

struct ExitRecord {
  Vertex start;
  int radius = 0;
  double exit_time = 0.0;
  std::optional<Vertex> exit_vertex;  ///< empty for far exits
  bool far = false;
  int exit_distance = -1;             ///< from the center, -1 for far exits
  std::uint64_t seed = 0;             ///< stream index under the master seed
};

struct ExitStatistics {
  int radius = 0;
  Vertex start;
  long n_samples = 0;
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> t_grid;
  std::vector<double> survival;       ///< P[tau > t] on t_grid
  std::vector<long> level_counts;     ///< exits by distance from the center, index = level
  long far_count = 0;
  std::vector<ExitRecord> records;    ///< filled when requested
};

/// Exit of B(root, r) started from x. Sample i uses stream i of the master seed.
ExitStatistics estimate_exit(const JumpLaw& law, const Vertex& x, int r, long n_samples, std::uint64_t seed,
                             const std::vector<double>& t_grid = {}, bool keep_records = false);

/// Columns seed,exit_time,exit_distance,far.
void write_exit_csv(std::ostream& os, const std::vector<ExitRecord>& records);

// ---------------------------------------------------------------------------

template <class Rng>
int JumpLaw::sample_length(Rng& rng) const {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  if (u >= distance_cdf.back()) return -1;
  auto it = std::upper_bound(distance_cdf.begin() + 1, distance_cdf.end(), u);
  return static_cast<int>(it - distance_cdf.begin());
}

template <class Rng>
Path simulate_path(const JumpLaw& law, const Vertex& x0, double t_max, Rng& rng) {
  if (!(t_max > 0.0)) throw DomainError("simulate_path: t_max must be > 0");
  std::exponential_distribution<double> hold(law.total_rate);
  Path path;
  path.times.push_back(0.0);
  path.states.push_back(x0);
  double t = hold(rng);
  while (t < t_max) {
    const int n = law.sample_length(rng);
    if (n < 0) {
      path.far = true;
      path.far_time = t;
      break;
    }
    path.states.push_back(uniform_sphere_vertex(law.tree, path.states.back(), n, rng));
    path.times.push_back(t);
    t += hold(rng);
  }
  return path;
}

}  // namespace stree

#endif  // STREE_PROCESS_SIM_HPP
