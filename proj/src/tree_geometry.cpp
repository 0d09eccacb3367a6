#include "stree/tree_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

namespace stree {

TreeParams TreeParams::make(int q) {
  if (q < 2) throw DomainError("TreeParams: q must be an integer >= 2, got " + std::to_string(q));
  if (q > 255) throw DomainError("TreeParams: q > 255 not supported by the vertex encoding");
  TreeParams p;
  p.q = q;
  p.gamma = 2.0 * std::sqrt(static_cast<double>(q)) / (q + 1.0);
  p.b2 = 1.0 - p.gamma;
  p.R0 = (q - 1.0) / (q + 1.0);
  return p;
}

Vertex step(const Vertex& v, int label) {
  Vertex out = v;
  if (!out.word.empty() && out.word.back() == label)
    out.word.pop_back();
  else
    out.word.push_back(static_cast<std::uint8_t>(label));
  return out;
}

int distance(const Vertex& u, const Vertex& v) {
  const auto mm = std::mismatch(u.word.begin(), u.word.end(), v.word.begin(), v.word.end());
  const int common = static_cast<int>(mm.first - u.word.begin());
  return u.depth() + v.depth() - 2 * common;
}

namespace {
constexpr std::uint64_t kSat = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSat / a) return kSat;
  return a * b;
}
std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return (a > kSat - b) ? kSat : a + b; }
}  // namespace

std::uint64_t sphere_size(const TreeParams& p, int n) {
  if (n < 0) throw DomainError("sphere_size: n must be >= 0");
  if (n == 0) return 1;
  std::uint64_t s = static_cast<std::uint64_t>(p.q + 1);
  for (int i = 1; i < n && s != kSat; ++i) s = sat_mul(s, static_cast<std::uint64_t>(p.q));
  return s;
}

std::uint64_t ball_volume(const TreeParams& p, int r) {
  if (r < 0) throw DomainError("ball_volume: r must be >= 0");
  std::uint64_t v = 0;
  for (int n = 0; n <= r && v != kSat; ++n) v = sat_add(v, sphere_size(p, n));
  return v;
}

double sphere_size_real(const TreeParams& p, int n) {
  if (n == 0) return 1.0;
  return (p.q + 1.0) * std::pow(static_cast<double>(p.q), n - 1);
}

double log_sphere_size(const TreeParams& p, int n) {
  if (n == 0) return 0.0;
  return std::log(p.q + 1.0) + (n - 1) * std::log(static_cast<double>(p.q));
}

double ball_volume_real(const TreeParams& p, int r) {
  // 1 + (q+1)(q^r - 1)/(q-1)
  const double q = p.q;
  return 1.0 + (q + 1.0) * (std::pow(q, r) - 1.0) / (q - 1.0);
}

std::vector<ShellCount> shell_counts(const TreeParams& p, int k, int n) {
  if (k < 0 || n < 0) throw DomainError("shell_counts: negative argument");
  const double q = p.q;
  std::vector<ShellCount> out;
  if (n == 0) return {{k, 1.0}};
  if (k == 0) return {{n, sphere_size_real(p, n)}};
  // Go j steps towards the root, then n - j steps away along a fresh branch.
  const int jmax = std::min(n, k);
  for (int j = jmax; j >= 0; --j) {
    double count;
    if (j == n)
      count = 1.0;  // the ancestor itself
    else if (j == k)
      count = std::pow(q, n - k);  // through the root: q fresh branches
    else if (j == 0)
      count = std::pow(q, n);
    else
      count = (q - 1.0) * std::pow(q, n - j - 1);
    out.push_back({k + n - 2 * j, count});
  }
  return out;
}

std::string Ball::to_json() const {
  nlohmann::json j;
  j["radius"] = radius;
  j["center_word"] = center.word;
  auto& arr = j["vertices"] = nlohmann::json::array();
  for (std::size_t i = 0; i < vertices.size(); ++i)
    arr.push_back({{"index", i}, {"parent", parent[i]}, {"depth", depth[i]}, {"word", vertices[i].word}});
  return j.dump();
}

Ball enumerate_ball(const TreeParams& p, int r, std::size_t budget) {
  if (r < 0) throw DomainError("enumerate_ball: r must be >= 0");
  const std::uint64_t need = ball_volume(p, r);
  if (need > budget)
    throw BudgetError("enumerate_ball: ball of radius " + std::to_string(r) + " needs " +
                          std::to_string(need) + " vertices, budget is " + std::to_string(budget),
                      static_cast<std::size_t>(need));
  Ball b;
  b.radius = r;
  b.vertices.reserve(need);
  b.vertices.push_back(root_vertex());
  b.parent.push_back(-1);
  b.depth.push_back(0);
  std::size_t level_begin = 0;
  for (int d = 0; d < r; ++d) {
    const std::size_t level_end = b.vertices.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      const Vertex v = b.vertices[i];  // copy: push_back may reallocate
      const int back = v.word.empty() ? -1 : v.word.back();
      for (int label = 0; label <= p.q; ++label) {
        if (label == back) continue;
        b.vertices.push_back(step(v, label));
        b.parent.push_back(static_cast<int>(i));
        b.depth.push_back(d + 1);
      }
    }
    level_begin = level_end;
  }
  for (std::size_t i = 0; i < b.vertices.size(); ++i) b.index_of.emplace(b.vertices[i], static_cast<int>(i));
  return b;
}

VolumeReport check_volume_conditions(const TreeParams& p, int r_max) {
  if (r_max < 2) throw DomainError("check_volume_conditions: r_max must be >= 2");
  VolumeReport rep;
  rep.r_max = r_max;
  rep.A = 1;
  rep.ratio_min = std::numeric_limits<double>::infinity();
  for (int r = 1; r <= r_max; ++r) {
    const double v = static_cast<double>(ball_volume(p, r));
    const double v1 = static_cast<double>(ball_volume(p, r + 1));
    rep.c1_witnessed = std::max(rep.c1_witnessed, v / v1);
    rep.ratio_min = std::min(rep.ratio_min, v1 / v);
    rep.ratio_max = std::max(rep.ratio_max, v1 / v);
  }
  rep.pass = rep.c1_witnessed < 1.0 && rep.ratio_max <= p.q + 1.0;
  return rep;
}

}  // namespace stree
