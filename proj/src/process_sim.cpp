#include "stree/process_sim.hpp"

#include <cmath>
#include <numbers>

#include "stree/parallel.hpp"
#include "stree/report.hpp"
#include "stree/stable_kernel.hpp"

namespace stree {

double JumpLaw::tail_jump_rate(int r) const {
  if (r < 0) return total_rate;
  if (r >= N_jump) return far_rate();
  return total_rate * (1.0 - distance_cdf[r]);
}

JumpLaw build_jump_law(const TreeParams& p, const StableParams& s, int N_jump, double max_tail) {
  if (N_jump < 1) throw DomainError("build_jump_law: N_jump must be >= 1");
  const LevyTable& tab = levy_measure_table(p, s, N_jump);
  JumpLaw law;
  law.tree = p;
  law.stable = s;
  law.N_jump = N_jump;
  law.total_rate = tab.lambda_star;
  law.nu = tab.nu;
  law.distance_cdf.assign(N_jump + 1, 0.0);
  double acc = 0.0;
  for (int n = 1; n <= N_jump; ++n) {
    acc += sphere_size_real(p, n) * tab.nu[n];
    law.distance_cdf[n] = acc / law.total_rate;
  }
  law.eps_tail = 1.0 - law.distance_cdf[N_jump];
  if (!(law.total_rate > 0.0) || !std::isfinite(law.total_rate))
    throw ConvergenceError("build_jump_law: total rate not positive", law.total_rate);
  if (!(law.eps_tail >= 0.0) || law.eps_tail > max_tail)
    throw ConvergenceError("build_jump_law: tail mass above tolerance", law.eps_tail);
  return law;
}

std::optional<Vertex> Path::at(double t) const {
  if (far && t >= far_time) return std::nullopt;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  return states[static_cast<std::size_t>(it - times.begin()) - 1];
}

int simulate_distance(const JumpLaw& law, double t, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  const Path path = simulate_path(law, root_vertex(), t, rng);
  const auto x = path.at(t);
  return x ? x->depth() : -1;
}

int subordinated_distance(const TreeParams& p, const StableParams& s, double t, std::uint64_t seed,
                          std::uint64_t stream, double s_far, int d_far) {
  CounterRng rng(seed, stream);
  const double S = sample_subordinator_increment(s, t, rng);
  if (S > s_far) return -1;
  std::poisson_distribution<long> steps(S);
  const long k = S > 0.0 ? steps(rng) : 0;
  std::uniform_int_distribution<int> dir(0, p.q);
  int d = 0;
  for (long i = 0; i < k; ++i) {
    if (d == 0)
      d = 1;
    else
      d += dir(rng) == 0 ? -1 : 1;
    if (d > d_far) return -1;
  }
  return d;
}

namespace {

template <class F>
std::vector<long> histogram(long n_samples, int n_bins, F draw) {
  if (n_bins < 2) throw DomainError("histogram: need at least two bins");
  std::vector<int> out(static_cast<std::size_t>(n_samples));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = draw(i); });
  std::vector<long> h(n_bins, 0);
  for (int d : out) ++h[(d < 0 || d >= n_bins - 1) ? n_bins - 1 : d];
  return h;
}

}  // namespace

std::vector<long> distance_histogram(const JumpLaw& law, double t, long n_samples, int n_bins, std::uint64_t seed) {
  return histogram(n_samples, n_bins, [&](std::size_t i) { return simulate_distance(law, t, seed, i); });
}

std::vector<long> subordinated_histogram(const TreeParams& p, const StableParams& s, double t, long n_samples,
                                         int n_bins, std::uint64_t seed) {
  return histogram(n_samples, n_bins, [&](std::size_t i) { return subordinated_distance(p, s, t, seed, i); });
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw DomainError("chi_square_sf: df must be >= 1");
  if (x <= 0.0) return 1.0;
  const double h = 0.5 * x;
  if (df % 2 == 0) {
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < df / 2; ++j) {
      term *= h / j;
      sum += term;
    }
    return std::exp(-h) * sum;
  }
  double term = std::sqrt(h) * 2.0 / std::sqrt(std::numbers::pi);  // h^{1/2} / Gamma(3/2)
  double sum = 0.0;
  for (int j = 1; j <= (df - 1) / 2; ++j) {
    sum += term;
    term *= h / (j + 0.5);
  }
  return std::erfc(std::sqrt(h)) + std::exp(-h) * sum;
}

double chi_square_statistic(const std::vector<long>& counts, const std::vector<double>& probs) {
  if (counts.size() != probs.size()) throw DomainError("chi_square_statistic: size mismatch");
  double n = 0.0;
  for (long c : counts) n += static_cast<double>(c);
  double x = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = n * probs[i];
    if (e <= 0.0) {
      if (counts[i] > 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    x += (counts[i] - e) * (counts[i] - e) / e;
  }
  return x;
}

double chi_square_two_sample(const std::vector<long>& a, const std::vector<long>& b, int* df) {
  if (a.size() != b.size()) throw DomainError("chi_square_two_sample: size mismatch");
  double na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += static_cast<double>(a[i]);
    nb += static_cast<double>(b[i]);
  }
  const double ka = std::sqrt(nb / na), kb = std::sqrt(na / nb);
  double x = 0.0;
  int used = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = static_cast<double>(a[i] + b[i]);
    if (s == 0.0) continue;
    const double d = ka * a[i] - kb * b[i];
    x += d * d / s;
    ++used;
  }
  if (df) *df = used - 1;
  return x;
}

TailEstimate estimate_tail(const JumpLaw& law, double t, int r, long n_samples, std::uint64_t seed) {
  if (!(t > 0.0) || r < 0 || n_samples < 1) throw DomainError("estimate_tail: bad arguments");
  const auto h = distance_histogram(law, t, n_samples, r + 2, seed);
  TailEstimate e;
  e.t = t;
  e.r = r;
  e.n_samples = n_samples;
  e.p_hat = static_cast<double>(h.back()) / n_samples;
  e.se = std::sqrt(e.p_hat * (1.0 - e.p_hat) / n_samples);
  return e;
}

ExitStatistics estimate_exit(const JumpLaw& law, const Vertex& x, int r, long n_samples, std::uint64_t seed,
                             const std::vector<double>& t_grid, bool keep_records) {
  if (r < 0 || x.depth() > r) throw DomainError("estimate_exit: start must lie in the ball");
  if (n_samples < 2) throw DomainError("estimate_exit: need at least two samples");
  if (2 * r + 1 > law.N_jump) throw DomainError("estimate_exit: far jumps must leave the ball (2r + 1 <= N_jump)");
  const std::size_t n = static_cast<std::size_t>(n_samples);
  std::vector<double> times(n);
  std::vector<int> levels(n);
  std::vector<ExitRecord> recs(keep_records ? n : 0);
  std::exponential_distribution<double> hold0(law.total_rate);
  parallel_for(n, [&](std::size_t i) {
    CounterRng rng(seed, i);
    auto hold = hold0;
    Vertex v = x;
    double t = 0.0;
    for (;;) {
      t += hold(rng);
      const int len = law.sample_length(rng);
      if (len < 0) {
        levels[i] = -1;
        break;
      }
      Vertex y = uniform_sphere_vertex(law.tree, v, len, rng);
      if (y.depth() > r) {
        levels[i] = y.depth();
        v = std::move(y);
        break;
      }
      v = std::move(y);
    }
    times[i] = t;
    if (keep_records) {
      ExitRecord& rec = recs[i];
      rec.start = x;
      rec.radius = r;
      rec.exit_time = t;
      rec.far = levels[i] < 0;
      rec.exit_distance = levels[i];
      if (!rec.far) rec.exit_vertex = v;
      rec.seed = i;
    }
  });

  ExitStatistics st;
  st.radius = r;
  st.start = x;
  st.n_samples = n_samples;
  double sum = 0.0, sum2 = 0.0;
  for (double t : times) {
    sum += t;
    sum2 += t * t;
  }
  st.mean = sum / n_samples;
  st.se = std::sqrt(std::max(0.0, sum2 / n_samples - st.mean * st.mean) / (n_samples - 1.0));
  st.t_grid = t_grid;
  for (double tg : t_grid) {
    long alive = 0;
    for (double t : times) alive += t > tg;
    st.survival.push_back(static_cast<double>(alive) / n_samples);
  }
  for (int l : levels) {
    if (l < 0) {
      ++st.far_count;
      continue;
    }
    if (static_cast<std::size_t>(l) >= st.level_counts.size()) st.level_counts.resize(l + 1, 0);
    ++st.level_counts[l];
  }
  st.records = std::move(recs);
  return st;
}

void write_exit_csv(std::ostream& os, const std::vector<ExitRecord>& records) {
  write_csv_row(os, {"seed", "exit_time", "exit_distance", "far"});
  for (const auto& r : records)
    write_csv_row(os, {std::to_string(r.seed), num(r.exit_time), std::to_string(r.exit_distance), r.far ? "1" : "0"});
}

}  // namespace stree
