#include <doctest.h>

#include <cmath>

#include "stree/calibration.hpp"
#include "stree/heat_kernel.hpp"
#include "stree/parallel.hpp"
#include "stree/process_sim.hpp"
#include "stree/stable_kernel.hpp"

using namespace stree;

namespace {

const TreeParams kP = TreeParams::make(2);
const StableParams kS = StableParams::make(1.0);

const JumpLaw& law() {
  static const JumpLaw l = build_jump_law(kP, kS);
  return l;
}

std::vector<double> kernel_bins(double t, int n_bins) {
  const auto sp = stable_kernel_spectral(kP, kS, t);
  std::vector<double> pr;
  double acc = 0.0;
  for (int n = 0; n < n_bins - 1; ++n) {
    pr.push_back(sphere_size_real(kP, n) * sp.values[n]);
    acc += pr.back();
  }
  pr.push_back(1.0 - acc);
  return pr;
}

}  // namespace

TEST_CASE("chi-square tail function") {
  CHECK(chi_square_sf(24.725, 11) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(chi_square_sf(26.217, 12) == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(chi_square_sf(3.841, 1) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(chi_square_sf(0.0, 3) == 1.0);
  CHECK(chi_square_statistic({10, 10}, {0.5, 0.5}) == 0.0);
}

TEST_CASE("jump law") {
  const auto& l = law();
  const auto sd = cached_spectral_quad(kP, kDefaultKernelDepth);
  const double diag = sd->root_diagonal([](Quad x) { return sqrtq(x); });
  CHECK(std::fabs(l.total_rate / diag - 1.0) <= 1e-4);
  CHECK(l.distance_cdf[1] == doctest::Approx(3.0 * l.nu[1] / l.total_rate).epsilon(1e-14));
  for (int n = 1; n <= l.N_jump; ++n) CHECK(l.distance_cdf[n] >= l.distance_cdf[n - 1]);
  CHECK(l.distance_cdf.back() == doctest::Approx(1.0 - l.eps_tail).epsilon(1e-15));
  CHECK(l.tail_jump_rate(0) == doctest::Approx(l.total_rate).epsilon(1e-14));
  CHECK(l.tail_jump_rate(l.N_jump) == doctest::Approx(l.far_rate()));
  // the tail of sum m(n) nu(n) is a power law of exponent alpha/2
  const auto a = build_jump_law(kP, kS, 15, 1.0);
  const auto b = build_jump_law(kP, kS, 60, 1.0);
  CHECK(b.eps_tail / a.eps_tail == doctest::Approx(0.5).epsilon(0.05));
  CHECK_THROWS_AS(build_jump_law(kP, kS, 15, 1e-8), ConvergenceError);
}

TEST_CASE("holding times are exponential") {
  const double t = 0.8;
  const long n = 200000;
  long none = 0;
  for (long i = 0; i < n; ++i) {
    CounterRng rng(5, i);
    const Path path = simulate_path(law(), root_vertex(), t, rng);
    none += path.times.size() == 1 && !path.far;
    CHECK(path.at(0.0).value() == root_vertex());
  }
  const double p0 = std::exp(-law().total_rate * t);
  CHECK(std::fabs(none / static_cast<double>(n) - p0) <= 3.0 * std::sqrt(p0 * (1 - p0) / n));
}

TEST_CASE("CTMC marginal matches the kernel") {
  const auto h = distance_histogram(law(), 1.0, 1000000, 13, 42);
  const double x = chi_square_statistic(h, kernel_bins(1.0, 13));
  CHECK(chi_square_sf(x, 12) > 0.01);
}

TEST_CASE("subordinated walk and CTMC agree in distribution") {
  const auto a = distance_histogram(law(), 1.0, 1000000, 13, 42);
  const auto b = subordinated_histogram(kP, kS, 1.0, 1000000, 13, 7);
  int df = 0;
  const double x = chi_square_two_sample(a, b, &df);
  CHECK(df == 12);
  CHECK(chi_square_sf(x, df) > 0.01);
  CHECK(chi_square_sf(chi_square_statistic(b, kernel_bins(1.0, 13)), 12) > 0.01);
}

TEST_CASE("results do not depend on the worker count") {
  thread_cap().store(1);
  const auto a = estimate_exit(law(), root_vertex(), 4, 20000, 9);
  thread_cap().store(4);
  const auto b = estimate_exit(law(), root_vertex(), 4, 20000, 9);
  thread_cap().store(0);
  CHECK(a.mean == b.mean);
  CHECK(a.level_counts == b.level_counts);
}

TEST_CASE("tail probability") {
  const auto e = estimate_tail(law(), 0.5, 8, 1000000, 3);
  CHECK(std::fabs(e.p_hat - escape_probability(kP, kS, 0.5, 8)) <= 3.0 * e.se);
  for (int r : {4, 8, 12, 16, 20}) {
    const auto er = estimate_tail(law(), 0.5, r, 200000, 11);
    const double ratio = er.p_hat / (0.5 * std::pow(r, -kS.beta));
    CHECK(ratio >= calibration::kTailLo);
    CHECK(ratio <= calibration::kTailHi);
  }
  // first-jump expansion
  const double exact = escape_probability(kP, kS, 1e-2, 8);
  CHECK(std::fabs(law().tail_jump_rate(8) * 1e-2 / exact - 1.0) <= 0.05);
}

TEST_CASE("exit times") {
  const int r = 6;
  const double t0 = std::pow(r, kS.beta);
  std::vector<double> grid;
  for (int k = 1; k <= 4; ++k) grid.push_back(k * t0);
  const auto st = estimate_exit(law(), root_vertex(), r, 100000, 21, grid, true);
  for (const auto& rec : st.records) {
    CHECK(rec.exit_time > 0.0);
    if (rec.far) {
      CHECK(!rec.exit_vertex);
    } else {
      REQUIRE(rec.exit_vertex);
      CHECK(rec.exit_vertex->depth() > r);
      CHECK(rec.exit_distance == rec.exit_vertex->depth());
    }
  }
  const double ratio = st.mean / t0;
  CHECK(ratio >= calibration::kExitLo);
  CHECK(ratio <= calibration::kExitHi);
  // geometric decay of the survival curve at multiples of r^{alpha/2}
  for (std::size_t k = 1; k < st.survival.size(); ++k) CHECK(st.survival[k] <= 0.9 * st.survival[k - 1]);
  // short-time exit bound P[tau < t] <= C t r^{-alpha/2} for r > t^{2/alpha}
  const auto sh = estimate_exit(law(), root_vertex(), r, 100000, 22, {0.5});
  CHECK((1.0 - sh.survival[0]) / (0.5 / t0) <= calibration::kTailHi);
  // off-center start
  Vertex y = root_vertex();
  for (int i = 0; i < 4; ++i) y = step(y, i % 3);
  const auto off = estimate_exit(law(), y, r, 50000, 23);
  CHECK(off.mean <= calibration::kExitHi * t0);
  CHECK(off.mean < st.mean);
  CHECK_THROWS_AS(estimate_exit(law(), y, 3, 10, 1), DomainError);
}
