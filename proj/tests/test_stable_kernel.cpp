#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "stree/calibration.hpp"
#include "stree/stable_kernel.hpp"

using namespace stree;

namespace {

double rel(double a, double b) { return std::fabs(a / b - 1.0); }

}  // namespace

TEST_CASE("spectral and subordination kernels agree") {
  const auto p = TreeParams::make(2);
  for (double a : {0.5, 1.0, 1.5}) {
    const auto s = StableParams::make(a);
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const auto sp = stable_kernel_spectral(p, s, t);
      const auto qu = stable_kernel_quadrature(p, s, t);
      CAPTURE(a);
      CAPTURE(t);
      for (int n = 0; n <= 15; ++n) CHECK(rel(qu.values[n], sp.values[n]) <= 1e-9);
      const Eigen::Index d = qu.values.size();
      CHECK((qu.alt_values.head(d) + qu.alt_values.tail(d) - qu.values).cwiseAbs().maxCoeff() <= 1e-15);
    }
  }
}

TEST_CASE("alpha = 1 with the closed-form subordinator density") {
  const auto p = TreeParams::make(3);
  const auto s = StableParams::make(1.0);
  QuadratureKernelOptions o;
  o.eta = EtaMethod::ClosedForm;
  o.nmax = 8;
  const auto qu = stable_kernel_quadrature(p, s, 1.5, o);
  const auto sp = stable_kernel_spectral(p, s, 1.5);
  for (int n = 0; n <= 8; ++n) CHECK(rel(qu.values[n], sp.values[n]) <= 1e-9);
}

TEST_CASE("initial condition and domain") {
  const auto p = TreeParams::make(2);
  const auto s = StableParams::make(1.0);
  const auto z = stable_kernel_spectral(p, s, 0.0, 50);
  CHECK(z.values[0] == 1.0);
  CHECK(z.values.tail(50).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(stable_kernel_spectral(p, s, -1.0), DomainError);
  CHECK_THROWS_AS(stable_kernel_quadrature(p, s, 0.0), DomainError);
}

TEST_CASE("resolved mass plus escape probability is one") {
  const auto p = TreeParams::make(2);
  for (double a : {0.5, 1.0, 1.5}) {
    const auto s = StableParams::make(a);
    for (double t : {0.5, 2.0}) {
      const auto sp = stable_kernel_spectral(p, s, t);
      CHECK(sp.resolved > 100);
      CHECK(std::fabs(sp.tail_mass_bound - escape_probability(p, s, t, sp.resolved)) <= 1e-9);
    }
  }
}

TEST_CASE("Levy measure: two routes, small-time limit, comparability") {
  const auto p = TreeParams::make(2);
  for (double a : {0.5, 1.0, 1.5}) {
    const auto s = StableParams::make(a);
    const auto& tab = levy_measure_table(p, s, 40);
    CAPTURE(a);
    CHECK(rel(tab.lambda_star_quad, tab.lambda_star) <= 1e-7);
    CHECK(rel(tab.lambda_star, total_jump_rate(p, s)) <= 1e-15);
    CHECK(tab.eps_tail() > 0.0);
    double lo = 1e300, hi = 0.0;
    for (int n = 1; n <= 40; ++n) {
      CHECK(rel(tab.nu[n], levy_measure_spectral(p, s, n)) <= 1e-7);
      const double v = tab.nu[n] * std::pow(n, 1.0 + s.beta) * std::pow(2.0, n);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo <= 10.0);
    for (int n : {1, 3, 10}) CHECK(rel(levy_from_small_time(p, s, n), tab.nu[n]) <= 1e-3);
    CHECK(levy_measure(p, s, 7) == tab.nu[7]);
  }
}

TEST_CASE("saddle points of the envelope exponents") {
  const auto p = TreeParams::make(2);
  CHECK(outer_exponent(p, 3.0) == doctest::Approx(-std::log(4.0 / 3.0)).epsilon(1e-14));
  CHECK(outer_exponent(p, 2.9) < outer_exponent(p, 3.0));
  CHECK(outer_exponent(p, 3.1) < outer_exponent(p, 3.0));
}

TEST_CASE("two-regime kernel envelopes") {
  for (int q : {2, 3})
    for (double a : {0.5, 1.0, 1.5}) {
      const auto p = TreeParams::make(q);
      const auto s = StableParams::make(a);
      const auto rep = check_kernel_envelopes(p, s);
      CAPTURE(q);
      CAPTURE(a);
      CHECK(rep.inner.lower >= calibration::kKernelInnerLo);
      CHECK(rep.inner.upper <= calibration::kKernelInnerHi);
      CHECK(rep.outer.lower >= calibration::kKernelOuterLo);
      CHECK(rep.outer.upper <= calibration::kKernelOuterHi);
      CHECK(rep.outer.upper / rep.outer.lower <= 20.0);
      CHECK(rel(rep.u0_inner_numeric, rep.u0_inner) <= 1e-6);
      CHECK(rel(rep.p_u0_inner_numeric, rep.p_u0_inner) <= 1e-6);
      CHECK(rel(rep.u0_outer_numeric, rep.u0_outer) <= 1e-6);
      CHECK(rel(rep.p_u0_outer_numeric, rep.p_u0_outer) <= 1e-6);
      // with a 1/t correction the fitted rate approaches the bottom of the spectrum
      CHECK(rel(rep.corrected_rate, rep.target_rate) <= 0.02);
    }
  const auto rep = check_kernel_envelopes(TreeParams::make(2), StableParams::make(1.0));
  CHECK(rep.target_rate == doctest::Approx(0.239146).epsilon(1e-5));
  CHECK(rep.rate_rel_err() <= 0.02);
  CHECK(std::fabs(rep.fitted_exponent + 1.5) <= 0.15);
}

TEST_CASE("walk band probability past the uniformization switch") {
  const auto p = TreeParams::make(2);
  RadialPropagator prop(p, -1);
  for (double u : {1200.0, 3000.0}) {
    const Eigen::VectorXd w = prop.mass(u);
    for (auto [a, b] : {std::pair<long, long>{0, 300}, {350, 420}, {380, 1000000}}) {
      double exact = 0.0;
      for (long n = a; n <= std::min<long>(b, w.size() - 1); ++n) exact += w[n];
      WalkBandProbability band(p, a, b);
      CAPTURE(u);
      CAPTURE(a);
      CHECK(std::fabs(band(u) - exact) <= 1e-10 + 1e-8 * exact);
    }
  }
}

TEST_CASE("annulus mass matches the spectral kernel") {
  const auto p = TreeParams::make(2);
  const auto s = StableParams::make(1.0);
  const auto sp = stable_kernel_spectral(p, s, 10.0);
  const auto am = mass_repartition(p, s, 10.0, 0.5, 2.0, 1.0);
  double ref = 0.0;
  for (long n = am.n_lo; n <= am.n_hi; ++n) ref += sphere_size_real(p, static_cast<int>(n)) * sp.values[n];
  CHECK(rel(am.mass, ref) <= 1e-8);
}

TEST_CASE("mass repartition at the natural scale") {
  const auto p = TreeParams::make(2);
  const auto s = StableParams::make(1.0);
  std::vector<double> lx, ly;
  for (double t : {20.0, 60.0, 100.0}) {
    const auto m = mass_repartition(p, s, t, 0.5, 2.0, 2.0);
    CHECK(m.mass > 0.01);
    CHECK(m.mass < 0.99);
    lx.push_back(std::log(t));
    ly.push_back(std::log(m.mass / t));
  }
  const double sl = (ly[2] - ly[0]) / (lx[2] - lx[0]);
  CHECK(std::fabs(sl + 1.0) <= 0.1);
  CHECK(mass_repartition(p, s, 50.0, 0.01, 100.0, 2.0).mass >= 0.9);
  CHECK(mass_repartition(p, s, 100.0, 0.5, 2.0, 1.0).mass <= 0.05);
}
