#include <doctest.h>

#include <cmath>
#include <vector>

#include "stree/calibration.hpp"
#include "stree/heat_kernel.hpp"

using namespace stree;

namespace {

// e^{-tL} e_0 by its Taylor series in long double; L^k e_0 lives on [0, k].
std::vector<long double> taylor_oracle(int q, double t, int terms) {
  const int M = terms + 2;
  std::vector<long double> v(M, 0.0L), acc(M, 0.0L);
  v[0] = acc[0] = 1.0L;
  for (int k = 0; k < terms; ++k) {
    std::vector<long double> w(M, 0.0L);
    for (int n = 0; n < M - 1; ++n) {
      const long double up = v[n + 1];
      w[n] = (n == 0) ? v[0] - up : v[n] - (v[n - 1] + q * up) / (q + 1.0L);
    }
    for (int n = 0; n < M; ++n) {
      v[n] = -w[n] * t / (k + 1);
      acc[n] += v[n];
    }
  }
  return acc;
}

}  // namespace

TEST_CASE("generator rows") {
  const auto p = TreeParams::make(3);
  const auto g = RadialGenerator::make(p, 10);
  CHECK(g.diag.size() == 11);
  CHECK(g.off_upper[0] == doctest::Approx(-1.0));
  CHECK(g.off_upper[4] == doctest::Approx(-0.75));
  CHECK(g.off_lower[4] == doctest::Approx(-0.25));
  const auto s = g.symmetric_off();
  CHECK(s[0] == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(s[3] == doctest::Approx(-std::sqrt(3.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("ground spherical function is an eigenfunction with eigenvalue 1 - gamma") {
  for (int q : {2, 3, 5}) {
    const auto p = TreeParams::make(q);
    for (int n = 0; n <= 50; ++n) {
      const double lf = (n == 0) ? phi0(p, 0) - phi0(p, 1)
                                 : phi0(p, n) - (phi0(p, n - 1) + q * phi0(p, n + 1)) / (q + 1.0);
      CHECK(lf == doctest::Approx(p.b2 * phi0(p, n)).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniformization against the Taylor oracle") {
  for (int q : {2, 3}) {
    const auto p = TreeParams::make(q);
    for (double t : {0.01, 0.1, 0.5, 1.0, 2.0}) {
      const auto ref = taylor_oracle(q, t, 80);
      HeatKernelOptions o;
      o.spectral = false;
      const auto rv = heat_kernel_radial(p, t, o);
      for (int n = 0; n <= 20; ++n) {
        CAPTURE(t);
        CAPTURE(n);
        CHECK(std::fabs(rv.values[n] / static_cast<double>(ref[n]) - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("mass is conserved") {
  const auto p = TreeParams::make(2);
  for (double t : {0.5, 10.0, 80.0}) {
    HeatKernelOptions o;
    o.spectral = false;
    const auto rv = heat_kernel_radial(p, t, o);
    double m = 0.0;
    for (int n = 0; n <= rv.N; ++n) m += sphere_size_real(p, n) * rv.values[n];
    CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rv.tail_mass_bound <= 1e-8);
  }
}

TEST_CASE("uniformization and binary128 spectral routes agree") {
  const auto p = TreeParams::make(2);
  for (double t : {0.5, 1.0, 2.0, 5.0, 20.0}) {
    const auto rv = heat_kernel_radial(p, t);
    CAPTURE(t);
    CHECK(rv.max_rel_disagreement <= 1e-8);
  }
}

TEST_CASE("bottom of the spectrum") {
  const auto p = TreeParams::make(2);
  const auto sq = spectral_data_quad(p, 400);
  CHECK(std::fabs(static_cast<double>(sq.eigenvalues[0]) - (1.0 - 2.0 * std::sqrt(2.0) / 3.0)) <= 1e-3);
  CHECK(static_cast<double>(sq.eigenvalues[400]) <= 1.0 + p.gamma);
  CHECK(sq.reconstruction_residual() <= 1e-30);
  const auto sd = spectral_data_double(p, 400);
  CHECK(sd.reconstruction_residual() <= 1e-13);
  CHECK(std::fabs(sd.eigenvalues[0] - static_cast<double>(sq.eigenvalues[0])) <= 1e-12);
  // Gauss-quadrature moments: (L^k)(o,o) is exact once N > k
  for (int k = 1; k <= 6; ++k) {
    const double mom = sq.root_diagonal([k](Quad l) {
      Quad r = 1;
      for (int i = 0; i < k; ++i) r *= l;
      return r;
    });
    const auto v = taylor_oracle(2, 0.0, 0);  // e_0
    std::vector<long double> w(v.begin(), v.end());
    w.resize(k + 2, 0.0L);
    for (int i = 0; i < k; ++i) {
      std::vector<long double> z(w.size(), 0.0L);
      for (std::size_t n = 0; n + 1 < w.size(); ++n)
        z[n] = (n == 0) ? w[0] - w[1] : w[n] - (w[n - 1] + 2.0L * w[n + 1]) / 3.0L;
      w = z;
    }
    CHECK(mom == doctest::Approx(static_cast<double>(w[0])).epsilon(1e-15));
  }
}

TEST_CASE("one-dimensional heat kernel") {
  double s = 0.0;
  for (int j = -200; j <= 200; ++j) s += heat_kernel_1d(3.0, j);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(heat_kernel_1d(1.0, 0) == doctest::Approx(std::exp(-1.0) * 1.2660658777520084).epsilon(1e-14));
  CHECK(heat_kernel_1d(2.0, -3) == heat_kernel_1d(2.0, 3));
}

TEST_CASE("heat kernel envelope band") {
  std::vector<double> tg;
  for (double t = 0.5; t <= 50.0; t *= 1.5) tg.push_back(t);
  std::vector<int> ng;
  for (int n = 0; n <= 40; n += 2) ng.push_back(n);
  for (int q : {2, 3}) {
    auto band = check_hk_envelope(TreeParams::make(q), tg, ng);
    band.frozen_lo = calibration::kHeatLo;
    band.frozen_hi = calibration::kHeatHi;
    CAPTURE(band.lower);
    CAPTURE(band.upper);
    CHECK(band.pass());
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(heat_kernel_radial(TreeParams::make(2), -1.0), DomainError);
}
