#include "stree/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stree/common.hpp"

namespace stree {
namespace {

constexpr double kDebyeMinOrder = 60.0;

double log_series(double nu, double z) {
  const double half = 0.5 * z;
  const double h2 = half * half;
  const double lh = std::log(half);
  // Largest term sits where k (k + nu) ~ (z/2)^2.
  const double kpeak = std::max(0.0, std::floor(0.5 * (-nu + std::sqrt(nu * nu + z * z))));
  const double log_peak = (2.0 * kpeak + nu) * lh - std::lgamma(kpeak + 1.0) - std::lgamma(kpeak + nu + 1.0);
  constexpr double eps = 1e-18;
  double sum = 1.0;
  double term = 1.0;
  for (double k = kpeak;; k += 1.0) {
    term *= h2 / ((k + 1.0) * (k + 1.0 + nu));
    sum += term;
    if (term < eps * sum) break;
  }
  term = 1.0;
  for (double k = kpeak; k > 0.0; k -= 1.0) {
    term *= k * (k + nu) / h2;
    sum += term;
    if (term < eps * sum) break;
  }
  return log_peak + std::log(sum);
}

// e^{-z} I_nu(z) from the large-argument expansion; valid for z >= max(30, nu^2/2).
double scaled_hankel(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double sum = 1.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 400; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (k * 8.0 * z);
    const double at = std::fabs(term);
    if (at > prev) break;  // asymptotic series started to diverge
    sum += term;
    if (at < 1e-18 * std::fabs(sum)) break;
    prev = at;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

// Debye polynomials u_k(p), k = 1..4.
double debye_sum(double p, double nu) {
  const double p2 = p * p;
  const double u1 = p * (3.0 - 5.0 * p2) / 24.0;
  const double u2 = p2 * (81.0 + p2 * (-462.0 + p2 * 385.0)) / 1152.0;
  const double u3 = p * p2 * (30375.0 + p2 * (-369603.0 + p2 * (765765.0 - p2 * 425425.0))) / 414720.0;
  const double u4 =
      p2 * p2 *
      (4465125.0 + p2 * (-94121676.0 + p2 * (349922430.0 + p2 * (-446185740.0 + p2 * 185910725.0)))) /
      39813120.0;
  const double inv = 1.0 / nu;
  return 1.0 + inv * (u1 + inv * (u2 + inv * (u3 + inv * u4)));
}

double log_debye(double nu, double z) {
  const double x = z / nu;
  const double sq = std::sqrt(1.0 + x * x);
  const double eta = sq + std::log(x / (1.0 + sq));
  return nu * eta - 0.5 * std::log(2.0 * std::numbers::pi * nu) - 0.5 * std::log(sq) +
         std::log(debye_sum(1.0 / sq, nu));
}

}  // namespace

BesselBranch bessel_branch(double nu, double z) {
  if (z >= std::max(30.0, 0.5 * nu * nu)) return BesselBranch::Hankel;
  if (nu > kDebyeMinOrder) return BesselBranch::Debye;
  return BesselBranch::Series;
}

BesselEval bessel_i_scaled(double nu, double z) {
  if (!(nu >= 0.0) || !(z >= 0.0)) throw DomainError("bessel_i_scaled: requires nu >= 0 and z >= 0");
  BesselEval e{nu, z, 0.0, 0.0};
  if (z == 0.0) {
    e.scaled_value = (nu == 0.0) ? 1.0 : 0.0;
    e.log_value = (nu == 0.0) ? 0.0 : -std::numeric_limits<double>::infinity();
    return e;
  }
  switch (bessel_branch(nu, z)) {
    case BesselBranch::Hankel:
      e.scaled_value = scaled_hankel(nu, z);
      e.log_value = std::log(e.scaled_value) + z;
      break;
    case BesselBranch::Debye:
      e.log_value = log_debye(nu, z);
      e.scaled_value = std::exp(e.log_value - z);
      break;
    case BesselBranch::Series:
      e.log_value = log_series(nu, z);
      e.scaled_value = std::exp(e.log_value - z);
      break;
  }
  return e;
}

bool check_ileq(double nu, double z, double C) {
  const auto e = bessel_i_scaled(nu, z);
  return e.scaled_value * std::sqrt(z) <= C;
}

double log_iequiv_envelope(double nu, double z) {
  const double s = std::hypot(nu, z);
  return s + nu * std::log(z / (nu + s)) - 0.5 * std::log(z + nu);
}

double check_iequiv(double nu, double z) {
  if (nu < 1.0 || !(z > 0.0)) throw DomainError("check_iequiv: requires nu >= 1 and z > 0");
  return std::exp(bessel_i_scaled(nu, z).log_value - log_iequiv_envelope(nu, z));
}

double check_ieq(double nu, double z, double a) {
  if (nu < 1.0 || !(a > 0.0 && a < 1.0) || !(z > std::max(1.0, a * nu * nu)))
    throw DomainError("check_ieq: requires nu >= 1, 0 < a < 1 and z > max(1, a nu^2)");
  return bessel_i_scaled(nu, z).scaled_value * std::sqrt(z);
}

}  // namespace stree
