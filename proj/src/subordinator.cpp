#include "stree/subordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "stree/quadrature.hpp"

namespace stree {
namespace {

constexpr double kPi = std::numbers::pi;
// e^{-92} ~ 1e-40: beyond this the Zolotarev integrand is invisible.
constexpr double kCutExponent = 92.0;

// log(sin x / x); the series keeps full relative accuracy as x -> 0.
double log_sinc(double x) {
  if (std::fabs(x) < 0.1) {
    const double x2 = x * x;
    return -x2 * (1.0 / 6.0 + x2 * (1.0 / 180.0 + x2 * (1.0 / 2835.0 + x2 * (1.0 / 37800.0 + x2 / 467775.0))));
  }
  return std::log(std::sin(x) / x);
}

// log A(phi) - log A(0), free of the phi-power cancellation.
double log_a_rel(const StableParams& p, double phi) {
  const double b = p.beta;
  const double g = b / (1.0 - b);
  return g * log_sinc(b * phi) + log_sinc((1.0 - b) * phi) - log_sinc(phi) / (1.0 - b);
}

// (A(phi) - A0) / A0
double a_excess(const StableParams& p, double phi) { return std::expm1(log_a_rel(p, phi)); }

// Largest phi in (0, pi] with (A - A0) y <= kCutExponent.
double phi_cut(const StableParams& p, double y) {
  const double a0 = p.c1_alpha;
  const double hi_probe = kPi * (1.0 - 1e-12);
  if (a0 * a_excess(p, hi_probe) * y <= kCutExponent) return kPi;
  double lo = 0.0, hi = hi_probe;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (a0 * a_excess(p, mid) * y > kCutExponent)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

QuadOptions tight() {
  QuadOptions o;
  o.rel_tol = 1e-12;
  o.max_intervals = 2000;
  return o;
}

// log eta_1(x) by the Zolotarev integral.
DensityEval zolotarev_unit(const StableParams& p, double x) {
  const double b = p.beta;
  const double g = b / (1.0 - b);
  const double a0 = p.c1_alpha;
  const double y = std::pow(x, -g);
  const double top = phi_cut(p, y);
  auto f = [&](double phi) {
    const double e = a_excess(p, phi);
    return (1.0 + e) * std::exp(-a0 * e * y);
  };
  const auto r = integrate(f, 0.0, top, tight(), {0.5 * top});
  if (!r.converged) throw ConvergenceError("eta_density: Zolotarev quadrature", r.abs_error);
  DensityEval out;
  out.log_value = std::log(g / kPi) - (g + 1.0) * std::log(x) - a0 * y + std::log(a0 * r.value);
  out.value = std::exp(out.log_value);
  out.abs_error = out.value * r.abs_error / r.value;
  out.method = EtaMethod::Zolotarev;
  return out;
}

// eta_1(x) by the inverse Laplace integral along the branch cut, s = x r.
DensityEval branch_cut_unit(const StableParams& p, double x) {
  const double b = p.beta;
  const double cb = std::cos(kPi * b), sb = std::sin(kPi * b);
  auto f = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double w = std::pow(s / x, b);
    return std::exp(-s - w * cb) * std::sin(w * sb);
  };
  QuadOptions o = tight();
  o.rel_tol = 1e-11;
  const auto r = integrate(f, 0.0, 1000.0, o, {1e-6, 1e-3, 0.05, 0.5, 2.0, 8.0, 30.0, 100.0, 300.0});
  if (!r.converged) throw ConvergenceError("eta_density: branch-cut quadrature", r.abs_error);
  DensityEval out;
  out.value = r.value / (kPi * x);
  out.log_value = std::log(out.value);
  out.abs_error = r.abs_error / (kPi * x);
  out.method = EtaMethod::BranchCut;
  return out;
}

}  // namespace

StableParams StableParams::make(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("StableParams: alpha must lie in (0, 2)");
  StableParams s;
  s.alpha = alpha;
  s.beta = alpha / 2.0;
  s.c1_alpha = (1.0 - s.beta) * std::pow(s.beta, s.beta / (1.0 - s.beta));
  return s;
}

const char* to_string(EtaMethod m) {
  switch (m) {
    case EtaMethod::Auto: return "auto";
    case EtaMethod::BranchCut: return "branch_cut";
    case EtaMethod::Zolotarev: return "zolotarev";
    case EtaMethod::ClosedForm: return "closed_form";
  }
  return "?";
}

double zolotarev_a(const StableParams& p, double phi) {
  return p.c1_alpha * std::exp(log_a_rel(p, phi));
}

DensityEval eta_density(const StableParams& p, double t, double u, EtaMethod method) {
  if (!(t > 0.0) || !(u > 0.0)) throw DomainError("eta_density: requires t > 0 and u > 0");
  DensityEval out;
  if (method == EtaMethod::ClosedForm) {
    if (p.alpha != 1.0) throw DomainError("eta_density: closed form exists only for alpha = 1");
    out.log_value = std::log(t) - 1.5 * std::log(u) - t * t / (4.0 * u) - std::log(2.0 * std::sqrt(kPi));
    out.value = std::exp(out.log_value);
    out.method = method;
  } else {
    const double scale = std::pow(t, -1.0 / p.beta);
    const double x = scale * u;
    if (method == EtaMethod::Auto) method = (x <= 1.0) ? EtaMethod::Zolotarev : EtaMethod::BranchCut;
    out = (method == EtaMethod::Zolotarev) ? zolotarev_unit(p, x) : branch_cut_unit(p, x);
    out.value *= scale;
    out.abs_error *= scale;
    out.log_value += std::log(scale);
  }
  out.t = t;
  out.u = u;
  return out;
}

double eta_cdf(const StableParams& p, double t, double u) {
  if (!(t > 0.0)) throw DomainError("eta_cdf: t must be > 0");
  if (u <= 0.0) return 0.0;
  const double g = p.beta / (1.0 - p.beta);
  const double a0 = p.c1_alpha;
  const double y = std::pow(std::pow(t, -1.0 / p.beta) * u, -g);
  if (a0 * y > 745.0) return 0.0;
  const double top = phi_cut(p, y);
  auto f = [&](double phi) { return std::exp(-a0 * a_excess(p, phi) * y); };
  std::vector<double> bp{0.5 * top};
  for (double d : {1e-1, 1e-2, 1e-3, 1e-4})
    if (top - d > 0.5 * top) bp.push_back(top - d);
  const auto r = integrate(f, 0.0, top, tight(), bp);
  return std::clamp(std::exp(-a0 * y) * r.value / kPi, 0.0, 1.0);
}

double subordinator_levy_density(const StableParams& p, double u) {
  if (!(u > 0.0)) throw DomainError("subordinator_levy_density: u must be > 0");
  return p.beta / std::tgamma(1.0 - p.beta) * std::pow(u, -1.0 - p.beta);
}

double levy_density_from_small_time(const StableParams& p, double u) {
  auto f = [&](double t) { return eta_density(p, t, u).value / t; };
  const double f1 = f(1e-2), f2 = f(1e-3), f3 = f(1e-4);
  const double r1 = (10.0 * f2 - f1) / 9.0;
  const double r2 = (10.0 * f3 - f2) / 9.0;
  return (100.0 * r2 - r1) / 99.0;
}

double eta_laplace_numeric(const StableParams& p, double t, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("eta_laplace_numeric: lambda must be > 0");
  const double scale = std::pow(t, 1.0 / p.beta);
  double lo = scale;
  while (eta_cdf(p, t, lo) > 1e-16) lo *= 0.1;
  const double hi = std::max(lo * 10.0, 80.0 / lambda);
  // u = e^v
  auto f = [&](double v) {
    const double u = std::exp(v);
    const auto e = eta_density(p, t, u);
    return std::exp(e.log_value - lambda * u + v);
  };
  std::vector<double> bp;
  for (double v = std::log(lo); v < std::log(hi); v += 1.0) bp.push_back(v);
  bp.push_back(std::log(scale));
  QuadOptions o;
  o.rel_tol = 1e-10;
  return integrate(f, std::log(lo), std::log(hi), o, bp).value;
}

double log_eta_inner_envelope(const StableParams& p, double t, double u) {
  const double a = p.alpha;
  return std::log(t) / (2.0 - a) - (4.0 - a) / (4.0 - 2.0 * a) * std::log(u) -
         p.c1_alpha * std::pow(t, 2.0 / (2.0 - a)) * std::pow(u, -a / (2.0 - a));
}

EtaEnvelopeReport check_eta_envelopes(const StableParams& p, double c) {
  if (!(c > 0.0)) throw DomainError("check_eta_envelopes: c must be > 0");
  EtaEnvelopeReport rep;
  rep.c = c;
  rep.inner_min = rep.outer_min = std::numeric_limits<double>::infinity();
  rep.inner_max = rep.outer_max = 0.0;
  for (int i = 0; i <= 12; ++i) {
    const double t = std::pow(10.0, -1.0 + i * 0.25);
    for (int j = 0; j <= 24; ++j) {
      const double x = std::pow(10.0, -2.0 + j * 0.25);
      const double u = x * std::pow(t, 1.0 / p.beta);
      const auto e = eta_density(p, t, u);
      if (x < c) {
        const double r = std::exp(e.log_value - log_eta_inner_envelope(p, t, u));
        rep.inner_min = std::min(rep.inner_min, r);
        rep.inner_max = std::max(rep.inner_max, r);
        ++rep.inner_points;
      } else if (x > c) {
        const double r = std::exp(e.log_value - std::log(t) + (1.0 + p.beta) * std::log(u));
        rep.outer_min = std::min(rep.outer_min, r);
        rep.outer_max = std::max(rep.outer_max, r);
        ++rep.outer_points;
      }
    }
  }
  return rep;
}

}  // namespace stree
