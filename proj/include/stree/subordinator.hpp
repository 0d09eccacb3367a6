#ifndef STREE_SUBORDINATOR_HPP
#define STREE_SUBORDINATOR_HPP

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "stree/common.hpp"

namespace stree {

struct StableParams {
  double alpha = 1.0;
  double beta = 0.5;       ///< alpha / 2
  double c1_alpha = 0.25;  ///< ((2-alpha)/2) (alpha/2)^{alpha/(2-alpha)}

  /// Throws DomainError unless 0 < alpha < 2.
  static StableParams make(double alpha);
};

enum class EtaMethod { Auto, BranchCut, Zolotarev, ClosedForm };

const char* to_string(EtaMethod m);

struct DensityEval {
  double t = 0.0;
  double u = 0.0;
  double value = 0.0;
  double log_value = 0.0;
  double abs_error = 0.0;  ///< quadrature estimate (0 for the closed form)
  EtaMethod method = EtaMethod::Auto;
};

/// Density at u of the one-sided beta-stable law with Laplace transform
/// exp(-t lambda^beta). Auto picks Zolotarev for t^{-1/beta} u <= 1 and the
/// branch-cut integral above. ClosedForm requires alpha == 1.
/// Throws ConvergenceError when the quadrature misses its tolerance.
DensityEval eta_density(const StableParams& p, double t, double u, EtaMethod method = EtaMethod::Auto);

/// P(S_t <= u).
double eta_cdf(const StableParams& p, double t, double u);

/// Zolotarev function A(phi) on (0, pi); A(0+) = c1_alpha.
double zolotarev_a(const StableParams& p, double phi);

/// (beta / Gamma(1-beta)) u^{-1-beta}.
double subordinator_levy_density(const StableParams& p, double u);

/// lim_{t->0} eta_t(u)/t by Richardson extrapolation over t in {1e-2, 1e-3, 1e-4}.
double levy_density_from_small_time(const StableParams& p, double u);

/// Laplace transform of eta_t at lambda by quadrature (for round-trip checks).
double eta_laplace_numeric(const StableParams& p, double t, double lambda);

struct EtaEnvelopeReport {
  double c = 1.0;
  double inner_min = 0.0, inner_max = 0.0;  ///< eta / inner envelope, t^{-2/alpha} u < c
  double outer_min = 0.0, outer_max = 0.0;  ///< eta / (t u^{-1-alpha/2}), t^{-2/alpha} u > c
  int inner_points = 0, outer_points = 0;
};

/// log of t^{1/(2-a)} u^{-(4-a)/(4-2a)} exp(-c1 t^{2/(2-a)} u^{-a/(2-a)}).
double log_eta_inner_envelope(const StableParams& p, double t, double u);

/// Sweeps t over [0.1, 100] and t^{-2/alpha} u over [1e-2, 1e4] (both sides of c).
EtaEnvelopeReport check_eta_envelopes(const StableParams& p, double c = 1.0);

/// Exact sample of S_t by Kanter's representation.
template <class Rng>
double sample_subordinator_increment(const StableParams& p, double t, Rng& rng) {
  if (!(t > 0.0)) throw DomainError("sample_subordinator_increment: t must be > 0");
  std::uniform_real_distribution<double> unif(0.0, std::numbers::pi);
  std::exponential_distribution<double> expo(1.0);
  double phi;
  do {
    phi = unif(rng);
  } while (phi <= 0.0);
  const double e = expo(rng);
  const double s1 = std::pow(zolotarev_a(p, phi) / e, (1.0 - p.beta) / p.beta);
  return std::pow(t, 1.0 / p.beta) * s1;
}

}  // namespace stree

#endif  // STREE_SUBORDINATOR_HPP
