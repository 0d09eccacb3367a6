#ifndef STREE_STABLE_KERNEL_HPP
#define STREE_STABLE_KERNEL_HPP

#include <limits>
#include <ostream>
#include <vector>

#include "stree/heat_kernel.hpp"
#include "stree/subordinator.hpp"
#include "stree/tree_geometry.hpp"

namespace stree {

inline constexpr int kDefaultKernelDepth = 400;

/// p_t(n) = sum_k exp(-t lambda_k^beta) psi_k(0) psi_k(n) from binary128 eigenpairs
/// of the generator truncated at N. `resolved` is the last distance above the
/// binary128 cancellation floor; tail_mass_bound is 1 - sum_{n<=resolved} m p.
RadialVector stable_kernel_spectral(const TreeParams& p, const StableParams& s, double t,
                                    int N = kDefaultKernelDepth);

struct QuadratureKernelOptions {
  int N = kDefaultKernelDepth;  ///< truncation of the diffusion propagator (< 0: none)
  int nmax = 15;                ///< last distance returned
  double c0 = 1.0;              ///< split point c0 t^{2/alpha}
  EtaMethod eta = EtaMethod::Auto;
  double rel_tol = 1e-10;
};

/// p_t(n) = int h_u(n) eta_t(u) du with h_u from the uniformization propagator.
/// `alt_values` holds the two partial integrals below / above the split, stacked;
/// tail_mass_bound carries the largest relative quadrature error estimate.
RadialVector stable_kernel_quadrature(const TreeParams& p, const StableParams& s, double t,
                                      const QuadratureKernelOptions& opt = {});

/// Jump intensities nu(n) = int h_u(n) rho(u) du for n = 1..n_max.
struct LevyTable {
  int n_max = 0;
  std::vector<double> nu;           ///< index n; nu[0] unused (0)
  double lambda_star = 0.0;         ///< (L^beta)(o, o) from the spectral route
  double lambda_star_quad = 0.0;    ///< int (1 - h_u(0)) rho(u) du
  double tail_rate = 0.0;           ///< lambda_star - sum_{n<=n_max} m(n) nu(n)

  double eps_tail() const { return tail_rate / lambda_star; }
};

/// Cached per (q, alpha, n_max).
const LevyTable& levy_measure_table(const TreeParams& p, const StableParams& s, int n_max);
double levy_measure(const TreeParams& p, const StableParams& s, int n);

/// -L^beta(o, x) for |x| = n from the spectral route (independent of the quadrature).
double levy_measure_spectral(const TreeParams& p, const StableParams& s, int n);

/// lim_{t->0} p_t(n)/t by Richardson extrapolation over t in {1e-2, 1e-3, 1e-4}.
double levy_from_small_time(const TreeParams& p, const StableParams& s, int n);

/// (L^beta)(o, o) = total jump rate.
double total_jump_rate(const TreeParams& p, const StableParams& s);

struct KernelEnvelopeReport {
  EnvelopeBand inner;  ///< p_t(n) / [phi0(n) t^{-3/2} exp(-t (1-gamma)^{alpha/2})], n < K sqrt(t)
  EnvelopeBand outer;  ///< p_t(n) / [phi0(n) t n^{-2-alpha/2} q^{-n/2}], n > M t^{2/alpha}
  int intermediate_points = 0;

  double u0_inner = 0.0;       ///< (alpha/2) / (1-gamma)^{1-alpha/2}
  double p_u0_inner = 0.0;     ///< (1-gamma)^{alpha/2}
  double u0_inner_numeric = 0.0;
  double p_u0_inner_numeric = 0.0;

  double u0_outer = 0.0;       ///< (q+1)/(q-1)
  double p_u0_outer = 0.0;     ///< -log(gamma sqrt(q))
  double u0_outer_numeric = 0.0;
  double p_u0_outer_numeric = 0.0;

  double target_rate = 0.0;    ///< (1-gamma)^{alpha/2}
  double raw_slope = 0.0;      ///< slope of log p_t(0) against t
  double fitted_rate = 0.0;    ///< rate with the t^{-3/2} prefactor removed
  double fitted_exponent = 0.0;///< power of t with the target rate removed
  double free_rate = 0.0;      ///< three-parameter fit: rate
  double free_exponent = 0.0;  ///< three-parameter fit: power
  double corrected_rate = 0.0; ///< power fixed at -3/2 plus a 1/t correction term

  double rate_rel_err() const { return std::abs(fitted_rate - target_rate) / target_rate; }
};

/// Grids: inner t in {5, 7.5, ..., 60}; outer n in [5, 50] with t in {0.01, 0.1, 0.5, 1, 2, 5};
/// decay fits over t in [20, 60].
KernelEnvelopeReport check_kernel_envelopes(const TreeParams& p, const StableParams& s, double K = 1.0, double M = 1.0);

/// p(u) = sqrt(1 + gamma^2 u^2) - u + log u - log(1 + sqrt(1 + gamma^2 u^2))
double outer_exponent(const TreeParams& p, double u);

/// P(a <= |Y_u| <= b) for the radial diffusion walk Y started at the root.
/// Uniformization up to u_switch, then convolution with the biased-walk
/// (Skellam) kernel, which ignores the root once the mass has left it.
class WalkBandProbability {
 public:
  static constexpr long kInfinity = std::numeric_limits<long>::max();

  WalkBandProbability(const TreeParams& p, long a, long b, double u_switch = 1000.0);
  double operator()(double u) const;

 private:
  double skellam_band(double delta) const;

  TreeParams p_;
  long a_, b_;
  double u_switch_;
  RadialPropagator prop_;
  Eigen::VectorXd base_;  // law at u_switch
};

struct AnnulusMass {
  double t = 0.0;
  double A1 = 0.0, A2 = 0.0;
  double beta_exponent = 0.0;
  long n_lo = 0, n_hi = 0;
  double mass = 0.0;
  double abs_error = 0.0;
};

/// sum over n in [floor(A1 t^b), ceil(A2 t^b)] of m(n) p_t(n), untruncated.
AnnulusMass mass_repartition(const TreeParams& p, const StableParams& s, double t, double A1, double A2,
                             double beta_exponent);

/// P(|X_t| > N) for the untruncated process.
double escape_probability(const TreeParams& p, const StableParams& s, double t, int N);

/// Columns q,alpha,t,n,p_spectral,p_quadrature,envelope_value,ratio,regime.
void write_stable_kernel_csv(std::ostream& os, const TreeParams& p, const StableParams& s,
                             const std::vector<double>& t_grid, int nmax, double K = 1.0, double M = 1.0);

}  // namespace stree

#endif  // STREE_STABLE_KERNEL_HPP
