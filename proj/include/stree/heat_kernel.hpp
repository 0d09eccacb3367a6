#ifndef STREE_HEAT_KERNEL_HPP
#define STREE_HEAT_KERNEL_HPP

#include <memory>
#include <mutex>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stree/common.hpp"
#include "stree/tree_geometry.hpp"

namespace stree {

/// Radial generator L truncated at depth N (absorbing beyond N).
struct RadialGenerator {
  int N = 0;
  Eigen::VectorXd diag;        ///< size N+1, all ones
  Eigen::VectorXd off_upper;   ///< L(n, n+1), size N
  Eigen::VectorXd off_lower;   ///< L(n+1, n), size N
  Eigen::VectorXd log_weights; ///< log m(n)

  static RadialGenerator make(const TreeParams& p, int N);
  /// Off-diagonal of D^{1/2} L D^{-1/2}, size N.
  Eigen::VectorXd symmetric_off() const;
};

/// Eigenpairs of the symmetrized radial generator. Columns of `vectors` are
/// orthonormal in the Euclidean inner product; psi_k(n) = vectors(n,k) / sqrt(m(n))
/// is orthonormal in the m-weighted one.
template <class Scalar>
struct SpectralData {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  int q = 2;
  int N = 0;
  Vec eigenvalues;  // ascending
  Mat vectors;
  Eigen::VectorXd log_weights;

  /// Radial kernel n -> (f(S))_{0n} / sqrt(m(n)) for a spectral multiplier f.
  template <class F>
  Eigen::VectorXd radial(F f) const {
    const Eigen::Index n = vectors.rows();
    Vec coef(eigenvalues.size());
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) coef[k] = f(eigenvalues[k]) * vectors(0, k);
    Vec s = vectors * coef;
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = static_cast<double>(s[i]) * std::exp(-0.5 * log_weights[i]);
    return out;
  }

  /// sum_k f(lambda_k) psi_k(0)^2, i.e. f(L)(o, o).
  template <class F>
  double root_diagonal(F f) const {
    Scalar acc = 0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) acc += f(eigenvalues[k]) * vectors(0, k) * vectors(0, k);
    return static_cast<double>(acc);
  }

  /// ||S V - V Lambda||_max / ||S||_max with S the symmetrized generator.
  double reconstruction_residual() const;
};

/// Double-precision eigenpairs from the tridiagonal symmetric eigensolver.
SpectralData<double> spectral_data_double(const TreeParams& p, int N);
/// Binary128 eigenpairs: double eigenvalues refined by Newton on the
/// three-term recurrence residual, eigenvectors from the forward recurrence.
SpectralData<Quad> spectral_data_quad(const TreeParams& p, int N);

/// Process-wide cache keyed by (q, N).
std::shared_ptr<const SpectralData<Quad>> cached_spectral_quad(const TreeParams& p, int N);

/// Probability mass w_u(n) = m(n) h_u(n) of the radial walk by uniformization:
/// a Poisson(u) mixture of the discrete radial chain, summed without cancellation.
/// N < 0 means no truncation; otherwise mass crossing N is killed.
class RadialPropagator {
 public:
  RadialPropagator(const TreeParams& p, int N, int stride = 32);

  Eigen::VectorXd mass(double u) const;
  /// h_u(n) = w_u(n) / m(n), truncated to `len` entries (all when len < 0).
  Eigen::VectorXd kernel(double u, int len = -1) const;
  int truncation() const { return N_; }
  const TreeParams& params() const { return p_; }

 private:
  void step(Eigen::VectorXd& v) const;
  const Eigen::VectorXd& checkpoint(std::size_t j) const;

  TreeParams p_;
  int N_;
  int stride_;
  mutable std::vector<Eigen::VectorXd> ckpt_;  // chain law after j*stride steps
  mutable std::mutex mu_;
};

/// A function of the distance n = 0..N.
struct RadialVector {
  double t = 0.0;
  int N = 0;
  Eigen::VectorXd values;
  Eigen::VectorXd alt_values;       ///< second route, empty if not computed
  double tail_mass_bound = 0.0;     ///< mass missing from sum_n m(n) values(n)
  int resolved = -1;                ///< last n above the route's cancellation floor (-1: all)
  double max_rel_disagreement = 0.0;
  std::string method;
};

/// (1 + n(q-1)/(q+1)) q^{-n/2}
double phi0(const TreeParams& p, int n);
double log_phi0(const TreeParams& p, int n);

/// e^{-t} I_|j|(t)
double heat_kernel_1d(double t, int j);

struct HeatKernelOptions {
  int N = 0;                 ///< 0 picks max(400, 4t + 100)
  bool spectral = true;      ///< also run the eigen-expansion route
  double tail_tol = 1e-8;    ///< allowed mass deficit before N is doubled
  int max_doublings = 4;
  double compare_floor = 1e-30;
};

/// h_t(n): uniformization route in `values`, spectral (binary128) route in
/// `alt_values`, their largest relative gap where h > compare_floor.
RadialVector heat_kernel_radial(const TreeParams& p, double t, const HeatKernelOptions& opt = {});

/// Two-sided band of observed ratios against an envelope.
struct EnvelopeBand {
  std::string regime;
  double lower = 0.0;
  double upper = 0.0;
  int points = 0;
  std::string grid;
  double frozen_lo = 0.0;
  double frozen_hi = 0.0;

  bool pass() const { return points > 0 && lower >= frozen_lo && upper <= frozen_hi; }
  void add(double ratio);
};

/// log[(e^{-t}/t) phi0(n) I_{n+1}(t gamma)]
double log_hk_envelope(const TreeParams& p, double t, int n);

/// Ratio of h_t(n) to the envelope above over the given grids.
EnvelopeBand check_hk_envelope(const TreeParams& p, const std::vector<double>& t_grid,
                               const std::vector<int>& n_grid);

/// Columns q,t,n,h,method,tail_bound; one row per route and n.
void write_heat_kernel_csv(std::ostream& os, const TreeParams& p, const std::vector<RadialVector>& rows);

}  // namespace stree

#endif  // STREE_HEAT_KERNEL_HPP
