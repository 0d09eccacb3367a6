#ifndef STREE_QUADRATURE_HPP
#define STREE_QUADRATURE_HPP

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace stree {

struct QuadOptions {
  double abs_tol = 0.0;
  double rel_tol = 1e-11;
  int max_intervals = 4000;
};

struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

struct VectorQuadResult {
  Eigen::VectorXd value;
  Eigen::VectorXd abs_error;
  int evaluations = 0;
  bool converged = false;
};

using ScalarIntegrand = std::function<double(double)>;
using VectorIntegrand = std::function<Eigen::VectorXd(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]. `breakpoints` seed
/// the initial partition (points outside (a, b) are ignored).
QuadResult integrate(const ScalarIntegrand& f, double a, double b,
                     const QuadOptions& opts = {},
                     const std::vector<double>& breakpoints = {});

/// Integral over [a, +inf) through the map x = a + (1 - s) / s.
QuadResult integrate_to_infinity(const ScalarIntegrand& f, double a,
                                 const QuadOptions& opts = {});

/// Vector-valued variant: every component must meet the tolerance. The
/// interval with the largest tolerance-scaled error is bisected first.
VectorQuadResult integrate_vector(const VectorIntegrand& f, Eigen::Index dim, double a, double b,
                                  const QuadOptions& opts = {},
                                  const std::vector<double>& breakpoints = {});

/// Brent-free golden-section search for the maximiser of a unimodal f on [a, b].
double golden_section_max(const ScalarIntegrand& f, double a, double b, double x_tol = 1e-12);

}  // namespace stree

#endif  // STREE_QUADRATURE_HPP
