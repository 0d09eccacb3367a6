#ifndef STREE_POTENTIAL_THEORY_HPP
#define STREE_POTENTIAL_THEORY_HPP

#include <ostream>
#include <vector>

#include <Eigen/Core>

#include "stree/process_sim.hpp"
#include "stree/tree_geometry.hpp"

namespace stree {

inline constexpr std::size_t kMaxGreenStates = 4000;

/// A(x,y) = lambda* on the diagonal and -nu(d(x,y)) off it, for x, y in the ball.
struct KilledGenerator {
  Ball ball;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd killing_rate;  ///< sum over exterior z of nu(d(x,z)), counted shell by shell
  double identity_error = 0.0;   ///< max relative gap between row sums and killing_rate
};

/// Ball about the root. Needs N_jump >= 2r so every far jump leaves the ball.
KilledGenerator killed_generator(const JumpLaw& law, const Ball& ball);

struct GreenMatrix {
  Eigen::MatrixXd values;
  double solve_residual = 0.0;   ///< ||A G - I||_max
  double symmetry_error = 0.0;   ///< ||G - G^T||_max / ||G||_max
  double min_entry = 0.0;
  double condition_estimate = 0.0;  ///< ||A||_1 ||G||_1

  /// E_x tau_D for every x in the ball.
  Eigen::VectorXd row_sums() const { return values.rowwise().sum(); }
};

/// Dense Cholesky inverse. Throws ConvergenceError when A is not positive definite.
GreenMatrix green_function(const KilledGenerator& gen);

/// E tau of B(o, r) from every depth 0..r, by lumping the ball into spheres.
Eigen::VectorXd mean_exit_time_radial(const JumpLaw& law, int r);

/// Ikeda-Watanabe exit law P_x[X_tau = z] = sum_y G(x,y) nu(d(y,z)). An exterior z
/// is determined up to symmetry by its ancestor a on the boundary sphere and its
/// level l = d(o, z); then d(y, z) = d(y, a) + l - r. Jumps longer than N_jump
/// are collected in far_mass.
struct ExitDistribution {
  int x = 0;
  int r = 0;
  int level_min = 0;
  int level_max = 0;
  int exact_level_max = 0;        ///< levels up to here receive no far-class mass
  std::vector<int> anchors;       ///< ball indices of the boundary sphere
  Eigen::MatrixXd prob_each;      ///< (anchor, level - level_min) -> P for one vertex
  Eigen::MatrixXd class_mass;     ///< same, times the number of such vertices
  std::vector<double> level_mass; ///< index level - level_min
  double far_mass = 0.0;
  double total_mass = 0.0;
};

ExitDistribution exit_distribution(const GreenMatrix& gm, const KilledGenerator& gen, const JumpLaw& law, int x);

struct PoissonBoundsReport {
  int r = 0;
  double C = 0.0, c = 0.0;        ///< frozen constants
  double upper_max = 0.0;         ///< max P / upper envelope over d(o,z) > 3r
  double upper_min = 0.0;
  double lower_min = 0.0;         ///< min P / lower envelope over x in B(o, r/2)
  double lower_max = 0.0;
  int upper_points = 0, lower_points = 0;
  int max_exterior_distance = 0;

  bool pass() const { return upper_points > 0 && lower_points > 0 && upper_max <= C && lower_min >= c; }
};

/// Upper envelope r^{a/2} V(2r) / (d^{1+a/2} V(d)); lower r^{a/2} / (V(2r) d^{1+a/2} V(d)), d = d(x,z).
double poisson_upper_envelope(const TreeParams& p, const StableParams& s, int r, int d);
double poisson_lower_envelope(const TreeParams& p, const StableParams& s, int r, int d);

/// Levels up to 3r + 12 for every x in the ball.
PoissonBoundsReport check_poisson_bounds(const JumpLaw& law, int r, double C, double c);

/// P_x[tau > t] from the eigen-decomposition of A.
std::vector<double> survival_curve(const KilledGenerator& gen, int x, const std::vector<double>& t_grid);

struct TimeIntegralCheck {
  double lambda1 = 0.0;   ///< bottom eigenvalue of A
  double T = 0.0;         ///< e^{-lambda1 T} = tol
  int steps = 0;
  double max_rel_error = 0.0;
};

/// int_0^T e^{-At} dt by matrix-exponential steps with Gauss-Legendre inside each step,
/// compared entrywise with G.
TimeIntegralCheck green_time_integral(const KilledGenerator& gen, const GreenMatrix& gm, double tol = 1e-6);

/// Columns x_index,z_distance,P_exact,P_mc,upper_envelope,lower_envelope. P is the mean
/// per-vertex probability over exterior vertices at distance z_distance from x.
void write_poisson_csv(std::ostream& os, const JumpLaw& law, const KilledGenerator& gen, const ExitDistribution& ed,
                       const ExitStatistics* mc);

}  // namespace stree

#endif  // STREE_POTENTIAL_THEORY_HPP
