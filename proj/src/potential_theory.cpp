#include "stree/potential_theory.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "stree/parallel.hpp"
#include "stree/report.hpp"

namespace stree {

namespace {

double nu_at(const JumpLaw& law, int n) {
  if (n < 1 || n > law.N_jump) throw DomainError("jump length outside the tabulated range");
  return law.nu[n];
}

// Number of exterior vertices at distance n from a vertex at depth k of B(o, r).
double exterior_count(const TreeParams& p, int k, int n, int r) {
  double c = 0.0;
  for (const auto& sc : shell_counts(p, k, n))
    if (sc.depth > r) c += sc.count;
  return c;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Golub-Welsch.
void gauss_legendre(int m, Eigen::VectorXd& x, Eigen::VectorXd& w) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int k = 1; k < m; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x = es.eigenvalues();
  w = 2.0 * es.eigenvectors().row(0).transpose().array().square();
}

}  // namespace

KilledGenerator killed_generator(const JumpLaw& law, const Ball& ball) {
  const int r = ball.radius;
  if (ball.size() > kMaxGreenStates)
    throw BudgetError("killed_generator: ball has " + std::to_string(ball.size()) + " states", ball.size());
  if (2 * r > law.N_jump) throw DomainError("killed_generator: N_jump must be >= 2r");
  const Eigen::Index n = static_cast<Eigen::Index>(ball.size());
  KilledGenerator gen;
  gen.ball = ball;
  gen.matrix.resize(n, n);
  parallel_for(ball.size(), [&](std::size_t i) {
    for (Eigen::Index j = 0; j < n; ++j)
      gen.matrix(i, j) = (static_cast<Eigen::Index>(i) == j)
                             ? law.total_rate
                             : -nu_at(law, distance(ball.vertices[i], ball.vertices[j]));
  });
  // Killing rates from exterior counts, independent of the matrix.
  std::vector<double> by_depth(r + 1, 0.0);
  for (int k = 0; k <= r; ++k) {
    double acc = law.far_rate();
    for (int m = 1; m <= law.N_jump; ++m) acc += law.nu[m] * exterior_count(law.tree, k, m, r);
    by_depth[k] = acc;
  }
  gen.killing_rate.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) gen.killing_rate[i] = by_depth[ball.depth[i]];
  const Eigen::VectorXd rows = gen.matrix.rowwise().sum();
  gen.identity_error = ((rows - gen.killing_rate).array().abs() / gen.killing_rate.array()).maxCoeff();
  return gen;
}

GreenMatrix green_function(const KilledGenerator& gen) {
  const Eigen::Index n = gen.matrix.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(gen.matrix);
  if (llt.info() != Eigen::Success)
    throw ConvergenceError("green_function: killed generator is not positive definite", 0.0);
  GreenMatrix gm;
  gm.values = llt.solve(Eigen::MatrixXd::Identity(n, n));
  gm.solve_residual = (gen.matrix * gm.values - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  gm.symmetry_error = (gm.values - gm.values.transpose()).cwiseAbs().maxCoeff() / gm.values.cwiseAbs().maxCoeff();
  gm.min_entry = gm.values.minCoeff();
  gm.condition_estimate =
      gen.matrix.cwiseAbs().colwise().sum().maxCoeff() * gm.values.cwiseAbs().colwise().sum().maxCoeff();
  return gm;
}

Eigen::VectorXd mean_exit_time_radial(const JumpLaw& law, int r) {
  if (r < 0) throw DomainError("mean_exit_time_radial: r must be >= 0");
  if (2 * r > law.N_jump) throw DomainError("mean_exit_time_radial: N_jump must be >= 2r");
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(r + 1, r + 1);
  for (int i = 0; i <= r; ++i) {
    B(i, i) = law.total_rate;
    for (int m = 1; m <= 2 * r; ++m)
      for (const auto& sc : shell_counts(law.tree, i, m))
        if (sc.depth <= r) B(i, sc.depth) -= law.nu[m] * sc.count;
  }
  return B.partialPivLu().solve(Eigen::VectorXd::Ones(r + 1));
}

ExitDistribution exit_distribution(const GreenMatrix& gm, const KilledGenerator& gen, const JumpLaw& law, int x) {
  const Ball& ball = gen.ball;
  const int r = ball.radius;
  if (x < 0 || static_cast<std::size_t>(x) >= ball.size()) throw DomainError("exit_distribution: x outside the ball");
  const TreeParams& p = law.tree;
  ExitDistribution ed;
  ed.x = x;
  ed.r = r;
  ed.level_min = r + 1;
  ed.level_max = law.N_jump + r;
  ed.exact_level_max = law.N_jump - r;
  for (std::size_t i = 0; i < ball.size(); ++i)
    if (ball.depth[i] == r) ed.anchors.push_back(static_cast<int>(i));
  const Eigen::Index na = static_cast<Eigen::Index>(ed.anchors.size());
  const Eigen::Index nl = ed.level_max - ed.level_min + 1;
  ed.prob_each = Eigen::MatrixXd::Zero(na, nl);
  ed.class_mass = Eigen::MatrixXd::Zero(na, nl);
  const Eigen::RowVectorXd g = gm.values.row(x);
  for (Eigen::Index ai = 0; ai < na; ++ai) {
    const Vertex& a = ball.vertices[ed.anchors[ai]];
    std::vector<int> dya(ball.size());
    for (std::size_t y = 0; y < ball.size(); ++y) dya[y] = distance(ball.vertices[y], a);
    for (Eigen::Index li = 0; li < nl; ++li) {
      const int l = ed.level_min + static_cast<int>(li);
      double acc = 0.0;
      for (std::size_t y = 0; y < ball.size(); ++y) {
        const int d = dya[y] + l - r;
        if (d <= law.N_jump) acc += g[y] * law.nu[d];
      }
      // vertices at level l below a
      const double count = (r == 0) ? sphere_size_real(p, l) : std::pow(static_cast<double>(p.q), l - r);
      ed.prob_each(ai, li) = acc;
      ed.class_mass(ai, li) = acc * count;
    }
  }
  ed.level_mass.resize(nl);
  for (Eigen::Index li = 0; li < nl; ++li) ed.level_mass[li] = ed.class_mass.col(li).sum();
  ed.far_mass = g.sum() * law.far_rate();
  ed.total_mass = ed.class_mass.sum() + ed.far_mass;
  return ed;
}

double poisson_upper_envelope(const TreeParams& p, const StableParams& s, int r, int d) {
  return std::pow(r, s.beta) * ball_volume_real(p, 2 * r) / (std::pow(d, 1.0 + s.beta) * ball_volume_real(p, d));
}

double poisson_lower_envelope(const TreeParams& p, const StableParams& s, int r, int d) {
  return std::pow(r, s.beta) / (ball_volume_real(p, 2 * r) * std::pow(d, 1.0 + s.beta) * ball_volume_real(p, d));
}

PoissonBoundsReport check_poisson_bounds(const JumpLaw& law, int r, double C, double c) {
  if (r < 2) throw DomainError("check_poisson_bounds: r must be >= 2");
  PoissonBoundsReport rep;
  rep.r = r;
  rep.C = C;
  rep.c = c;
  rep.max_exterior_distance = 3 * r + 12;
  if (rep.max_exterior_distance > law.N_jump - r)
    throw DomainError("check_poisson_bounds: N_jump too small for levels up to 3r + 12");
  const auto gen = killed_generator(law, enumerate_ball(law.tree, r));
  const auto gm = green_function(gen);
  const Ball& ball = gen.ball;
  rep.upper_min = rep.lower_min = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < ball.size(); ++x) {
    const auto ed = exit_distribution(gm, gen, law, static_cast<int>(x));
    const bool inner = 2 * ball.depth[x] <= r;
    for (std::size_t ai = 0; ai < ed.anchors.size(); ++ai) {
      const int dxa = distance(ball.vertices[x], ball.vertices[ed.anchors[ai]]);
      for (int l = ed.level_min; l <= rep.max_exterior_distance; ++l) {
        const int d = dxa + l - r;
        const double P = ed.prob_each(ai, l - ed.level_min);
        if (l > 3 * r) {
          const double ratio = P / poisson_upper_envelope(law.tree, law.stable, r, d);
          rep.upper_max = std::max(rep.upper_max, ratio);
          rep.upper_min = std::min(rep.upper_min, ratio);
          ++rep.upper_points;
        }
        if (inner) {
          const double ratio = P / poisson_lower_envelope(law.tree, law.stable, r, d);
          rep.lower_min = std::min(rep.lower_min, ratio);
          rep.lower_max = std::max(rep.lower_max, ratio);
          ++rep.lower_points;
        }
      }
    }
  }
  return rep;
}

std::vector<double> survival_curve(const KilledGenerator& gen, int x, const std::vector<double>& t_grid) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gen.matrix);
  const Eigen::MatrixXd& Q = es.eigenvectors();
  const Eigen::VectorXd w = Q.row(x).transpose().cwiseProduct(Q.colwise().sum().transpose());
  std::vector<double> out;
  for (double t : t_grid) out.push_back((w.array() * (-t * es.eigenvalues().array()).exp()).sum());
  return out;
}

TimeIntegralCheck green_time_integral(const KilledGenerator& gen, const GreenMatrix& gm, double tol) {
  const Eigen::MatrixXd& A = gen.matrix;
  const Eigen::Index n = A.rows();
  TimeIntegralCheck chk;
  chk.lambda1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A, Eigen::EigenvaluesOnly).eigenvalues()[0];
  chk.T = -std::log(tol) / chk.lambda1;
  const double h = 1.0 / A.cwiseAbs().rowwise().sum().maxCoeff();
  chk.steps = static_cast<int>(std::ceil(chk.T / h));
  Eigen::VectorXd gx, gw;
  gauss_legendre(8, gx, gw);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < gx.size(); ++i) J += (0.5 * h * gw[i]) * (-A * (0.5 * h * (1.0 + gx[i]))).exp();
  const Eigen::MatrixXd E = (-A * h).exp();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < chk.steps; ++k) {
    I.noalias() += P * J;
    P = P * E;
  }
  chk.max_rel_error = ((I - gm.values).array().abs() / gm.values.array().abs()).maxCoeff();
  return chk;
}

void write_poisson_csv(std::ostream& os, const JumpLaw& law, const KilledGenerator& gen, const ExitDistribution& ed,
                       const ExitStatistics* mc) {
  const Ball& ball = gen.ball;
  const int r = ed.r;
  const Vertex& xv = ball.vertices[ed.x];
  const int dmax = ed.exact_level_max + r;
  std::vector<double> mass(dmax + 1, 0.0), count(dmax + 1, 0.0), hits(dmax + 1, 0.0);
  for (std::size_t ai = 0; ai < ed.anchors.size(); ++ai) {
    const int dxa = distance(xv, ball.vertices[ed.anchors[ai]]);
    for (int l = ed.level_min; l <= ed.exact_level_max; ++l) {
      const int d = dxa + l - r;
      mass[d] += ed.class_mass(ai, l - ed.level_min);
      count[d] += (r == 0) ? sphere_size_real(law.tree, l) : std::pow(static_cast<double>(law.tree.q), l - r);
    }
  }
  if (mc)
    for (const auto& rec : mc->records)
      if (rec.exit_vertex && rec.exit_distance <= ed.exact_level_max) {
        const int d = distance(xv, *rec.exit_vertex);
        if (d <= dmax) hits[d] += 1.0;
      }
  write_csv_row(os, {"x_index", "z_distance", "P_exact", "P_mc", "upper_envelope", "lower_envelope"});
  for (int d = 1; d <= dmax; ++d) {
    if (count[d] == 0.0) continue;
    const double pmc = mc ? hits[d] / (static_cast<double>(mc->n_samples) * count[d]) : std::nan("");
    write_csv_row(os, {std::to_string(ed.x), std::to_string(d), num(mass[d] / count[d]), num(pmc),
                       num(poisson_upper_envelope(law.tree, law.stable, r, d)),
                       num(poisson_lower_envelope(law.tree, law.stable, r, d))});
  }
}

}  // namespace stree
