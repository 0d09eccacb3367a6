#include "stree/stable_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include <Eigen/Dense>

#include "stree/parallel.hpp"
#include "stree/quadrature.hpp"
#include "stree/report.hpp"
#include "stree/special_functions.hpp"

namespace stree {

namespace {

double log_mass_weight(const TreeParams& p, Eigen::Index n) { return log_sphere_size(p, static_cast<int>(n)); }

double mass_sum(const TreeParams& p, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (Eigen::Index n = 0; n < v.size(); ++n) s += std::exp(log_mass_weight(p, n)) * v[n];
  return s;
}

}  // namespace

RadialVector stable_kernel_spectral(const TreeParams& p, const StableParams& s, double t, int N) {
  if (!(t >= 0.0)) throw DomainError("stable_kernel_spectral: t must be >= 0");
  RadialVector rv;
  rv.t = t;
  rv.N = N;
  rv.method = "spectral";
  if (t == 0.0) {
    rv.values = Eigen::VectorXd::Zero(N + 1);
    rv.values[0] = 1.0;
    return rv;
  }
  const auto sd = cached_spectral_quad(p, N);
  const Quad tq = t, bq = s.beta;
  rv.values = sd->radial([tq, bq](Quad lam) { return expq(-tq * powq(lam, bq)); });
  // Entries of f(S) below ~1e-26 are dominated by binary128 cancellation noise.
  rv.resolved = 0;
  while (rv.resolved < N &&
         std::fabs(rv.values[rv.resolved + 1]) * std::exp(0.5 * log_mass_weight(p, rv.resolved + 1)) > 1e-26)
    ++rv.resolved;
  rv.tail_mass_bound = 1.0 - mass_sum(p, rv.values.head(rv.resolved + 1));
  return rv;
}

RadialVector stable_kernel_quadrature(const TreeParams& p, const StableParams& s, double t,
                                      const QuadratureKernelOptions& opt) {
  if (!(t > 0.0)) throw DomainError("stable_kernel_quadrature: t must be > 0");
  if (opt.nmax < 0) throw DomainError("stable_kernel_quadrature: nmax must be >= 0");
  const int N = opt.N < 0 ? opt.nmax + 300 : opt.N;
  if (opt.nmax > N) throw DomainError("stable_kernel_quadrature: nmax exceeds truncation");
  const Eigen::Index dim = opt.nmax + 1;
  RadialPropagator prop(p, N);
  auto f = [&](double u) -> Eigen::VectorXd {
    if (u <= 0.0) return Eigen::VectorXd::Zero(dim);
    const auto e = eta_density(s, t, u, opt.eta);
    if (e.log_value < -745.0) return Eigen::VectorXd::Zero(dim);
    return prop.kernel(u, static_cast<int>(dim)) * e.value;
  };
  QuadOptions qo;
  qo.rel_tol = opt.rel_tol;
  qo.max_intervals = 3000;
  const double split = opt.c0 * std::pow(t, 1.0 / s.beta);
  const auto inner = integrate_vector(f, dim, 0.0, split, qo,
                                      {0.05 * split, 0.1 * split, 0.2 * split, split / std::exp(1.0), 0.5 * split});
  if (!inner.converged) throw ConvergenceError("stable_kernel_quadrature: inner integral", inner.abs_error.maxCoeff());
  Eigen::VectorXd outer = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd outer_err = Eigen::VectorXd::Zero(dim);
  const double settle = 2.0 * (opt.nmax + 1) / p.R0 + 20.0 / p.b2;
  for (double a = split;; a *= 2.0) {
    const auto piece = integrate_vector(f, dim, a, 2.0 * a, qo);
    if (!piece.converged) throw ConvergenceError("stable_kernel_quadrature: outer integral", piece.abs_error.maxCoeff());
    outer += piece.value;
    outer_err += piece.abs_error;
    const Eigen::VectorXd total = inner.value + outer;
    bool small = a > settle;
    for (Eigen::Index i = 0; i < dim && small; ++i)
      if (piece.value[i] > 1e-14 * total[i]) small = false;
    if (small) break;
    if (a > 1e7) throw ConvergenceError("stable_kernel_quadrature: outer tail did not settle", piece.value.maxCoeff());
  }
  RadialVector rv;
  rv.t = t;
  rv.N = N;
  rv.method = "quadrature";
  rv.values = inner.value + outer;
  rv.alt_values.resize(2 * dim);
  rv.alt_values << inner.value, outer;
  rv.tail_mass_bound = ((inner.abs_error + outer_err).array() / rv.values.array().max(1e-300)).maxCoeff();
  return rv;
}

// ---------------------------------------------------------------------------

namespace {

LevyTable build_levy_table(const TreeParams& p, const StableParams& s, int n_max) {
  const int N = n_max + 300;
  RadialPropagator prop(p, N);
  const double cst = s.beta / std::tgamma(1.0 - s.beta);
  const Eigen::Index dim = n_max + 1;
  // Component 0 carries 1 - h_u(0) for the total rate; 1..n_max carry w_u(n).
  auto g = [&](double v) -> Eigen::VectorXd {
    const double u = std::exp(v);
    const Eigen::VectorXd w = prop.mass(u);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
    out[0] = 1.0 - w[0];
    for (Eigen::Index n = 1; n < dim && n < w.size(); ++n) out[n] = w[n];
    return out * (cst * std::pow(u, -s.beta));  // rho(u) du = rho(u) u dv
  };
  const double umin = 1e-6;
  const double umax = 2.0 * (n_max + 1) / p.R0 + 50.0 / p.b2;
  std::vector<double> bp;
  for (double v = std::ceil(std::log(umin)); v < std::log(umax); v += 1.0) bp.push_back(v);
  QuadOptions qo;
  qo.rel_tol = 1e-11;
  qo.max_intervals = 4000;
  const auto r = integrate_vector(g, dim, std::log(umin), std::log(umax), qo, bp);
  if (!r.converged) throw ConvergenceError("levy_measure_table: quadrature", r.abs_error.maxCoeff());

  LevyTable tab;
  tab.n_max = n_max;
  tab.nu.assign(n_max + 1, 0.0);
  for (int n = 1; n <= n_max; ++n) {
    // w_u(n) ~ (q/(q+1))^{n-1} u^n / n! below umin
    const double cn = std::pow(p.q / (p.q + 1.0), n - 1);
    const double small = cst * cn * std::pow(umin, n - s.beta) / (std::tgamma(n + 1.0) * (n - s.beta));
    tab.nu[n] = (r.value[n] + small) / std::exp(log_sphere_size(p, n));
  }
  // 1 - h_u(0) ~ u near 0; beyond umax it is 1 up to e^{-b2 u}.
  tab.lambda_star_quad = r.value[0] + cst * std::pow(umin, 1.0 - s.beta) / (1.0 - s.beta) +
                         std::pow(umax, -s.beta) / std::tgamma(1.0 - s.beta);
  tab.lambda_star = total_jump_rate(p, s);
  double covered = 0.0;
  for (int n = 1; n <= n_max; ++n) covered += std::exp(log_sphere_size(p, n)) * tab.nu[n];
  tab.tail_rate = tab.lambda_star - covered;
  return tab;
}

}  // namespace

const LevyTable& levy_measure_table(const TreeParams& p, const StableParams& s, int n_max) {
  if (n_max < 1) throw DomainError("levy_measure_table: n_max must be >= 1");
  static std::mutex mu;
  static std::map<std::tuple<int, double, int>, std::unique_ptr<LevyTable>> cache;
  const auto key = std::make_tuple(p.q, s.alpha, n_max);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto tab = std::make_unique<LevyTable>(build_levy_table(p, s, n_max));
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::move(tab);
  return *slot;
}

double levy_measure(const TreeParams& p, const StableParams& s, int n) {
  if (n < 1) throw DomainError("levy_measure: n must be >= 1");
  const int n_max = std::max(40, 20 * ((n + 19) / 20));
  return levy_measure_table(p, s, n_max).nu[n];
}

double levy_measure_spectral(const TreeParams& p, const StableParams& s, int n) {
  if (n < 1 || n > kDefaultKernelDepth) throw DomainError("levy_measure_spectral: n out of range");
  const auto sd = cached_spectral_quad(p, kDefaultKernelDepth);
  const Quad bq = s.beta;
  return -sd->radial([bq](Quad lam) { return powq(lam, bq); })[n];
}

double levy_from_small_time(const TreeParams& p, const StableParams& s, int n) {
  if (n < 1) throw DomainError("levy_from_small_time: n must be >= 1");
  auto f = [&](double t) { return stable_kernel_spectral(p, s, t).values[n] / t; };
  const double f1 = f(1e-2), f2 = f(1e-3), f3 = f(1e-4);
  const double r1 = (10.0 * f2 - f1) / 9.0;
  const double r2 = (10.0 * f3 - f2) / 9.0;
  return (100.0 * r2 - r1) / 99.0;
}

double total_jump_rate(const TreeParams& p, const StableParams& s) {
  const auto sd = cached_spectral_quad(p, kDefaultKernelDepth);
  const Quad bq = s.beta;
  return sd->root_diagonal([bq](Quad lam) { return powq(lam, bq); });
}

// ---------------------------------------------------------------------------

double outer_exponent(const TreeParams& p, double u) {
  const double r = std::sqrt(1.0 + p.gamma * p.gamma * u * u);
  return r - u + std::log(u) - std::log(1.0 + r);
}

namespace {

// Least squares y ~ X c.
Eigen::VectorXd lsq(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  return X.colPivHouseholderQr().solve(y);
}

}  // namespace

KernelEnvelopeReport check_kernel_envelopes(const TreeParams& p, const StableParams& s, double K, double M) {
  if (!(K > 0.0) || !(M > 0.0)) throw DomainError("check_kernel_envelopes: K and M must be > 0");
  KernelEnvelopeReport rep;
  rep.inner.regime = "inner";
  rep.outer.regime = "outer";
  const double b2 = p.b2;
  rep.target_rate = std::pow(b2, s.beta);
  rep.u0_inner = s.beta / std::pow(b2, 1.0 - s.beta);
  rep.p_u0_inner = rep.target_rate;
  rep.u0_outer = (p.q + 1.0) / (p.q - 1.0);
  rep.p_u0_outer = -std::log(p.gamma * std::sqrt(static_cast<double>(p.q)));

  // Laplace-method exponents: inner minimizes b2 v + c1 v^{-beta/(1-beta)}.
  auto g_inner = [&](double v) { return b2 * v + s.c1_alpha * std::pow(v, -s.beta / (1.0 - s.beta)); };
  rep.u0_inner_numeric = golden_section_max([&](double v) { return -g_inner(v); }, 1e-4, 1e3, 1e-12);
  rep.p_u0_inner_numeric = g_inner(rep.u0_inner_numeric);
  rep.u0_outer_numeric = golden_section_max([&](double u) { return outer_exponent(p, u); }, 1e-3, 1e3, 1e-12);
  rep.p_u0_outer_numeric = outer_exponent(p, rep.u0_outer_numeric);

  std::vector<double> t_inner;
  for (double t = 5.0; t <= 60.0 + 1e-9; t += 2.5) t_inner.push_back(t);
  const std::vector<double> t_outer{0.01, 0.1, 0.5, 1.0, 2.0, 5.0};
  std::vector<double> all = t_inner;
  all.insert(all.end(), t_outer.begin(), t_outer.end());
  std::vector<RadialVector> kern(all.size());
  parallel_for(all.size(), [&](std::size_t i) { kern[i] = stable_kernel_spectral(p, s, all[i]); });

  rep.inner.grid = "t in [5, 60] step 2.5, n < K sqrt(t)";
  rep.outer.grid = "t in {0.01, 0.1, 0.5, 1, 2, 5}, n in [5, 50], n > M t^{2/alpha}";
  std::vector<double> ft, fy;
  for (std::size_t i = 0; i < t_inner.size(); ++i) {
    const double t = t_inner[i];
    const auto& v = kern[i].values;
    for (int n = 0; n < K * std::sqrt(t); ++n)
      rep.inner.add(v[n] / (phi0(p, n) * std::pow(t, -1.5) * std::exp(-t * rep.target_rate)));
    for (int n = 0; n <= 50; ++n)
      if (n >= K * std::sqrt(t) && n <= M * std::pow(t, 1.0 / s.beta)) ++rep.intermediate_points;
    if (t >= 20.0 - 1e-9) {
      ft.push_back(t);
      fy.push_back(std::log(v[0]));
    }
  }
  for (std::size_t i = 0; i < t_outer.size(); ++i) {
    const double t = t_outer[i];
    const auto& v = kern[t_inner.size() + i].values;
    for (int n = 5; n <= 50; ++n) {
      if (!(n > M * std::pow(t, 1.0 / s.beta))) continue;
      const double env = std::exp(log_phi0(p, n) + std::log(t) - (2.0 + s.beta) * std::log(n) -
                                  0.5 * n * std::log(static_cast<double>(p.q)));
      rep.outer.add(v[n] / env);
    }
  }

  const Eigen::Index m = static_cast<Eigen::Index>(ft.size());
  Eigen::VectorXd T(m), LT(m), Y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    T[i] = ft[i];
    LT[i] = std::log(ft[i]);
    Y[i] = fy[i];
  }
  Eigen::MatrixXd X(m, 2);
  X.col(0).setOnes();
  X.col(1) = T;
  rep.raw_slope = -lsq(X, Y)[1];
  rep.fitted_rate = -lsq(X, Y + 1.5 * LT)[1];
  X.col(1) = LT;
  rep.fitted_exponent = lsq(X, Y + rep.target_rate * T)[1];
  Eigen::MatrixXd X3(m, 3);
  X3.col(0).setOnes();
  X3.col(1) = LT;
  X3.col(2) = T;
  const Eigen::VectorXd c3 = lsq(X3, Y);
  rep.free_exponent = c3[1];
  rep.free_rate = -c3[2];
  X3.col(1) = -T;
  X3.col(2) = T.cwiseInverse();
  rep.corrected_rate = lsq(X3, Y + 1.5 * LT)[1];
  return rep;
}

// ---------------------------------------------------------------------------

WalkBandProbability::WalkBandProbability(const TreeParams& p, long a, long b, double u_switch)
    : p_(p), a_(std::max(0L, a)), b_(b), u_switch_(u_switch), prop_(p, -1) {
  if (b < a) throw DomainError("WalkBandProbability: empty band");
  base_ = prop_.mass(u_switch_);
}

double WalkBandProbability::operator()(double u) const {
  if (u <= u_switch_) {
    const Eigen::VectorXd w = prop_.mass(u);
    const long hi = std::min<long>(b_, static_cast<long>(w.size()) - 1);
    double acc = 0.0;
    for (long n = a_; n <= hi; ++n) acc += w[n];
    return acc;
  }
  return skellam_band(u - u_switch_);
}

double WalkBandProbability::skellam_band(double delta) const {
  // Law of N1 - N2 with N1 ~ Poisson(delta q/(q+1)), N2 ~ Poisson(delta/(q+1)):
  // K(m) = q^{m/2} e^{-delta} I_|m|(gamma delta).
  const double lq = std::log(static_cast<double>(p_.q));
  const double mu = delta * p_.R0;
  const double sd = std::sqrt(delta);
  const long mlo = static_cast<long>(std::floor(mu - 40.0 * sd - 12.0));
  const long mhi = static_cast<long>(std::ceil(mu + 40.0 * sd + 12.0));
  std::vector<double> cum(static_cast<std::size_t>(mhi - mlo + 1));
  double run = 0.0;
  for (long m = mlo; m <= mhi; ++m) {
    const double lk = 0.5 * m * lq - delta + bessel_i_scaled(std::abs(static_cast<double>(m)), p_.gamma * delta).log_value;
    run += std::exp(lk);
    cum[static_cast<std::size_t>(m - mlo)] = run;
  }
  auto S = [&](long x) -> double {
    if (x < mlo) return 0.0;
    if (x >= mhi) return run;
    return cum[static_cast<std::size_t>(x - mlo)];
  };
  double acc = 0.0;
  for (Eigen::Index j = 0; j < base_.size(); ++j) {
    const double w = base_[j];
    if (w == 0.0) continue;
    const double upper = (b_ == kInfinity) ? run : S(b_ - static_cast<long>(j));
    acc += w * (upper - S(a_ - 1 - static_cast<long>(j)));
  }
  return acc;
}

namespace {

// int eta_t(u) P(a <= |Y_u| <= b) du, b finite.
QuadResult band_integral(const TreeParams& p, const StableParams& s, double t, long a, long b) {
  WalkBandProbability G(p, a, b);
  const double scale = std::pow(t, 1.0 / s.beta);
  double u_lo = scale;
  while (u_lo > 1e-12 * scale && eta_cdf(s, t, u_lo) > 1e-17) u_lo *= 0.1;
  const double c = 40.0, r0 = p.R0;
  const double root = (c + std::sqrt(c * c + 4.0 * r0 * (b + c))) / (2.0 * r0);
  const double u_hi = std::max(root * root, 10.0 * u_lo);
  auto f = [&](double v) {
    const double u = std::exp(v);
    const double g = G(u);
    if (g <= 0.0) return 0.0;
    const auto e = eta_density(s, t, u);
    return std::exp(e.log_value + v) * g;
  };
  std::vector<double> bp;
  for (double v = std::ceil(std::log(u_lo)); v < std::log(u_hi); v += 1.0) bp.push_back(v);
  for (double x : {std::max(a, 1L) / r0, 0.5 * std::max(a, 1L) / r0, static_cast<double>(b) / r0, 2.0 * b / r0, scale})
    if (x > u_lo && x < u_hi) bp.push_back(std::log(x));
  QuadOptions qo;
  qo.rel_tol = 1e-9;
  qo.abs_tol = 1e-13;
  qo.max_intervals = 3000;
  return integrate(f, std::log(u_lo), std::log(u_hi), qo, bp);
}

}  // namespace

AnnulusMass mass_repartition(const TreeParams& p, const StableParams& s, double t, double A1, double A2,
                             double beta_exponent) {
  if (!(A1 > 0.0 && A1 < A2)) throw DomainError("mass_repartition: requires 0 < A1 < A2");
  if (!(t > 0.0)) throw DomainError("mass_repartition: t must be > 0");
  AnnulusMass am;
  am.t = t;
  am.A1 = A1;
  am.A2 = A2;
  am.beta_exponent = beta_exponent;
  const double sc = std::pow(t, beta_exponent);
  am.n_lo = static_cast<long>(std::floor(A1 * sc));
  am.n_hi = static_cast<long>(std::ceil(A2 * sc));
  const auto r = band_integral(p, s, t, am.n_lo, am.n_hi);
  am.mass = r.value;
  am.abs_error = r.abs_error;
  return am;
}

double escape_probability(const TreeParams& p, const StableParams& s, double t, int N) {
  if (N < 0) throw DomainError("escape_probability: N must be >= 0");
  return 1.0 - band_integral(p, s, t, 0, N).value;
}

void write_stable_kernel_csv(std::ostream& os, const TreeParams& p, const StableParams& s,
                             const std::vector<double>& t_grid, int nmax, double K, double M) {
  write_csv_row(os, {"q", "alpha", "t", "n", "p_spectral", "p_quadrature", "envelope_value", "ratio", "regime"});
  QuadratureKernelOptions qo;
  qo.nmax = nmax;
  for (double t : t_grid) {
    const auto sp = stable_kernel_spectral(p, s, t);
    const auto qu = stable_kernel_quadrature(p, s, t, qo);
    for (int n = 0; n <= nmax; ++n) {
      std::string regime = "intermediate";
      double env = std::nan("");
      if (n < K * std::sqrt(t)) {
        regime = "inner";
        env = phi0(p, n) * std::pow(t, -1.5) * std::exp(-t * std::pow(p.b2, s.beta));
      } else if (n > M * std::pow(t, 1.0 / s.beta)) {
        regime = "outer";
        env = phi0(p, n) * t * std::pow(n, -2.0 - s.beta) * std::pow(p.q, -0.5 * n);
      }
      write_csv_row(os, {std::to_string(p.q), num(s.alpha), num(t), std::to_string(n), num(sp.values[n]),
                         num(qu.values[n]), num(env), num(sp.values[n] / env), regime});
    }
  }
}

}  // namespace stree
