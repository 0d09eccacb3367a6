#include "stree/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Eigenvalues>

#include "stree/report.hpp"
#include "stree/special_functions.hpp"

namespace stree {

RadialGenerator RadialGenerator::make(const TreeParams& p, int N) {
  if (N < 1) throw DomainError("RadialGenerator: N must be >= 1");
  RadialGenerator g;
  g.N = N;
  const double q = p.q;
  g.diag = Eigen::VectorXd::Ones(N + 1);
  g.off_upper.resize(N);
  g.off_lower.resize(N);
  g.log_weights.resize(N + 1);
  for (int n = 0; n < N; ++n) {
    g.off_upper[n] = (n == 0) ? -1.0 : -q / (q + 1.0);
    g.off_lower[n] = -1.0 / (q + 1.0);
  }
  for (int n = 0; n <= N; ++n) g.log_weights[n] = log_sphere_size(p, n);
  return g;
}

Eigen::VectorXd RadialGenerator::symmetric_off() const {
  Eigen::VectorXd s(N);
  for (int n = 0; n < N; ++n) s[n] = -std::sqrt(off_upper[n] * off_lower[n]);
  return s;
}

template <class Scalar>
double SpectralData<Scalar>::reconstruction_residual() const {
  const Eigen::Index n = vectors.rows();
  // Symmetric tridiagonal in the working precision.
  Vec off(n - 1);
  const Scalar qq = q;
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    off[i] = (i == 0) ? Scalar(-1) / ssqrt(qq + 1) : -ssqrt(qq) / (qq + 1);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar sv = vectors(i, k);
      if (i > 0) sv += off[i - 1] * vectors(i - 1, k);
      if (i + 1 < n) sv += off[i] * vectors(i + 1, k);
      const double r = static_cast<double>(sabs(sv - eigenvalues[k] * vectors(i, k)));
      worst = std::max(worst, r);
    }
  }
  return worst;  // ||S||_max = 1
}

template struct SpectralData<double>;
template struct SpectralData<Quad>;

SpectralData<double> spectral_data_double(const TreeParams& p, int N) {
  const auto g = RadialGenerator::make(p, N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  Eigen::VectorXd off = g.symmetric_off();
  es.computeFromTridiagonal(g.diag, off, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw ConvergenceError("spectral_data_double: eigensolver failed", 0.0);
  SpectralData<double> sd;
  sd.q = p.q;
  sd.N = N;
  sd.eigenvalues = es.eigenvalues();
  sd.vectors = es.eigenvectors();
  for (Eigen::Index k = 0; k < sd.vectors.cols(); ++k)
    if (sd.vectors(0, k) < 0) sd.vectors.col(k) *= -1.0;
  sd.log_weights = g.log_weights;
  return sd;
}

SpectralData<Quad> spectral_data_quad(const TreeParams& p, int N) {
  const auto seed = spectral_data_double(p, N);
  const Eigen::Index n = N + 1;
  Eigen::Matrix<Quad, Eigen::Dynamic, 1> b(n - 1);
  const Quad qq = p.q;
  for (Eigen::Index i = 0; i + 1 < n; ++i) b[i] = (i == 0) ? Quad(-1) / sqrtq(qq + 1) : -sqrtq(qq) / (qq + 1);

  SpectralData<Quad> sd;
  sd.q = p.q;
  sd.N = N;
  sd.eigenvalues.resize(n);
  sd.vectors.resize(n, n);
  sd.log_weights = seed.log_weights;

  // v_{i+1} = -((1 - lambda) v_i + b_{i-1} v_{i-1}) / b_i, v_0 = 1; the last
  // row residual vanishes exactly at an eigenvalue.
  auto residual = [&](Quad lam, Quad& dres, Eigen::Matrix<Quad, Eigen::Dynamic, 1>* vec) {
    Quad vm = 0, v = 1, dvm = 0, dv = 0;
    if (vec) (*vec)[0] = 1;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      const Quad prev = (i > 0) ? b[i - 1] : Quad(0);
      const Quad vn = -((1 - lam) * v + prev * vm) / b[i];
      const Quad dvn = -((1 - lam) * dv - v + prev * dvm) / b[i];
      vm = v;
      v = vn;
      dvm = dv;
      dv = dvn;
      if (vec) (*vec)[i + 1] = v;
    }
    const Quad last = (n > 1) ? b[n - 2] : Quad(0);
    dres = (1 - lam) * dv - v + last * dvm;
    return (1 - lam) * v + last * vm;
  };

  Eigen::Matrix<Quad, Eigen::Dynamic, 1> vec(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Quad lam = seed.eigenvalues[k];
    for (int it = 0; it < 8; ++it) {
      Quad d;
      const Quad r = residual(lam, d, nullptr);
      const Quad stepq = r / d;
      lam -= stepq;
      if (fabsq(stepq) < 1e-33Q) break;
    }
    Quad d;
    residual(lam, d, &vec);
    vec /= sqrtq(vec.squaredNorm());
    sd.eigenvalues[k] = lam;
    sd.vectors.col(k) = vec;
  }
  return sd;
}

std::shared_ptr<const SpectralData<Quad>> cached_spectral_quad(const TreeParams& p, int N) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const SpectralData<Quad>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{p.q, N}];
  if (!slot) slot = std::make_shared<const SpectralData<Quad>>(spectral_data_quad(p, N));
  return slot;
}

// ---------------------------------------------------------------------------

RadialPropagator::RadialPropagator(const TreeParams& p, int N, int stride) : p_(p), N_(N), stride_(stride) {
  if (stride < 1) throw DomainError("RadialPropagator: stride must be >= 1");
  ckpt_.push_back(Eigen::VectorXd::Ones(1));
}

void RadialPropagator::step(Eigen::VectorXd& v) const {
  const Eigen::Index len = v.size();
  const Eigen::Index out_len = (N_ < 0) ? len + 1 : std::min<Eigen::Index>(len + 1, N_ + 1);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_len);
  const double back = 1.0 / (p_.q + 1.0);
  const double fwd = p_.q / (p_.q + 1.0);
  if (out_len > 1) out[1] += v[0];
  for (Eigen::Index n = 1; n < len; ++n) {
    const double x = v[n];
    if (x == 0.0) continue;
    out[n - 1] += back * x;
    if (n + 1 < out_len) out[n + 1] += fwd * x;
  }
  for (Eigen::Index n = 0; n < out_len; ++n)
    if (out[n] < 1e-300) out[n] = 0.0;
  v.swap(out);
}

const Eigen::VectorXd& RadialPropagator::checkpoint(std::size_t j) const {
  while (ckpt_.size() <= j) {
    Eigen::VectorXd v = ckpt_.back();
    for (int s = 0; s < stride_; ++s) step(v);
    ckpt_.push_back(std::move(v));
  }
  return ckpt_[j];
}

Eigen::VectorXd RadialPropagator::mass(double u) const {
  if (!(u >= 0.0)) throw DomainError("RadialPropagator: u must be >= 0");
  if (u == 0.0) return Eigen::VectorXd::Ones(1);
  const double lu = std::log(u);
  auto lw = [&](long k) { return -u + k * lu - std::lgamma(k + 1.0); };
  constexpr double kFloor = -745.0;
  const long mode = static_cast<long>(std::floor(u));
  long k_lo = mode;
  while (k_lo > 0 && lw(k_lo) > kFloor) k_lo = std::max(0L, k_lo - 1 - static_cast<long>(0.05 * std::sqrt(u)));
  long k_hi = mode;
  while (lw(k_hi) > kFloor) k_hi += 1 + static_cast<long>(0.05 * std::sqrt(u));

  Eigen::VectorXd v;
  long k;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const std::size_t j = static_cast<std::size_t>(k_lo / stride_);
    v = checkpoint(j);
    k = static_cast<long>(j) * stride_;
  }
  for (; k < k_lo; ++k) step(v);
  const Eigen::Index full = (N_ < 0) ? k_hi + 1 : std::min<Eigen::Index>(k_hi + 1, N_ + 1);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(full);
  double logw = lw(k);
  for (; k <= k_hi; ++k) {
    if (logw > kFloor) acc.head(v.size()) += std::exp(logw) * v;
    step(v);
    logw += lu - std::log(k + 1.0);
  }
  return acc;
}

Eigen::VectorXd RadialPropagator::kernel(double u, int len) const {
  const Eigen::VectorXd w = mass(u);
  const Eigen::Index n = (len < 0) ? w.size() : len;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < std::min(n, w.size()); ++i)
    if (w[i] > 0.0) h[i] = std::exp(std::log(w[i]) - log_sphere_size(p_, static_cast<int>(i)));
  return h;
}

// ---------------------------------------------------------------------------

double log_phi0(const TreeParams& p, int n) {
  if (n < 0) throw DomainError("phi0: n must be >= 0");
  return std::log1p(n * p.R0) - 0.5 * n * std::log(static_cast<double>(p.q));
}

double phi0(const TreeParams& p, int n) { return std::exp(log_phi0(p, n)); }

double heat_kernel_1d(double t, int j) {
  if (!(t >= 0.0)) throw DomainError("heat_kernel_1d: t must be >= 0");
  return bessel_i_scaled(std::abs(j), t).scaled_value;
}

RadialVector heat_kernel_radial(const TreeParams& p, double t, const HeatKernelOptions& opt) {
  if (!(t >= 0.0)) throw DomainError("heat_kernel_radial: t must be >= 0");
  int N = opt.N > 0 ? opt.N : std::max(400, static_cast<int>(std::ceil(4.0 * t + 100.0)));
  RadialVector rv;
  rv.t = t;
  rv.method = "uniformization";
  Eigen::VectorXd w;
  for (int d = 0;; ++d) {
    RadialPropagator prop(p, N);
    w = prop.mass(t);
    rv.tail_mass_bound = std::max(0.0, 1.0 - w.sum());
    if (rv.tail_mass_bound <= opt.tail_tol) break;
    if (d >= opt.max_doublings)
      throw ConvergenceError("heat_kernel_radial: mass deficit above tolerance at N = " + std::to_string(N),
                             rv.tail_mass_bound);
    N *= 2;
  }
  rv.N = N;
  rv.values = Eigen::VectorXd::Zero(N + 1);
  for (Eigen::Index n = 0; n < w.size(); ++n)
    if (w[n] > 0.0) rv.values[n] = std::exp(std::log(w[n]) - log_sphere_size(p, static_cast<int>(n)));
  if (opt.spectral) {
    const auto sd = cached_spectral_quad(p, N);
    const Quad tq = t;
    rv.alt_values = sd->radial([tq](Quad lam) { return expq(-tq * lam); });
    for (Eigen::Index n = 0; n <= N; ++n) {
      const double a = rv.values[n];
      if (a > opt.compare_floor)
        rv.max_rel_disagreement = std::max(rv.max_rel_disagreement, std::fabs(rv.alt_values[n] - a) / a);
    }
  }
  return rv;
}

void EnvelopeBand::add(double ratio) {
  if (points == 0) {
    lower = upper = ratio;
  } else {
    lower = std::min(lower, ratio);
    upper = std::max(upper, ratio);
  }
  ++points;
}

double log_hk_envelope(const TreeParams& p, double t, int n) {
  return -t - std::log(t) + log_phi0(p, n) + bessel_i_scaled(n + 1.0, t * p.gamma).log_value;
}

EnvelopeBand check_hk_envelope(const TreeParams& p, const std::vector<double>& t_grid,
                               const std::vector<int>& n_grid) {
  EnvelopeBand band;
  band.regime = "hk";
  band.grid = "t in [" + num(t_grid.front()) + ", " + num(t_grid.back()) + "], n in [" +
              std::to_string(n_grid.front()) + ", " + std::to_string(n_grid.back()) + "]";
  HeatKernelOptions opt;
  opt.spectral = false;
  for (double t : t_grid) {
    if (!(t > 0.0)) throw DomainError("check_hk_envelope: t must be > 0");
    const auto rv = heat_kernel_radial(p, t, opt);
    for (int n : n_grid) {
      if (n < 0 || n > rv.N) throw DomainError("check_hk_envelope: n outside truncation");
      band.add(std::exp(std::log(rv.values[n]) - log_hk_envelope(p, t, n)));
    }
  }
  return band;
}

void write_heat_kernel_csv(std::ostream& os, const TreeParams& p, const std::vector<RadialVector>& rows) {
  write_csv_row(os, {"q", "t", "n", "h", "method", "tail_bound"});
  for (const auto& rv : rows) {
    for (Eigen::Index n = 0; n < rv.values.size(); ++n) {
      write_csv_row(os, {std::to_string(p.q), num(rv.t), std::to_string(n), num(rv.values[n]), rv.method,
                         num(rv.tail_mass_bound)});
      if (rv.alt_values.size() > n)
        write_csv_row(os, {std::to_string(p.q), num(rv.t), std::to_string(n), num(rv.alt_values[n]), "spectral",
                           num(rv.tail_mass_bound)});
    }
  }
}

}  // namespace stree
