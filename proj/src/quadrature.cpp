#include "stree/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

namespace stree {
namespace {

// Kronrod abscissae (descending) and weights; odd indices are the Gauss-7 nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const ScalarIntegrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double value = resk * h;
  double err = std::fabs((resk - resg) * h);
  // Keep the raw Kronrod-Gauss difference; QUADPACK's (200 e)^1.5 scaling
  // underestimates for the log-space integrands used here.
  if (!std::isfinite(value)) err = std::numeric_limits<double>::infinity();
  return {a, b, value, err};
}

struct VecSegment {
  double a, b;
  Eigen::VectorXd value, error;
};

VecSegment gk15_vec(const VectorIntegrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  Eigen::VectorXd fc = f(c);
  Eigen::VectorXd resk = fc * kWgk[7];
  Eigen::VectorXd resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    Eigen::VectorXd fs = f(c - dx) + f(c + dx);
    resk += kWgk[j] * fs;
    if (j % 2 == 1) resg += kWg[j / 2] * fs;
  }
  VecSegment s{a, b, resk * h, ((resk - resg) * h).cwiseAbs()};
  return s;
}

std::vector<double> partition(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> pts{a};
  for (double x : breakpoints)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

QuadResult integrate(const ScalarIntegrand& f, double a, double b, const QuadOptions& opts,
                     const std::vector<double>& breakpoints) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::priority_queue<Segment> heap;
  double total = 0.0, total_err = 0.0;
  const auto pts = partition(a, b, breakpoints);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    Segment s = gk15(f, pts[i], pts[i + 1]);
    out.evaluations += 15;
    total += s.value;
    total_err += s.error;
    heap.push(s);
  }
  int intervals = static_cast<int>(heap.size());
  while (true) {
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
    if (total_err <= tol) {
      out.converged = true;
      break;
    }
    if (intervals >= opts.max_intervals) break;
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted
    heap.pop();
    Segment left = gk15(f, worst.a, mid);
    Segment right = gk15(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of incremental updates.
  total = 0.0;
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  out.value = sign * total;
  out.abs_error = total_err;
  if (!out.converged)
    out.converged = total_err <= std::max(opts.abs_tol, opts.rel_tol * std::fabs(total));
  return out;
}

QuadResult integrate_to_infinity(const ScalarIntegrand& f, double a, const QuadOptions& opts) {
  auto g = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double x = a + (1.0 - s) / s;
    const double v = f(x) / (s * s);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, opts);
}

VectorQuadResult integrate_vector(const VectorIntegrand& f, Eigen::Index dim, double a, double b,
                                  const QuadOptions& opts,
                                  const std::vector<double>& breakpoints) {
  VectorQuadResult out;
  out.value = Eigen::VectorXd::Zero(dim);
  out.abs_error = Eigen::VectorXd::Zero(dim);
  if (a >= b) {
    out.converged = true;
    return out;
  }
  std::vector<VecSegment> segs;
  const auto pts = partition(a, b, breakpoints);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) segs.push_back(gk15_vec(f, pts[i], pts[i + 1]));
  out.evaluations = 15 * static_cast<int>(segs.size());

  auto totals = [&](Eigen::VectorXd& v, Eigen::VectorXd& e) {
    v.setZero(dim);
    e.setZero(dim);
    for (const auto& s : segs) {
      v += s.value;
      e += s.error;
    }
  };
  Eigen::VectorXd val, err;
  while (true) {
    totals(val, err);
    Eigen::VectorXd tol = (opts.rel_tol * val.cwiseAbs()).cwiseMax(opts.abs_tol);
    bool ok = true;
    for (Eigen::Index i = 0; i < dim; ++i)
      if (err[i] > tol[i]) ok = false;
    if (ok) {
      out.converged = true;
      break;
    }
    if (static_cast<int>(segs.size()) >= opts.max_intervals) break;
    // Segment with the largest tolerance-scaled error.
    Eigen::VectorXd scale = tol.cwiseMax(std::numeric_limits<double>::min()).cwiseInverse();
    std::size_t worst = 0;
    double worst_score = -1.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
      const double score = segs[k].error.cwiseProduct(scale).maxCoeff();
      if (score > worst_score) {
        worst_score = score;
        worst = k;
      }
    }
    const VecSegment w = segs[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) break;
    segs[worst] = gk15_vec(f, w.a, mid);
    segs.push_back(gk15_vec(f, mid, w.b));
    out.evaluations += 30;
  }
  out.value = val;
  out.abs_error = err;
  return out;
}

double golden_section_max(const ScalarIntegrand& f, double a, double b, double x_tol) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > x_tol * std::max(1.0, std::fabs(a) + std::fabs(b))) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace stree
