#include "stree/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "stree/calibration.hpp"
#include "stree/common.hpp"
#include "stree/heat_kernel.hpp"
#include "stree/parallel.hpp"
#include "stree/potential_theory.hpp"
#include "stree/process_sim.hpp"
#include "stree/special_functions.hpp"
#include "stree/stable_kernel.hpp"
#include "stree/subordinator.hpp"

namespace stree {

namespace {

const std::vector<std::pair<Experiment, const char*>> kExperimentNames = {
    {Experiment::KernelTable, "kernel-table"}, {Experiment::Envelope, "envelope"},
    {Experiment::Repartition, "repartition"},  {Experiment::ExitTime, "exit-time"},
    {Experiment::Poisson, "poisson"},          {Experiment::Selftest, "selftest"}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(field, "expected a real number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(field, "expected an integer, got '" + text + "'");
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + num(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd X(x.size(), 2);
  Eigen::VectorXd Y(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = x[i];
    Y[i] = y[i];
  }
  return X.colPivHouseholderQr().solve(Y)[1];
}

class Checks {
 public:
  explicit Checks(std::ostream& log) : log_(log) {}

  void add(std::string name, bool pass, std::string detail, bool numerical = false) {
    log_ << (pass ? "PASS  " : "FAIL  ") << name << "  " << detail << "\n";
    res_.checks.push_back({std::move(name), pass, numerical, std::move(detail)});
  }

  RunResult finish() {
    bool num_fail = false, prop_fail = false;
    for (const auto& c : res_.checks) {
      if (c.pass) continue;
      (c.numerical ? num_fail : prop_fail) = true;
    }
    res_.exit_code = num_fail ? 3 : prop_fail ? 1 : 0;
    return std::move(res_);
  }

  RunResult& result() { return res_; }

 private:
  std::ostream& log_;
  RunResult res_;
};

struct Output {
  std::filesystem::path main;

  static Output make(const ExperimentConfig& cfg) {
    Output o;
    if (!cfg.output.empty()) {
      o.main = cfg.output;
    } else {
      const char* dir = std::getenv(kOutputDirEnv);
      o.main = std::filesystem::path(dir && *dir ? dir : ".") /
               (std::string(to_string(cfg.experiment)) + (cfg.format == Format::Json ? ".json" : ".csv"));
    }
    return o;
  }

  // Sibling file: <stem>_<suffix>.csv
  std::filesystem::path sibling(const std::string& suffix) const {
    return main.parent_path() / (main.stem().string() + "_" + suffix + ".csv");
  }
};

std::ofstream open_out(const std::filesystem::path& path, RunResult& res) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open output file " + path.string());
  res.files.push_back(path.string());
  return os;
}

void emit(const Table& tab, const ExperimentConfig& cfg, const Output& out, RunResult& res) {
  auto os = open_out(out.main, res);
  tab.write(os, cfg.format, cfg.echo());
}

// ---------------------------------------------------------------------------

void run_kernel_table(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  Table tab;
  tab.columns = {"q", "alpha", "t", "n", "p_spectral", "p_quadrature", "rel_diff", "envelope_value", "ratio", "regime"};
  QuadratureKernelOptions qo;
  qo.N = cfg.N;
  qo.nmax = cfg.nmax;
  double worst = 0.0;
  for (double t : cfg.t) {
    const auto sp = stable_kernel_spectral(p, s, t, cfg.N);
    const auto qu = stable_kernel_quadrature(p, s, t, qo);
    for (int n = 0; n <= cfg.nmax; ++n) {
      std::string regime = "intermediate";
      double env = std::nan("");
      if (n < cfg.K * std::sqrt(t)) {
        regime = "inner";
        env = phi0(p, n) * std::pow(t, -1.5) * std::exp(-t * std::pow(p.b2, s.beta));
      } else if (n > cfg.M * std::pow(t, 1.0 / s.beta)) {
        regime = "outer";
        env = phi0(p, n) * t * std::pow(n, -2.0 - s.beta) * std::pow(p.q, -0.5 * n);
      }
      const double rel = std::fabs(sp.values[n] - qu.values[n]) / std::fabs(sp.values[n]);
      worst = std::max(worst, rel);
      tab.rows.push_back({std::to_string(cfg.q), num(cfg.alpha), num(t), std::to_string(n), num(sp.values[n]),
                          num(qu.values[n]), num(rel), num(env), num(sp.values[n] / env), regime});
    }
  }
  emit(tab, cfg, out, ck.result());
  ck.add("spectral and subordination kernels agree", worst <= 1e-6, "max rel diff " + num(worst), true);
}

void run_envelope(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  auto rep = check_kernel_envelopes(p, s, cfg.K, cfg.M);
  rep.inner.frozen_lo = calibration::kKernelInnerLo;
  rep.inner.frozen_hi = calibration::kKernelInnerHi;
  rep.outer.frozen_lo = calibration::kKernelOuterLo;
  rep.outer.frozen_hi = calibration::kKernelOuterHi;
  Table tab;
  tab.columns = {"quantity", "value", "reference", "lower", "upper"};
  auto row = [&](const std::string& q, double v, double ref, double lo, double hi) {
    tab.rows.push_back({q, num(v), num(ref), num(lo), num(hi)});
  };
  const double nan = std::nan("");
  row("inner_ratio_min", rep.inner.lower, nan, rep.inner.frozen_lo, rep.inner.frozen_hi);
  row("inner_ratio_max", rep.inner.upper, nan, rep.inner.frozen_lo, rep.inner.frozen_hi);
  row("outer_ratio_min", rep.outer.lower, nan, rep.outer.frozen_lo, rep.outer.frozen_hi);
  row("outer_ratio_max", rep.outer.upper, nan, rep.outer.frozen_lo, rep.outer.frozen_hi);
  row("outer_spread", rep.outer.upper / rep.outer.lower, nan, 1.0, 20.0);
  row("u0_inner", rep.u0_inner_numeric, rep.u0_inner, nan, nan);
  row("p_u0_inner", rep.p_u0_inner_numeric, rep.p_u0_inner, nan, nan);
  row("u0_outer", rep.u0_outer_numeric, rep.u0_outer, nan, nan);
  row("p_u0_outer", rep.p_u0_outer_numeric, rep.p_u0_outer, nan, nan);
  row("decay_rate_fixed_power", rep.fitted_rate, rep.target_rate, 0.98 * rep.target_rate, 1.02 * rep.target_rate);
  row("power_fixed_rate", rep.fitted_exponent, -1.5, -1.65, -1.35);
  row("raw_log_slope", -rep.raw_slope, -rep.target_rate, nan, nan);
  row("free_fit_rate", rep.free_rate, rep.target_rate, nan, nan);
  row("free_fit_power", rep.free_exponent, -1.5, nan, nan);
  row("decay_rate_with_1_over_t", rep.corrected_rate, rep.target_rate, nan, nan);
  emit(tab, cfg, out, ck.result());

  ck.add("inner kernel ratio band", rep.inner.pass(), "[" + num(rep.inner.lower) + ", " + num(rep.inner.upper) + "]");
  ck.add("outer kernel ratio band", rep.outer.pass(), "[" + num(rep.outer.lower) + ", " + num(rep.outer.upper) + "]");
  ck.add("outer kernel ratio spread <= 20", rep.outer.upper / rep.outer.lower <= 20.0,
         num(rep.outer.upper / rep.outer.lower));
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-6 * std::max(1.0, std::fabs(b)); };
  ck.add("inner saddle point", close(rep.u0_inner_numeric, rep.u0_inner) && close(rep.p_u0_inner_numeric, rep.p_u0_inner),
         "u0 " + num(rep.u0_inner_numeric) + " vs " + num(rep.u0_inner), true);
  ck.add("outer saddle point", close(rep.u0_outer_numeric, rep.u0_outer) && close(rep.p_u0_outer_numeric, rep.p_u0_outer),
         "u0 " + num(rep.u0_outer_numeric) + " vs " + num(rep.u0_outer), true);
  ck.add("decay rate at the root within 2%", rep.rate_rel_err() <= 0.02,
         num(rep.fitted_rate) + " vs " + num(rep.target_rate));
  ck.add("t^-3/2 power within 0.15", std::fabs(rep.fitted_exponent + 1.5) <= 0.15, num(rep.fitted_exponent));
}

void run_repartition(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  const double be = cfg.effective_beta_exponent();
  Table tab;
  tab.columns = {"t", "A1", "A2", "beta_exponent", "n_lo", "n_hi", "mass", "abs_error"};
  std::vector<AnnulusMass> ms(cfg.t.size());
  parallel_for(cfg.t.size(), [&](std::size_t i) { ms[i] = mass_repartition(p, s, cfg.t[i], cfg.A1, cfg.A2, be); });
  bool in_unit = true;
  for (const auto& m : ms) {
    tab.rows.push_back({num(m.t), num(m.A1), num(m.A2), num(m.beta_exponent), std::to_string(m.n_lo),
                        std::to_string(m.n_hi), num(m.mass), num(m.abs_error)});
    in_unit = in_unit && m.mass > 0.0 && m.mass < 1.0;
  }
  emit(tab, cfg, out, ck.result());
  ck.add("annulus mass in (0, 1)", in_unit, std::to_string(ms.size()) + " times");
  const bool natural = std::fabs(be - 2.0 / cfg.alpha) < 1e-12;
  if (natural) {
    std::vector<double> lx, ly, lz;
    for (const auto& m : ms)
      if (m.t >= 20.0) {
        lx.push_back(std::log(m.t));
        ly.push_back(std::log(m.mass / m.t));
        lz.push_back(std::log(m.mass * m.t));
      }
    if (lx.size() >= 2) {
      const double sl = slope(lx, ly);
      ck.add("log-log slope of mass/t is -1 +- 0.1", std::fabs(sl + 1.0) <= 0.1,
             num(sl) + " (slope of mass*t: " + num(slope(lx, lz)) + ")");
    }
  } else if (!ms.empty()) {
    bool mono = true;
    for (std::size_t i = 1; i < ms.size(); ++i) mono = mono && ms[i].mass <= ms[i - 1].mass;
    ck.add("off-scale annulus mass decreasing", mono, "");
    ck.add("off-scale annulus mass <= 0.05 at the largest t", ms.back().mass <= 0.05, num(ms.back().mass));
  }
}

void run_exit_time(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  const int rmax = *std::max_element(cfg.r.begin(), cfg.r.end());
  const auto law = build_jump_law(p, s, std::max(kDefaultJumpDepth, 2 * rmax + 1));
  Table tab;
  tab.columns = {"r", "mc_mean", "mc_se", "exact_mean", "z", "exact_over_r_power", "far_fraction"};
  double lo = 1e300, hi = 0.0;
  for (int r : cfg.r) {
    const auto st = estimate_exit(law, root_vertex(), r, cfg.n_samples, cfg.seed, {}, true);
    const double exact = mean_exit_time_radial(law, r)[0];
    const double z = (st.mean - exact) / st.se;
    const double ratio = exact / std::pow(std::max(r, 1), s.beta);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    tab.rows.push_back({std::to_string(r), num(st.mean), num(st.se), num(exact), num(z), num(ratio),
                        num(static_cast<double>(st.far_count) / st.n_samples)});
    ck.add("r=" + std::to_string(r) + " Monte Carlo mean within 3 SE of the Green row sum", std::fabs(z) <= 3.0,
           "z = " + num(z));
    auto os = open_out(out.sibling("paths_r" + std::to_string(r)), ck.result());
    write_header_block(os, cfg.echo());
    write_exit_csv(os, st.records);
  }
  emit(tab, cfg, out, ck.result());
  if (cfg.r.size() > 1) ck.add("E tau / r^(alpha/2) spread <= 4", hi / lo <= 4.0, num(hi / lo));
}

void run_poisson(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  const auto law = build_jump_law(p, s);
  Table tab;
  tab.columns = {"r", "upper_ratio_min", "upper_ratio_max", "lower_ratio_min", "lower_ratio_max", "C", "c",
                 "exit_mass"};
  for (int r : cfg.r) {
    const auto rep = check_poisson_bounds(law, r, calibration::kPoissonUpper, calibration::kPoissonLower);
    const auto gen = killed_generator(law, enumerate_ball(p, r));
    const auto gm = green_function(gen);
    const auto ed = exit_distribution(gm, gen, law, 0);
    const auto mc = estimate_exit(law, root_vertex(), r, cfg.n_samples, cfg.seed, {}, true);
    tab.rows.push_back({std::to_string(r), num(rep.upper_min), num(rep.upper_max), num(rep.lower_min),
                        num(rep.lower_max), num(rep.C), num(rep.c), num(ed.total_mass)});
    const std::string tag = "r=" + std::to_string(r) + " ";
    ck.add(tag + "Poisson kernel upper bound", rep.upper_max <= rep.C, "max ratio " + num(rep.upper_max));
    ck.add(tag + "Poisson kernel lower bound", rep.lower_min >= rep.c, "min ratio " + num(rep.lower_min));
    ck.add(tag + "exit law total mass 1", std::fabs(ed.total_mass - 1.0) <= 1e-6, num(ed.total_mass), true);
    auto os = open_out(out.sibling("r" + std::to_string(r)), ck.result());
    write_header_block(os, cfg.echo());
    write_poisson_csv(os, law, gen, ed, &mc);
  }
  emit(tab, cfg, out, ck.result());
}

void run_selftest(const ExperimentConfig& cfg, Checks& ck, const Output& out) {
  const auto p = TreeParams::make(cfg.q);
  const auto s = StableParams::make(cfg.alpha);
  const auto s1 = StableParams::make(1.0);
  {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 5.0})
      for (int j = 0; j <= 50; ++j) {
        const double u = std::pow(10.0, -2.0 + 0.1 * j);
        const double c = eta_density(s1, t, u, EtaMethod::ClosedForm).value;
        worst = std::max(worst, std::fabs(eta_density(s1, t, u).value / c - 1.0));
      }
    ck.add("alpha=1 subordinator density matches closed form", worst <= 1e-6, "max rel err " + num(worst), true);
    double lap = 0.0;
    for (double t : {0.5, 1.0, 5.0})
      for (double lam : {0.1, 1.0, 10.0})
        lap = std::max(lap, std::fabs(eta_laplace_numeric(s1, t, lam) / std::exp(-t * std::sqrt(lam)) - 1.0));
    ck.add("alpha=1 Laplace transform round trip", lap <= 1e-6, "max rel err " + num(lap), true);
  }
  {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 5.0}) {
      const auto sp = stable_kernel_spectral(p, s, t);
      const auto qu = stable_kernel_quadrature(p, s, t);
      for (int n = 0; n <= 15; ++n) worst = std::max(worst, std::fabs(sp.values[n] - qu.values[n]) / sp.values[n]);
    }
    ck.add("spectral and subordination kernels agree", worst <= 1e-6, "max rel diff " + num(worst), true);
  }
  {
    double worst = 0.0;
    for (double t : {0.5, 1.0, 2.0, 5.0}) worst = std::max(worst, heat_kernel_radial(p, t).max_rel_disagreement);
    ck.add("heat kernel routes agree", worst <= 1e-8, "max rel diff " + num(worst), true);
  }
  {
    const auto law = build_jump_law(p, s);
    const auto gen = killed_generator(law, enumerate_ball(p, 4));
    const auto gm = green_function(gen);
    const auto ed = exit_distribution(gm, gen, law, 0);
    ck.add("Green function solve residual", gm.solve_residual <= 1e-8, num(gm.solve_residual), true);
    ck.add("exit law total mass 1", std::fabs(ed.total_mass - 1.0) <= 1e-6, num(ed.total_mass), true);
  }
  Table tab;
  tab.columns = {"check", "pass", "detail"};
  for (const auto& c : ck.result().checks) tab.rows.push_back({c.name, c.pass ? "1" : "0", c.detail});
  emit(tab, cfg, out, ck.result());
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& [k, v] : kExperimentNames)
    if (k == e) return v;
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  for (const auto& [k, v] : kExperimentNames)
    if (s == v) return k;
  throw ConfigError("experiment", "unknown experiment '" + s + "'");
}

ConfigEcho ExperimentConfig::echo() const {
  return {{"experiment", to_string(experiment)},
          {"q", std::to_string(q)},
          {"alpha", num(alpha)},
          {"t", join(t)},
          {"nmax", std::to_string(nmax)},
          {"r", join(r)},
          {"A1", num(A1)},
          {"A2", num(A2)},
          {"beta_exponent", num(effective_beta_exponent())},
          {"K", num(K)},
          {"M", num(M)},
          {"n_samples", std::to_string(n_samples)},
          {"seed", std::to_string(seed)},
          {"N", std::to_string(N)},
          {"format", format == Format::Json ? "json" : "csv"}};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {"experiment", "q",  "alpha",     "t",    "nmax",    "r",
                                                "A1",         "A2", "beta_exponent", "K", "M", "n_samples",
                                                "seed",       "N",  "output",    "format", "threads"};
  return keys;
}

std::vector<double> parse_grid(const std::string& field, const std::string& text) {
  std::vector<double> out;
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(field, "empty grid");
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError(field, "expected start:stop:step");
    const double a = parse_real(field, parts[0]), b = parse_real(field, parts[1]), h = parse_real(field, parts[2]);
    if (!(h > 0.0) || b < a) throw ConfigError(field, "need step > 0 and stop >= start");
    const double count = std::floor((b - a) / h + 1e-9) + 1.0;
    if (count > 10000) throw ConfigError(field, "grid has more than 10000 points");
    for (long i = 0; i < static_cast<long>(count); ++i) out.push_back(a + i * h);
    return out;
  }
  std::stringstream ss(t);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_real(field, part));
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto int_in = [&](long long lo, long long hi) {
    const long long v = parse_integer(key, value);
    if (v < lo || v > hi)
      throw ConfigError(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  };
  if (key == "experiment") cfg.experiment = parse_experiment(trim(value));
  else if (key == "q") cfg.q = static_cast<int>(int_in(2, 16));
  else if (key == "alpha") cfg.alpha = parse_real(key, value);
  else if (key == "t") cfg.t = parse_grid(key, value);
  else if (key == "nmax") cfg.nmax = static_cast<int>(int_in(0, 1000));
  else if (key == "r") {
    cfg.r.clear();
    for (double v : parse_grid(key, value)) {
      if (v != std::floor(v)) throw ConfigError(key, "radii must be integers");
      cfg.r.push_back(static_cast<int>(v));
    }
  } else if (key == "A1") cfg.A1 = parse_real(key, value);
  else if (key == "A2") cfg.A2 = parse_real(key, value);
  else if (key == "beta_exponent") cfg.beta_exponent = parse_real(key, value);
  else if (key == "K") cfg.K = parse_real(key, value);
  else if (key == "M") cfg.M = parse_real(key, value);
  else if (key == "n_samples") cfg.n_samples = static_cast<long>(int_in(2, 1000000000));
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(int_in(0, std::numeric_limits<long long>::max()));
  else if (key == "N") cfg.N = static_cast<int>(int_in(50, 1000));
  else if (key == "output") cfg.output = trim(value);
  else if (key == "format") {
    const std::string f = trim(value);
    if (f == "csv") cfg.format = Format::Csv;
    else if (f == "json") cfg.format = Format::Json;
    else throw ConfigError(key, "expected csv or json");
  } else if (key == "threads") cfg.threads = static_cast<unsigned>(int_in(0, 64));
  else throw ConfigError(key, "unknown key");
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config", "cannot read '" + path + "'");
  std::map<std::string, std::string> kv;
  int lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config", "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
      throw ConfigError(key, "unknown key (line " + std::to_string(lineno) + ")");
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second)
      throw ConfigError(key, "given twice (line " + std::to_string(lineno) + ")");
  }
  return kv;
}

void validate(const ExperimentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 2.0)) throw ConfigError("alpha", "must lie in (0, 2)");
  if (cfg.t.empty()) throw ConfigError("t", "empty grid");
  for (double t : cfg.t)
    if (!(t > 0.0 && t <= 1000.0)) throw ConfigError("t", "values must lie in (0, 1000]");
  if (cfg.nmax > cfg.N) throw ConfigError("nmax", "must not exceed N");
  if (!(cfg.A1 > 0.0) || !(cfg.A2 > cfg.A1)) throw ConfigError("A2", "need 0 < A1 < A2");
  if (cfg.beta_exponent < 0.0) throw ConfigError("beta_exponent", "must be >= 0 (0 selects 2/alpha)");
  if (!(cfg.K > 0.0)) throw ConfigError("K", "must be > 0");
  if (!(cfg.M > 0.0)) throw ConfigError("M", "must be > 0");
  if (cfg.r.empty()) throw ConfigError("r", "empty grid");
  int rlo = 0, rhi = 20;
  if (cfg.experiment == Experiment::Poisson) {
    rlo = 2;
    rhi = 5;
  }
  for (int r : cfg.r)
    if (r < rlo || r > rhi)
      throw ConfigError("r", "values must lie in [" + std::to_string(rlo) + ", " + std::to_string(rhi) + "]");
}

void Table::write(std::ostream& os, Format format, const ConfigEcho& echo) const {
  if (format == Format::Csv) {
    write_header_block(os, echo);
    write_csv_row(os, columns);
    for (const auto& r : rows) {
      std::vector<std::string> cells;
      for (const auto& c : r) cells.push_back(csv_cell(c));
      write_csv_row(os, cells);
    }
    return;
  }
  nlohmann::ordered_json j;
  j["stree_version"] = kVersion;
  auto& conf = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : echo) conf[k] = v;
  j["columns"] = columns;
  auto& arr = j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json o;
    for (std::size_t i = 0; i < columns.size() && i < r.size(); ++i) {
      double v = 0.0;
      const std::string& c = r[i];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (!c.empty() && ec == std::errc() && ptr == c.data() + c.size() && std::isfinite(v))
        o[columns[i]] = v;
      else
        o[columns[i]] = c;
    }
    arr.push_back(std::move(o));
  }
  os << j.dump(2) << "\n";
}

RunResult run(const ExperimentConfig& cfg, std::ostream& log) {
  validate(cfg);
  thread_cap().store(cfg.threads);
  Checks ck(log);
  const Output out = Output::make(cfg);
  try {
    switch (cfg.experiment) {
      case Experiment::KernelTable: run_kernel_table(cfg, ck, out); break;
      case Experiment::Envelope: run_envelope(cfg, ck, out); break;
      case Experiment::Repartition: run_repartition(cfg, ck, out); break;
      case Experiment::ExitTime: run_exit_time(cfg, ck, out); break;
      case Experiment::Poisson: run_poisson(cfg, ck, out); break;
      case Experiment::Selftest: run_selftest(cfg, ck, out); break;
    }
  } catch (const ConvergenceError& e) {
    ck.add("numerical convergence", false, e.what(), true);
  } catch (const BudgetError& e) {
    ck.add("resource budget", false, e.what(), true);
  }
  return ck.finish();
}

}  // namespace stree
