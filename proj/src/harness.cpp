#include "collarlab/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace collarlab {

using nlohmann::json;

std::vector<Real> RunConfig::sweep() const {
  std::vector<Real> out(points);
  const Real ratio = std::pow(u_min / u_max, 1 / Real(points - 1));
  for (int k = 0; k < points; ++k) out[k] = u_max * std::pow(ratio, static_cast<Real>(k));
  out.back() = u_min;
  return out;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(Errc::config, msg); };
  if (!(u_min > 0 && u_min < u_max && u_max <= 0.15L)) fail("sweep needs 0 < u_min < u_max <= 0.15");
  if (points < 4) fail("sweep needs at least 4 points");
  if (spacing != "geometric") fail("sweep spacing must be geometric");
  if (n_tau < 512) fail("grid.n_tau must be at least 512");
  if (n_modes < 0) fail("grid.n_modes must be non-negative");
  if (std::abs(cutoffs.c - c) > 0) fail("cutoffs.c must equal the collar cut");
  try {
    cutoffs.validate();
  } catch (const Error& e) {
    fail(e.what());
  }
  for (const auto& s : suites)
    if (std::find(suite_ids().begin(), suite_ids().end(), s) == suite_ids().end()) fail("unknown suite " + s);
  for (const auto& f : formats)
    if (std::find(format_ids().begin(), format_ids().end(), f) == format_ids().end()) fail("unknown format " + f);
  for (const auto& [id, tol] : tolerances)
    if (!(tol > 0)) fail("tolerance for " + id + " must be positive");
  for (const auto& col : collars) {
    if (col.u.has_value() == col.t.has_value()) fail("each collar needs exactly one of u or t");
    if (col.spec != "pure") fail("collar spec must be \"pure\"");
    if (std::abs(col.c - c) > 0) fail("collar cut must match the run cut");
    try {
      col.u ? collar_from_u(*col.u, col.c) : collar_from_t(*col.t, col.c);
    } catch (const Error& e) {
      fail(e.what());
    }
    const Real u = col.u ? *col.u : -pi / std::log(*col.t);
    if (u > 0.15L) fail("collar u must not exceed 0.15");
  }
  if (perturbation_c.empty()) fail("perturbation.C needs at least one value");
  for (Real x : perturbation_c)
    if (!(x > 0)) fail("perturbation constants must be positive");
  if (green_samples == 0) fail("green.samples must be positive");
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::config, where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw Error(Errc::config, "unknown key " + where + "." + k);
  }
}

}  // namespace

RunConfig parse_config(const json& j) {
  RunConfig cfg;
  try {
    only_keys(j, {"collars", "grid", "sweep", "suites", "tolerances", "output", "seed", "perturbation", "green", "cutoffs"},
              "config");
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      only_keys(g, {"n_tau", "n_modes", "c"}, "grid");
      cfg.n_tau = get_or(g, "n_tau", cfg.n_tau);
      cfg.n_modes = get_or(g, "n_modes", cfg.n_modes);
      cfg.c = get_or<double>(g, "c", static_cast<double>(cfg.c));
      cfg.cutoffs.c = cfg.c;
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      only_keys(s, {"u_min", "u_max", "points", "spacing"}, "sweep");
      cfg.u_min = get_or<double>(s, "u_min", static_cast<double>(cfg.u_min));
      cfg.u_max = get_or<double>(s, "u_max", static_cast<double>(cfg.u_max));
      cfg.points = get_or(s, "points", cfg.points);
      cfg.spacing = get_or<std::string>(s, "spacing", cfg.spacing);
    }
    if (j.contains("cutoffs")) {
      const json& c = j.at("cutoffs");
      only_keys(c, {"c", "c1", "c2"}, "cutoffs");
      cfg.cutoffs.c = get_or<double>(c, "c", static_cast<double>(cfg.cutoffs.c));
      cfg.cutoffs.c1 = get_or<double>(c, "c1", static_cast<double>(cfg.cutoffs.c1));
      cfg.cutoffs.c2 = get_or<double>(c, "c2", static_cast<double>(cfg.cutoffs.c2));
    }
    if (j.contains("collars")) {
      for (const json& c : j.at("collars")) {
        only_keys(c, {"u", "t", "c", "spec"}, "collars[]");
        CollarEntry e;
        if (c.contains("u")) e.u = c.at("u").get<double>();
        if (c.contains("t")) e.t = c.at("t").get<double>();
        e.c = get_or<double>(c, "c", static_cast<double>(cfg.c));
        e.spec = get_or<std::string>(c, "spec", e.spec);
        cfg.collars.push_back(e);
      }
    }
    cfg.suites = get_or(j, "suites", cfg.suites);
    if (j.contains("tolerances"))
      for (const auto& [k, v] : j.at("tolerances").items()) cfg.tolerances[k] = v.get<double>();
    if (j.contains("output")) {
      const json& o = j.at("output");
      only_keys(o, {"directory", "formats"}, "output");
      cfg.out_dir = get_or<std::string>(o, "directory", cfg.out_dir.string());
      cfg.formats = get_or(o, "formats", cfg.formats);
    }
    cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed);
    if (j.contains("perturbation")) {
      only_keys(j.at("perturbation"), {"C"}, "perturbation");
      cfg.perturbation_c.clear();
      for (double x : j.at("perturbation").at("C").get<std::vector<double>>()) cfg.perturbation_c.push_back(x);
    }
    if (j.contains("green")) {
      only_keys(j.at("green"), {"samples"}, "green");
      cfg.green_samples = get_or<std::size_t>(j.at("green"), "samples", cfg.green_samples);
    }
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("config schema: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::config, "cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = {
      "verify-calculus", "wp-asymptotics", "ricci-asymptotics", "green-props", "approximants",
      "holo-curvature",  "perturbed",      "lengths",           "equivalence", "g2-bounds"};
  return ids;
}

const std::vector<std::string>& format_ids() {
  static const std::vector<std::string> ids = {"csv", "json", "markdown", "svg-lines"};
  return ids;
}

std::vector<std::string> SuiteReport::failing() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.report_only && !c.pass) out.push_back(c.id);
  return out;
}

void to_json(json& j, const CheckRecord& r) {
  j = json{{"suite", r.suite},
           {"check_id", r.id},
           {"u", r.u},
           {"t_abs", r.t_abs},
           {"measured_re", r.measured_re},
           {"measured_im", r.measured_im},
           {"target_re", r.target_re},
           {"target_im", r.target_im},
           {"rel_err", r.rel_err},
           {"pass", r.pass},
           {"report_only", r.report_only},
           {"tolerance", r.tolerance},
           {"t_power", r.t_power}};
}

void from_json(const json& j, CheckRecord& r) {
  r.suite = j.at("suite").get<std::string>();
  r.id = j.at("check_id").get<std::string>();
  r.u = j.at("u").get<double>();
  r.t_abs = j.at("t_abs").get<double>();
  r.measured_re = j.at("measured_re").get<double>();
  r.measured_im = j.at("measured_im").get<double>();
  r.target_re = j.at("target_re").get<double>();
  r.target_im = j.at("target_im").get<double>();
  r.rel_err = j.at("rel_err").get<double>();
  r.pass = j.at("pass").get<bool>();
  r.report_only = j.at("report_only").get<bool>();
  r.tolerance = j.at("tolerance").get<double>();
  r.t_power = j.at("t_power").get<double>();
}

void to_json(json& j, const SuiteReport& r) { j = json{{"suite", r.suite}, {"pass", r.pass}, {"checks", r.checks}}; }

void from_json(const json& j, SuiteReport& r) {
  r.suite = j.at("suite").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  r.checks = j.at("checks").get<std::vector<CheckRecord>>();
}

std::size_t worker_count() {
  if (const char* env = std::getenv("COLLARLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Results land by index, so the output order never depends on scheduling.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        out[k] = fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(worker_count(), n);
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

struct Point {
  Real u = 0;
  Real c = 0.5L;
  bool sweep = true;
  Real t_abs() const { return std::exp(-pi / u); }
};

std::vector<Point> evaluation_points(const RunConfig& cfg) {
  std::vector<Point> out;
  for (Real u : cfg.sweep()) out.push_back({u, cfg.c, true});
  for (const auto& col : cfg.collars) out.push_back({col.u ? *col.u : -pi / std::log(*col.t), col.c, false});
  return out;
}

Model family(const RunConfig& cfg, const std::vector<Real>& us, std::size_t nondegenerate = 0) {
  FamilyOptions opt;
  opt.c = cfg.c;
  opt.intervals = cfg.n_tau;
  opt.bandwidth = cfg.n_modes;
  opt.nondegenerate = nondegenerate;
  return pure_family(us, opt);
}

std::string format_c(Real c) {
  std::ostringstream os;
  os << static_cast<double>(c);
  return os.str();
}

Real rel_error(Complex measured, Complex target) {
  const Real ref = std::abs(target);
  return ref > 0 ? std::abs(measured - target) / ref : std::abs(measured);
}

class Recorder {
 public:
  Recorder(const RunConfig& cfg, SuiteReport& rep) : cfg_(cfg), rep_(rep) {}

  Real tolerance(const std::string& id, Real fallback) const {
    const auto it = cfg_.tolerances.find(id);
    return it == cfg_.tolerances.end() ? fallback : it->second;
  }

  // Pass when the relative error is within the tolerance.
  void relative(const std::string& id, const Point& p, Complex measured, Complex target, Real tol, Real t_power = 0) {
    const Real e = rel_error(measured, target);
    const Real used = tolerance(id, tol);
    push(id, p, measured, target, e, e <= used, false, used, t_power);
  }

  // Pass when lo <= measured <= hi.
  void band(const std::string& id, const Point& p, Real measured, Real target, Real lo, Real hi) {
    push(id, p, measured, target, rel_error(measured, target), measured >= lo && measured <= hi, false, hi, 0);
  }

  // Pass when measured <= tol; the target is zero.
  void bound(const std::string& id, const Point& p, Real measured, Real tol) {
    const Real used = tolerance(id, tol);
    push(id, p, measured, 0, std::abs(measured), measured <= used, false, used, 0);
  }

  // Fitted exponent must reach target - band.
  void exponent(const std::string& id, const Point& p, const FitResult& fit, Real target, Real band_width = 0.3L) {
    const Real used = tolerance(id, band_width);
    push(id, p, fit.exponent, target, rel_error(fit.exponent, target), fit.exponent >= target - used && !fit.degenerate,
         false, used, 0);
  }

  void flag(const std::string& id, const Point& p, bool ok) { push(id, p, ok ? 1 : 0, 1, ok ? 0 : 1, ok, false, 0, 0); }

  void report(const std::string& id, const Point& p, Complex measured, Complex target, Real t_power = 0) {
    push(id, p, measured, target, rel_error(measured, target), true, true, 0, t_power);
  }

 private:
  void push(const std::string& id, const Point& p, Complex measured, Complex target, Real rel, bool pass, bool report_only,
            Real tol, Real t_power) {
    CheckRecord r;
    r.suite = rep_.suite;
    r.id = id;
    r.u = static_cast<double>(p.u);
    r.t_abs = static_cast<double>(p.t_abs());
    // |t|^{-t_power} = e^{pi t_power / u}.
    const Real norm = t_power == 0 ? 1 : std::exp(pi * t_power / p.u);
    r.measured_re = static_cast<double>(measured.real() * norm);
    r.measured_im = static_cast<double>(measured.imag() * norm);
    r.target_re = static_cast<double>(target.real() * norm);
    r.target_im = static_cast<double>(target.imag() * norm);
    r.rel_err = static_cast<double>(rel);
    r.pass = pass;
    r.report_only = report_only;
    r.tolerance = static_cast<double>(tol);
    r.t_power = static_cast<double>(t_power);
    rep_.checks.push_back(r);
  }

  const RunConfig& cfg_;
  SuiteReport& rep_;
};

Complex table_value(const std::string& id, const Point& p) { return target(id).value(p.u, p.t_abs()); }

Real t_power_of(const std::string& id) { return target(id).t_exponent; }

// int |g| dv for a single-mode field.
Real l1_norm(const CollarField& f) {
  const Collar& col = f.geometry();
  Real acc = 0;
  for (const auto& [n, g] : f.modes()) {
    if (f.modes().size() != 1) throw Error(Errc::unsupported, "L1 norm is implemented for single-mode fields");
    for (std::size_t j = 0; j < g.size(); ++j) acc += col.dv[j] * col.rpow(f.weight(), j) * std::abs(g[j]);
  }
  return acc;
}

void suite_calculus(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  struct Row {
    Real k0, k1, km1, oracle;
  };
  const auto rows = parallel_map<Row>(points.size(), [&](std::size_t s) {
    const CollarPtr c = make_collar(collar_from_u(points[s].u, points[s].c), cfg.n_tau);
    Row r{radial_sine_moment(*c, 0), radial_sine_moment(*c, 1), radial_sine_moment(*c, -1), 0};
    for (int k = -3; k <= 3; ++k) {
      const Real exact = radial_sine_moment_exact(c->params, k);
      r.oracle = std::max(r.oracle, std::abs(radial_sine_moment(*c, k) - exact) / std::abs(exact));
    }
    return r;
  });
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    rec.relative("calculus-k0", p, rows[s].k0, radial_sine_limit(p.c, 0), 2 * p.u);
    rec.relative("calculus-k1", p, rows[s].k1, radial_sine_limit(p.c, 1), 2 * p.u);
    rec.relative("calculus-k-1", p, rows[s].km1, radial_sine_limit(p.c, -1), 2 * p.u);
    rec.bound("calculus-oracle", p, rows[s].oracle, 1e-10L);
  }
}

void suite_wp(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  struct Row {
    Complex h, hc;
    Real duality;
  };
  const auto rows = parallel_map<Row>(points.size(), [&](std::size_t s) {
    RunConfig local = cfg;
    local.c = points[s].c;
    const Model m = family(local, {points[s].u});
    const MetricMatrix h = wp_metric(m.beltrami, m.collars);
    const MetricMatrix hc = wp_cometric(m.quad, m.collars);
    return Row{h(0, 0), hc(0, 0), duality_check(m.quad, m.beltrami, h, m.collars).max_relative};
  });
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    rec.relative("wp-metric-diag", p, rows[s].h, table_value("wp-metric-diag", p), 3 * p.u, t_power_of("wp-metric-diag"));
    rec.relative("wp-cometric-diag", p, rows[s].hc, table_value("wp-cometric-diag", p), 3 * p.u,
                 t_power_of("wp-cometric-diag"));
    rec.bound("wp-duality", p, rows[s].duality, 3 * p.u);
  }
}

std::vector<std::shared_ptr<CurvatureEngine>> engines(const RunConfig& cfg, const std::vector<Point>& points) {
  return parallel_map<std::shared_ptr<CurvatureEngine>>(points.size(), [&](std::size_t s) {
    RunConfig local = cfg;
    local.c = points[s].c;
    return std::make_shared<CurvatureEngine>(family(local, {points[s].u}));
  });
}

void suite_ricci(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  const auto eng = engines(cfg, points);
  std::vector<Real> errs;
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    const CurvatureEngine& e = *eng[s];
    const Complex tau = e.ricci_metric()(0, 0);
    rec.relative("ricci-diag", p, tau, table_value("ricci-diag", p), 0.15L, t_power_of("ricci-diag"));
    rec.relative("ricci-inverse-diag", p, e.ricci_upper()(0, 0), table_value("ricci-inverse-diag", p), 0.15L,
                 t_power_of("ricci-inverse-diag"));
    rec.flag("ricci-positive-definite", p, e.ricci_metric().is_positive_definite());
    if (p.sweep) errs.push_back(rel_error(tau, table_value("ricci-diag", p)));
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < errs.size(); ++k) decreasing = decreasing && errs[k] < errs[k - 1];
  rec.flag("ricci-error-decreasing", {cfg.u_min, cfg.c, true}, decreasing);
}

void suite_green(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  struct Row {
    SpectralReport spectral;
    Real residual = 0, adjoint = 0;
  };
  const auto rows = parallel_map<Row>(points.size(), [&](std::size_t s) {
    const CollarPtr c = make_collar(collar_from_u(points[s].u, points[s].c), cfg.n_tau);
    Row r;
    r.spectral = spectral_check(c, cfg.green_samples, cfg.seed + s);
    std::mt19937_64 rng(cfg.seed + 1000 + s);
    for (int k = 0; k < 10; ++k) {
      const CollarField f = random_supported_field(c, rng);
      const CollarField h = random_supported_field(c, rng);
      SolveDiagnostics d;
      solve_T(f, {}, &d);
      r.residual = std::max(r.residual, d.residual);
      r.adjoint = std::max(r.adjoint, self_adjoint_defect(f, h));
    }
    return r;
  });
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    rec.bound("green-spectral-lower", p, std::max<Real>(rows[s].spectral.worst_lower, 0), 1e-10L);
    rec.bound("green-spectral-upper", p, std::max<Real>(rows[s].spectral.worst_upper, 0), 1e-10L);
    rec.bound("green-spectral-violations", p, rows[s].spectral.violations, 0);
    rec.bound("green-residual", p, rows[s].residual, 1e-6L);
    rec.bound("green-self-adjoint", p, rows[s].adjoint, 1e-8L);
  }
}

struct ApproxRow {
  Real e_err = 0, xi_err = 0, txi_err = 0;
  Complex ef{}, p_l1{};
};

ApproxRow approximant_row(const RunConfig& cfg, const CurvatureEngine& e) {
  const Approximants ap = build_approximants(e.model(), 0, 0, cfg.cutoffs);
  ApproxRow r;
  r.e_err = sup_norm(sub(e.e(0, 0, 0), ap.e_tilde[0]));
  const CollarField xe = xi(e.A(0, 0), ap.e_tilde[0]);
  r.xi_err = sup_norm(sub(xe, apply_box1(ap.d[0])));
  SolverConfig sc;
  sc.check_support = false;
  r.txi_err = sup_norm(sub(solve_T(xe, sc), ap.d[0]));
  r.ef = pair_integral(ap.e_tilde[0], ap.f_tilde[0]);
  r.p_l1 = l1_norm(op_P(ap.e_tilde[0]));
  return r;
}

void suite_approximants(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  const auto eng = engines(cfg, points);
  const auto rows = parallel_map<ApproxRow>(points.size(), [&](std::size_t s) { return approximant_row(cfg, *eng[s]); });
  std::vector<std::pair<Real, Real>> e_s, xi_s, txi_s;
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    rec.report("e-approx", p, rows[s].e_err, table_value("e-approx", p), t_power_of("e-approx"));
    rec.report("xi-d-residual", p, rows[s].xi_err, table_value("xi-d-residual", p), t_power_of("xi-d-residual"));
    rec.report("t-xi-d", p, rows[s].txi_err, table_value("t-xi-d", p), t_power_of("t-xi-d"));
    rec.relative("ef-pairing", p, rows[s].ef, table_value("ef-pairing", p), 0.15L, t_power_of("ef-pairing"));
    rec.relative("p-e-l1", p, rows[s].p_l1, table_value("p-e-l1", p), 0.15L, t_power_of("p-e-l1"));
    if (p.sweep) {
      e_s.emplace_back(p.u, rows[s].e_err);
      xi_s.emplace_back(p.u, rows[s].xi_err);
      txi_s.emplace_back(p.u, rows[s].txi_err);
    }
  }
  const Point last{cfg.u_min, cfg.c, true};
  rec.exponent("e-approx-exponent", last, fit_power_law(e_s, t_power_of("e-approx")), target("e-approx").u_exponent);
  rec.exponent("xi-d-residual-exponent", last, fit_power_law(xi_s, t_power_of("xi-d-residual")),
               target("xi-d-residual").u_exponent);
  rec.exponent("t-xi-d-exponent", last, fit_power_law(txi_s, t_power_of("t-xi-d")), target("t-xi-d").u_exponent);
}

void suite_holo(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  const auto eng = engines(cfg, points);
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    const CurvatureEngine& e = *eng[s];
    const G1Report g = e.g1_terms(0);
    const char* ids[4] = {"g1-term1", "g1-term2", "g1-term3", "g1-term4"};
    for (int k = 0; k < 4; ++k) rec.relative(ids[k], p, g.terms[k], table_value(ids[k], p), 0.15L, t_power_of(ids[k]));
    rec.relative("holo-sec-diag", p, g.sum, table_value("holo-sec-diag", p), 0.15L, t_power_of("holo-sec-diag"));
    rec.relative("t-pairing", p, e.V(0, 0, 0, 0, 0, 0), table_value("t-pairing", p), 0.15L, t_power_of("t-pairing"));
    rec.relative("xi-pairing", p, e.W(0, 0, 0, 0, 0), table_value("xi-pairing", p), 0.15L, t_power_of("xi-pairing"));
    rec.relative("q-pairing", p, reduced_q_pairing(e.e(0, 0, 0), e.f(0, 0, 0)), table_value("q-pairing", p), 0.15L,
                 t_power_of("q-pairing"));
    rec.relative("wp-curvature-diag", p, e.R(0, 0, 0, 0), table_value("wp-curvature-diag", p), 0.15L,
                 t_power_of("wp-curvature-diag"));
    rec.relative("wp-curvature-contracted", p, e.wp_upper()(0, 0) * e.R(0, 0, 0, 0),
                 table_value("wp-curvature-contracted", p), 0.15L, t_power_of("wp-curvature-contracted"));
    rec.relative("a-sup", p, sup_norm(e.A(0, 0)), table_value("a-sup", p), 0.15L, t_power_of("a-sup"));
    rec.relative("f-sup", p, sup_norm(e.f(0, 0, 0)), table_value("f-sup", p), 0.15L, t_power_of("f-sup"));
    rec.relative("f-l2", p, inner(e.f(0, 0, 0), e.f(0, 0, 0)), table_value("f-l2", p), 0.15L, t_power_of("f-l2"));
  }
}

void suite_perturbed(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  const auto eng = engines(cfg, points);
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    const CurvatureEngine& e = *eng[s];
    for (Real C : cfg.perturbation_c) {
      const std::string tag = "-C" + format_c(C);
      const Complex P = e.perturbed_curvature(0, 0, 0, 0, C).total();
      rec.relative("perturbed-curvature" + tag, p, P, perturbed_target(p.u, p.t_abs(), C), 0.15L, -4);
      rec.flag("perturbed-positive" + tag, p, P.real() > 0);
      const Real ratio = e.perturbed_metric(C).upper()(0, 0).real() / e.ricci_upper()(0, 0).real();
      rec.band("perturbed-inverse-dominance" + tag, p, ratio, 1, std::numeric_limits<Real>::min(),
               1 - std::numeric_limits<Real>::epsilon());
      rec.report("perturbed-determinant" + tag, p, perturbed_determinant_ratio(e, C), 1);
    }
  }
}

void suite_lengths(const RunConfig& cfg, Recorder& rec) {
  const auto points = evaluation_points(cfg);
  std::vector<Real> ts;
  for (const auto& p : points) ts.push_back(p.t_abs());
  const LengthReport rep = geodesic_length_derivative_check(ts);
  for (std::size_t s = 0; s < points.size(); ++s) {
    const Point& p = points[s];
    const LengthEntry& e = rep.entries[s];
    rec.relative("length-derivative", p, e.fd, e.predicted, 3 * p.u, -1);
    rec.relative("log-length-sq", p, e.log_length_sq, e.quarter_b_sq, 3 * p.u, -2);
  }
  const LengthEntry desk = geodesic_length_derivative_check({std::exp(-10.0L)}).entries[0];
  rec.relative("length-derivative-desk", {desk.u, cfg.c, false}, desk.fd, desk.closed_form, 0.01L);
}

void suite_equivalence(const RunConfig& cfg, Recorder& rec) {
  auto points = evaluation_points(cfg);
  // The variation check compares two fixed widths.
  points.push_back({0.05L, cfg.c, false});
  points.push_back({0.025L, cfg.c, false});
  const auto eng = engines(cfg, points);
  std::vector<EquivalenceEntry> ratios;
  for (const auto& e : eng) ratios.push_back(equivalence_ratios(*e));
  for (std::size_t s = 0; s + 2 < points.size(); ++s) {
    rec.band("poincare-ratio", points[s], ratios[s].poincare, 3, 1, 10);
    rec.band("mcmullen-ratio", points[s], ratios[s].mcmullen, 1 / Real(3), 0.1L, 1);
  }
  const EquivalenceEntry& a = ratios[ratios.size() - 2];
  const EquivalenceEntry& b = ratios.back();
  const Point at{0.025L, cfg.c, false};
  rec.bound("poincare-variation", at, std::abs(a.poincare - b.poincare) / b.poincare, 0.1L);
  rec.bound("mcmullen-variation", at, std::abs(a.mcmullen - b.mcmullen) / b.mcmullen, 0.1L);
}

void suite_g2(const RunConfig& cfg, Recorder& rec) {
  const auto us = cfg.sweep();
  const auto entries = parallel_map<G2Entry>(us.size(), [&](std::size_t s) {
    return g2_entry(CurvatureEngine(family(cfg, {us[s], us[s]})));
  });
  std::array<std::vector<std::pair<Real, Real>>, 4> samples;
  for (std::size_t s = 0; s < us.size(); ++s) {
    const Point p{us[s], cfg.c, true};
    for (int k = 0; k < 4; ++k) {
      rec.report("g2-case" + std::to_string(k + 1), p, entries[s].cases[k], 0, -4);
      samples[k].emplace_back(us[s], std::abs(entries[s].cases[k]));
    }
    rec.report("g2-case1-term", p, entries[s].case1_term, 0, -4);
    rec.report("g2-case3-term", p, entries[s].case3_term, 0, -4);
  }
  const Point last{cfg.u_min, cfg.c, true};
  for (int k = 0; k < 4; ++k)
    rec.exponent("g2-case" + std::to_string(k + 1) + "-exponent", last, fit_power_law(samples[k], -4),
                 target("g2").u_exponent);
}

}  // namespace

SuiteReport run_suite(const RunConfig& cfg, const std::string& suite) {
  cfg.validate();
  SuiteReport rep;
  rep.suite = suite;
  Recorder rec(cfg, rep);
  const auto start = std::chrono::steady_clock::now();
  if (suite == "verify-calculus") suite_calculus(cfg, rec);
  else if (suite == "wp-asymptotics") suite_wp(cfg, rec);
  else if (suite == "ricci-asymptotics") suite_ricci(cfg, rec);
  else if (suite == "green-props") suite_green(cfg, rec);
  else if (suite == "approximants") suite_approximants(cfg, rec);
  else if (suite == "holo-curvature") suite_holo(cfg, rec);
  else if (suite == "perturbed") suite_perturbed(cfg, rec);
  else if (suite == "lengths") suite_lengths(cfg, rec);
  else if (suite == "equivalence") suite_equivalence(cfg, rec);
  else if (suite == "g2-bounds") suite_g2(cfg, rec);
  else throw Error(Errc::config, "unknown suite " + suite);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.pass = rep.failing().empty();
  return rep;
}

namespace {

std::string number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* pass_text(const CheckRecord& r) { return r.report_only ? "report" : (r.pass ? "true" : "false"); }

// Temp file plus rename, so readers never see a partial report.
void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace

std::string csv_text(const std::vector<SuiteReport>& reports) {
  std::string out = "suite,check_id,u,t_abs,measured_re,measured_im,target_re,target_im,rel_err,pass\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.checks) {
      out += r.suite + ',' + r.id + ',' + number(r.u) + ',' + number(r.t_abs) + ',' + number(r.measured_re) + ',' +
             number(r.measured_im) + ',' + number(r.target_re) + ',' + number(r.target_im) + ',' + number(r.rel_err) +
             ',' + pass_text(r) + '\n';
    }
  return out;
}

std::string json_text(const std::vector<SuiteReport>& reports) {
  json j = json::object();
  j["reports"] = reports;
  return j.dump(2) + "\n";
}

std::string markdown_text(const std::vector<SuiteReport>& reports) {
  std::ostringstream os;
  os << "# collarlab report\n\n| suite | result | checks | failing | seconds |\n|---|---|---|---|---|\n";
  for (const auto& rep : reports) {
    const auto bad = rep.failing();
    os << "| " << rep.suite << " | " << (rep.pass ? "PASS" : "FAIL") << " | " << rep.checks.size() << " | "
       << bad.size() << " | " << number(rep.seconds) << " |\n";
  }
  for (const auto& rep : reports) {
    os << "\n## " << rep.suite << "\n\n| check | u | rel_err | tolerance | pass |\n|---|---|---|---|---|\n";
    for (const auto& r : rep.checks)
      os << "| " << r.id << " | " << number(r.u) << " | " << number(r.rel_err) << " | "
         << (r.report_only ? std::string("-") : number(r.tolerance)) << " | " << pass_text(r) << " |\n";
  }
  return os.str();
}

std::map<std::string, std::string> svg_charts(const std::vector<SuiteReport>& reports) {
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& rep : reports)
    for (const auto& r : rep.checks)
      series[r.id].emplace_back(std::log10(r.u), std::log10(std::max(r.rel_err, 1e-20)));
  std::map<std::string, std::string> out;
  constexpr double width = 480, height = 320, pad = 48;
  for (auto& [id, pts] : series) {
    std::sort(pts.begin(), pts.end());
    double x0 = pts.front().first, x1 = pts.back().first, y0 = pts.front().second, y1 = y0;
    for (const auto& [x, y] : pts) {
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); };
    auto py = [&](double y) { return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad); };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
       << "<text x=\"" << pad << "\" y=\"20\" font-family=\"monospace\" font-size=\"12\">" << id
       << ": log10 rel_err vs log10 u</text>\n"
       << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << width - 2 * pad << "\" height=\""
       << height - 2 * pad << "\" fill=\"none\" stroke=\"#888\"/>\n"
       << "<text x=\"4\" y=\"" << py(y1) + 4 << "\" font-size=\"10\">" << number(y1) << "</text>\n"
       << "<text x=\"4\" y=\"" << py(y0) + 4 << "\" font-size=\"10\">" << number(y0) << "</text>\n"
       << "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : pts) os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\"/>\n";
    os << "</svg>\n";
    out[id] = os.str();
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const std::vector<SuiteReport>& reports, const std::string& format,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& path, const std::string& text) {
    write_atomic(path, text);
    written.push_back(path);
  };
  if (format == "csv") emit(dir / "report.csv", csv_text(reports));
  else if (format == "json") emit(dir / "report.json", json_text(reports));
  else if (format == "markdown") emit(dir / "report.md", markdown_text(reports));
  else if (format == "svg-lines") {
    const std::filesystem::path sub_dir = dir / "svg";
    std::filesystem::create_directories(sub_dir, ec);
    if (ec) throw Error(Errc::io, "cannot create " + sub_dir.string() + ": " + ec.message());
    for (const auto& [id, svg] : svg_charts(reports)) emit(sub_dir / (id + ".svg"), svg);
  } else
    throw Error(Errc::config, "unknown format " + format);
  return written;
}

}  // namespace collarlab
