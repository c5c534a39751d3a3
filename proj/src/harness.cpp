#include "necklab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <thread>

#include "necklab/collar.hpp"
#include "necklab/error.hpp"
#include "necklab/field_io.hpp"
#include "necklab/fields.hpp"

namespace necklab {

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

SolveConfig solve_config_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"dt", "tol_tension", "max_iters", "log_every", "method", "checkpoint_every",
                     "checkpoint_dir"},
                 "solver");
  SolveConfig c;
  c.dt = j.value("dt", c.dt);
  c.tol_tension = j.value("tol_tension", c.tol_tension);
  c.max_iters = j.value("max_iters", c.max_iters);
  c.log_every = j.value("log_every", c.log_every);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  if (j.contains("checkpoint_dir")) c.checkpoint_dir = j.at("checkpoint_dir").get<std::string>();
  const std::string method = j.value("method", std::string("newton"));
  if (method == "newton") c.method = SolveMethod::Newton;
  else if (method == "flow") c.method = SolveMethod::Flow;
  else config_error("solver method must be 'newton' or 'flow'");
  if (!(c.tol_tension > 0.0) || c.max_iters < 0 || c.log_every < 1 || c.dt < 0.0) {
    config_error("invalid solver settings");
  }
  return c;
}

nlohmann::json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

nlohmann::json solve_report_json(const SolveReport& r) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& [it, e] : r.energy_history) hist.push_back({it, e});
  return {{"iterations", r.iterations},
          {"final_residual", r.final_residual},
          {"converged", r.converged},
          {"energy_history", hist}};
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::SingleSolve: return "solve";
    case ExperimentKind::Degeneration: return "degenerate";
    case ExperimentKind::CollarTable: return "collar";
    case ExperimentKind::Segment: return "segment";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "solve" || s == "single") return ExperimentKind::SingleSolve;
  if (s == "degenerate" || s == "degeneration") return ExperimentKind::Degeneration;
  if (s == "collar") return ExperimentKind::CollarTable;
  if (s == "segment") return ExperimentKind::Segment;
  config_error("unknown experiment kind '" + s + "'");
}

double DisplacementRule::slope(double cylinder_length) const {
  switch (kind) {
    case Kind::FixedDisplacement: return value / cylinder_length;
    case Kind::FixedSlope: return value;
    case Kind::PowerLaw: return value * std::pow(cylinder_length, -power);
  }
  return 0.0;
}

nlohmann::json DisplacementRule::to_json() const {
  switch (kind) {
    case Kind::FixedDisplacement: return {{"name", "fixed_displacement"}, {"D", value}};
    case Kind::FixedSlope: return {{"name", "fixed_slope"}, {"a", value}};
    case Kind::PowerLaw: return {{"name", "power_law"}, {"c", value}, {"p", power}};
  }
  return {};
}

DisplacementRule DisplacementRule::from_json(const nlohmann::json& j) {
  reject_unknown(j, {"name", "D", "a", "c", "p"}, "rule");
  const std::string name = j.at("name").get<std::string>();
  if (name == "fixed_displacement") return fixed_displacement(j.at("D").get<double>());
  if (name == "fixed_slope") return fixed_slope(j.at("a").get<double>());
  if (name == "power_law") return power_law(j.at("c").get<double>(), j.at("p").get<double>());
  config_error("unknown displacement rule '" + name + "'");
}

double DegenerationFamily::thin_delta() const { return delta > 0.0 ? delta : std::asinh(1.0); }

void DegenerationFamily::validate() const {
  if (l_schedule.size() < 3) config_error("a family needs at least three core lengths");
  for (std::size_t k = 0; k < l_schedule.size(); ++k) {
    const double l = l_schedule[k];
    if (!(l > 0.0 && l <= max_core_length())) config_error("core length outside (0, 2 asinh 1]");
    if (k > 0 && !(l < l_schedule[k - 1])) config_error("l_schedule must be strictly decreasing");
  }
  if (perturbation < 0.0) config_error("perturbation must be >= 0");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  try {
    reject_unknown(j, {"kind", "target", "grid", "solver", "invariants", "segment", "degeneration",
                       "single", "collar", "output", "seed"},
                   "config");
    ExperimentConfig c;
    if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
    if (j.contains("target")) c.target = TargetManifold::from_descriptor(j.at("target"));
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      reject_unknown(g, {"rows_per_unit", "n_th"}, "grid");
      c.rows_per_unit = g.value("rows_per_unit", c.rows_per_unit);
      c.n_th = g.value("n_th", c.n_th);
    }
    if (c.rows_per_unit < 1 || c.n_th < 8) config_error("grid needs rows_per_unit >= 1, n_th >= 8");
    if (j.contains("solver")) c.solver = solve_config_from_json(j.at("solver"));
    if (j.contains("invariants")) c.invariants = InvariantOptions::from_json(j.at("invariants"));
    if (j.contains("segment")) c.segment = SegmentOptions::from_json(j.at("segment"));
    c.segment.order = c.invariants.order;
    if (j.contains("degeneration")) {
      const auto& d = j.at("degeneration");
      reject_unknown(d, {"l_schedule", "rule", "delta", "perturbation"}, "degeneration");
      c.degeneration.l_schedule = d.at("l_schedule").get<std::vector<double>>();
      c.degeneration.rule = DisplacementRule::from_json(d.at("rule"));
      c.degeneration.delta = d.value("delta", 0.0);
      c.degeneration.perturbation = d.value("perturbation", c.degeneration.perturbation);
      c.degeneration.validate();
    } else if (c.kind == ExperimentKind::Degeneration) {
      config_error("degeneration experiments need a 'degeneration' section");
    }
    if (j.contains("single")) {
      const auto& s = j.at("single");
      reject_unknown(s, {"init", "t_min", "t_max", "n_t", "n_th", "slope", "arc", "amp", "center",
                         "relax"},
                     "single");
      SingleSpec& o = c.single;
      o.init = s.value("init", o.init);
      o.t_min = s.value("t_min", o.t_min);
      o.t_max = s.value("t_max", o.t_max);
      o.n_t = s.value("n_t", o.n_t);
      o.n_th = s.value("n_th", o.n_th);
      o.slope = s.value("slope", o.slope);
      o.arc = s.value("arc", o.arc);
      o.amp = s.value("amp", o.amp);
      o.center = s.value("center", o.center);
      o.relax = s.value("relax", o.relax);
    }
    if (j.contains("collar")) {
      const auto& q = j.at("collar");
      reject_unknown(q, {"l", "delta"}, "collar");
      c.collar.l = q.value("l", c.collar.l);
      c.collar.delta = q.value("delta", 0.0);
    }
    if (j.contains("output")) c.output_dir = j.at("output").get<std::string>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot open config " + path.string());
  try {
    return from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
}

RecordRow run_member(const ExperimentConfig& cfg, double l, std::uint64_t seed) {
  RecordRow row;
  row.l = l;
  try {
    const SubcollarBounds sc = subcollar(l, cfg.degeneration.thin_delta());
    row.cylinder_length = sc.length();
    row.n_t = std::max(64, static_cast<int>(std::ceil(cfg.rows_per_unit * sc.length())));
    const CylinderGrid grid = CylinderGrid::make(sc.t1, sc.t2, row.n_t, cfg.n_th);
    row.slope = cfg.degeneration.rule.slope(sc.length());
    const double amp = cfg.degeneration.perturbation * std::min(1.0, row.slope * sc.length());
    const MapField f0 = perturbed_geodesic(grid, cfg.target, row.slope, amp, seed);

    SolveConfig sc_cfg = cfg.solver;
    sc_cfg.tol_tension = std::max(1e-13, std::min(sc_cfg.tol_tension, 1e-3 * row.slope * row.slope));
    const SolveResult solved = solve(f0, BoundaryData::from_field(f0), sc_cfg);
    row.iterations = solved.report.iterations;
    row.final_residual = solved.report.final_residual;
    row.converged = solved.report.converged;
    if (!row.converged) row.failure = "not converged";

    const Decomposition d = segment(solved.field, cfg.segment);
    const NeckIdentityReport rep = neck_identity(solved.field, d, cfg.invariants);
    row.alpha = rep.alpha;
    row.alpha_drift = rep.alpha_drift;
    row.e_neck = rep.total_neck_energy;
    row.l_neck = rep.total_neck_length;
    row.neck_length = rep.neck_length;
    row.neck_fraction = rep.neck_length / (2.0 * kPi * kPi / l);
    row.predicted_energy = rep.predicted_energy;
    row.predicted_length = rep.predicted_length;
    row.energy_scale = std::abs(rep.alpha.real()) * kPi * kPi / l;
    row.length_scale = std::sqrt(std::abs(rep.alpha.real())) * kPi * kPi / l;
    row.im_scale = std::abs(rep.alpha.imag()) * kPi * kPi / l;
    row.residual_energy = rep.residual_energy;
    row.residual_length = rep.residual_length;
    row.bounds_pass = rep.bounds_pass();
  } catch (const Error& e) {
    row.failure = e.what();
  }
  return row;
}

DegenerationResult run_degeneration(const ExperimentConfig& cfg, int threads) {
  cfg.degeneration.validate();
  std::vector<double> ls = cfg.degeneration.l_schedule;
  std::sort(ls.begin(), ls.end(), std::greater<>());
  DegenerationResult out;
  out.rows.resize(ls.size());

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t k = next++; k < ls.size(); k = next++) {
      out.rows[k] = run_member(cfg, ls[k], cfg.seed + 1000003ULL * k);
    }
  };
  const int n_workers = std::clamp(threads, 1, static_cast<int>(ls.size()));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n_workers; ++w) pool.emplace_back(work);
    work();
  }

  std::vector<FamilyMember> members;
  for (const auto& r : out.rows) {
    if (!r.ok()) continue;
    NeckIdentityReport rep;
    rep.alpha = r.alpha;
    members.push_back({r.l, rep});
  }
  try {
    out.verdict = classify_compactness(members);
  } catch (const Error& e) {
    out.verdict_failure = e.what();
  }
  return out;
}

nlohmann::json DegenerationResult::to_json() const {
  nlohmann::json j = {{"rows", rows_to_json(rows)}};
  if (verdict) j["verdict"] = verdict->to_json();
  else j["verdict_failure"] = verdict_failure;
  return j;
}

MapField build_single_field(const ExperimentConfig& cfg) {
  const SingleSpec& s = cfg.single;
  const double len = s.t_max - s.t_min;
  const int n_t = s.n_t > 0 ? s.n_t
                            : std::max(8, static_cast<int>(std::ceil(cfg.rows_per_unit * len)) + 1);
  const CylinderGrid grid = CylinderGrid::make(s.t_min, s.t_max, n_t, s.n_th);
  const bool sphere3 = cfg.target.kind() == TargetManifold::Kind::UnitSphere &&
                       cfg.target.ambient_dim() == 3;
  if (s.init == "geodesic") {
    const auto [p, v] = geodesic_frame(cfg.target);
    return geodesic_ansatz(grid, cfg.target, p, v, s.slope);
  }
  if (s.init == "constant") {
    const Vec p = geodesic_frame(cfg.target).first;
    return MapField::sample(grid, cfg.target, [&](double, double) { return p; });
  }
  if (!sphere3) config_error("init '" + s.init + "' needs the target sphere of dimension 3");
  if (s.init == "equator") return equator_wrap(grid);
  if (s.init == "bubble") return conformal_bubble(grid, s.center);
  if (s.init == "neck_bubble") return neck_with_bubble(grid, s.slope, s.center);
  if (s.init == "wobbly") return wobbly_geodesic(grid, s.arc, s.amp);
  config_error("unknown init '" + s.init + "'");
}

nlohmann::json run_single(const ExperimentConfig& cfg, bool write) {
  MapField f = build_single_field(cfg);
  nlohmann::json report = {{"kind", "solve"}, {"init", cfg.single.init}};
  if (cfg.single.relax) {
    SolveResult r = solve(f, BoundaryData::from_field(f), cfg.solver);
    report["solve"] = solve_report_json(r.report);
    f = std::move(r.field);
  }
  const auto& g = f.grid();
  const DiffOrder order = cfg.invariants.order;
  const RowStats stats = row_stats(f, order);
  const RowRange all{0, g.n_t - 1};
  const AlphaResult a = alpha(g, stats, all);
  const HopfField h = hopf(f, order);
  const Oscillation osc = oscillation(f, g.t_min, g.t_max);
  nlohmann::json inv = {
      {"energy", energy(g, stats, all)},
      {"avg_length", average_length(g, stats, all)},
      {"oscillation", {{"value", osc.value}, {"sampled", osc.sampled}}},
      {"window_energy", window_energy(g, stats, all)},
      {"alpha", complex_json(a.alpha)},
      {"alpha_drift", a.drift},
      {"theta_max", *std::max_element(stats.uth2.begin(), stats.uth2.end())},
      {"hopf_max_abs", h.max_abs()},
      {"hopf_dbar", hopf_dbar(h)},
  };
  report["invariants"] = inv;
  const CheckReport lemmas = lemma_suite(f, cfg.invariants);
  report["lemmas"] = lemmas.to_json();
  if (g.length() >= 4.0) {
    const Decomposition d = segment(f, cfg.segment);
    report["decomposition"] = d.to_json();
    report["neck_identity"] = neck_identity(f, d, cfg.invariants).to_json();
  }
  report["pass"] = lemmas.pass();
  if (write) {
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / "report.json", report.dump(2) + "\n");
    save_field(cfg.output_dir / "field.txt", f);
  }
  return report;
}

nlohmann::json run_segment(const ExperimentConfig& cfg) {
  MapField f = build_single_field(cfg);
  nlohmann::json out = {{"kind", "segment"}, {"init", cfg.single.init}};
  if (cfg.single.relax) {
    SolveResult r = solve(f, BoundaryData::from_field(f), cfg.solver);
    out["solve"] = solve_report_json(r.report);
    f = std::move(r.field);
  }
  const Decomposition d = segment(f, cfg.segment);
  const NeckIdentityReport rep = neck_identity(f, d, cfg.invariants);
  out["decomposition"] = d.to_json();
  out["neck_identity"] = rep.to_json();
  out["pass"] = rep.bounds_pass();
  return out;
}

nlohmann::json collar_table(const CollarQuery& q) {
  const CollarSpec c = CollarSpec::make(q.l);
  const double delta = q.delta > 0.0 ? q.delta : std::asinh(1.0);
  const SubcollarBounds s = subcollar(q.l, delta);
  return {{"l", c.l},
          {"t_lo", c.t_lo},
          {"t_hi", c.t_hi},
          {"core_t", c.core_t},
          {"length", c.length()},
          {"conformal_factor_core", conformal_factor(c.l, c.core_t)},
          {"conformal_factor_end", conformal_factor(c.l, c.t_lo)},
          {"injrad_core", injrad(c.l, c.core_t)},
          {"area_closed_form", collar_area(c.l)},
          {"area_quadrature", collar_area_quadrature(c.l)},
          {"delta", delta},
          {"subcollar_t1", s.t1},
          {"subcollar_t2", s.t2},
          {"subcollar_length", s.length()},
          {"subcollar_length_ratio", s.length() * c.l / (2.0 * kPi * kPi)}};
}

}  // namespace necklab
