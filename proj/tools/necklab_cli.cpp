#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "necklab/error.hpp"
#include "necklab/harness.hpp"

using namespace necklab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  bool svg = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;
  double l = 0.1;
  double delta = 0.0;
};

ExperimentConfig load(const Options& o, ExperimentKind kind) {
  ExperimentConfig cfg;
  if (!o.config.empty()) cfg = ExperimentConfig::load(o.config);
  cfg.kind = kind;
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

int degenerate(const ExperimentConfig& cfg, const Options& o) {
  if (cfg.degeneration.l_schedule.empty()) {
    throw Error(ErrorCode::ConfigError, "config has no 'degeneration' section");
  }
  const DegenerationResult res = run_degeneration(cfg, o.threads);
  std::filesystem::create_directories(cfg.output_dir);
  const bool json = o.format == "json";
  export_table(res.rows, json ? TableFormat::Json : TableFormat::Csv,
               cfg.output_dir / (json ? "degeneration.json" : "degeneration.csv"));
  write_text(cfg.output_dir / "verdict.json", res.to_json().dump(2) + "\n");
  if (o.svg) {
    Series e{"E_neck", {}}, l{"L_neck", {}};
    for (const auto& r : res.rows) {
      e.points.emplace_back(r.cylinder_length, r.e_neck);
      l.points.emplace_back(r.cylinder_length, r.l_neck);
    }
    write_text(cfg.output_dir / "degeneration.svg",
               render_svg({e, l}, "neck energy and length vs cylinder length"));
  }
  std::cout << to_csv(res.rows);
  if (res.verdict) {
    std::cout << "regime " << res.verdict->regime << "  W12 "
              << (res.verdict->w12_modulo_bubbles ? "yes" : "no") << "  C0 "
              << (res.verdict->c0_modulo_bubbles ? "yes" : "no") << "\n";
  } else {
    std::cout << "no verdict: " << res.verdict_failure << "\n";
  }
  bool ok = res.verdict.has_value();
  for (const auto& r : res.rows) ok = ok && r.ok() && r.bounds_pass;
  return ok ? kExitOk : kExitCheckFailed;
}

int run(const std::string& cmd, const Options& o) {
  if (cmd == "collar") {
    CollarQuery q{o.l, o.delta};
    if (!o.config.empty()) q = ExperimentConfig::load(o.config).collar;
    const nlohmann::json t = collar_table(q);
    if (o.format == "table") {
      for (const auto& [k, v] : t.items()) {
        std::cout << std::left << std::setw(26) << k << std::setprecision(12) << v.get<double>()
                  << "\n";
      }
    } else {
      std::cout << t.dump(2) << "\n";
    }
    return kExitOk;
  }
  if (cmd == "solve") {
    const nlohmann::json r = run_single(load(o, ExperimentKind::SingleSolve));
    std::cout << r.dump(2) << "\n";
    return kExitOk;
  }
  if (cmd == "segment") {
    const nlohmann::json r = run_segment(load(o, ExperimentKind::Segment));
    std::cout << r.dump(2) << "\n";
    return kExitOk;
  }
  if (cmd == "degenerate") {
    degenerate(load(o, ExperimentKind::Degeneration), o);
    return kExitOk;
  }
  // check: run whatever the config describes and fail on any failed check.
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.seed) cfg.seed = *o.seed;
  if (cfg.kind == ExperimentKind::Degeneration) return degenerate(cfg, o);
  const nlohmann::json r = cfg.kind == ExperimentKind::Segment ? run_segment(cfg) : run_single(cfg);
  std::cout << r.dump(2) << "\n";
  return r.at("pass").get<bool>() ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harmonic maps on long cylinders: solver, invariants and collar families"};
  app.require_subcommand(1);
  Options o;
  for (const char* name : {"solve", "degenerate", "collar", "segment", "check"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--format", o.format, "csv | json (collar: json | table)")
        ->check(CLI::IsMember({"csv", "json", "table"}));
    sub->add_flag("--svg", o.svg, "also write a log-log SVG plot");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", o.seed, "seed for perturbation fields");
    if (std::string(name) == "collar") {
      sub->add_option("--l", o.l, "core geodesic length");
      sub->add_option("--delta", o.delta, "thin-part threshold (default asinh 1)");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return run(cmd, o);
  } catch (const Error& e) {
    std::cerr << "necklab: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "necklab: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}
