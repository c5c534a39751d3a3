#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "necklab/decompose.hpp"
#include "necklab/solver.hpp"

namespace necklab {

enum class ExperimentKind { SingleSolve, Degeneration, CollarTable, Segment };

const char* to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

/// How far the boundary circles of the n-th cylinder sit apart on the
/// target: slope a_n, so the endpoints are a_n·Λ_n apart.
struct DisplacementRule {
  enum class Kind { FixedDisplacement, FixedSlope, PowerLaw };
  Kind kind = Kind::FixedDisplacement;
  double value = 1.0;  // D, a or c
  double power = 0.0;  // p, power law only

  static DisplacementRule fixed_displacement(double d) { return {Kind::FixedDisplacement, d, 0.0}; }
  static DisplacementRule fixed_slope(double a) { return {Kind::FixedSlope, a, 0.0}; }
  static DisplacementRule power_law(double c, double p) { return {Kind::PowerLaw, c, p}; }

  double slope(double cylinder_length) const;
  nlohmann::json to_json() const;
  static DisplacementRule from_json(const nlohmann::json& j);
};

struct DegenerationFamily {
  std::vector<double> l_schedule;
  DisplacementRule rule;
  double delta = 0.0;  // zero selects asinh(1)
  /// Size of the seeded in-plane perturbation of the initial field.
  double perturbation = 0.05;

  double thin_delta() const;
  /// Throws ConfigError unless l is strictly decreasing, within
  /// (0, 2 asinh 1] and has at least three entries.
  void validate() const;
};

/// One closed-form field on an explicit cylinder, optionally relaxed.
struct SingleSpec {
  std::string init = "geodesic";  // geodesic | constant | equator | bubble | neck_bubble | wobbly
  double t_min = 0.0;
  double t_max = 10.0;
  int n_t = 0;  // zero: derived from rows_per_unit
  int n_th = 32;
  double slope = 0.5;  // geodesic, neck_bubble
  double arc = 0.2;    // wobbly
  double amp = 0.03;   // wobbly
  double center = 0.0;
  bool relax = true;
};

struct CollarQuery {
  double l = 0.1;
  double delta = 0.0;  // zero selects asinh(1)
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SingleSolve;
  TargetManifold target = TargetManifold::unit_sphere(3);
  int rows_per_unit = 8;
  int n_th = 16;
  SolveConfig solver;
  InvariantOptions invariants;
  SegmentOptions segment;
  DegenerationFamily degeneration;
  SingleSpec single;
  CollarQuery collar;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  /// Throws ConfigError on unknown keys or invalid values.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
};

struct RecordRow {
  double l = 0.0;
  double cylinder_length = 0.0;
  int n_t = 0;
  double slope = 0.0;
  Complex alpha;
  double alpha_drift = 0.0;
  double e_neck = 0.0;
  double l_neck = 0.0;
  double neck_length = 0.0;
  /// Σ|I^i| / (2π²/l).
  double neck_fraction = 0.0;
  double predicted_energy = 0.0;
  double predicted_length = 0.0;
  double energy_scale = 0.0;  // |Re α|·π²/l
  double length_scale = 0.0;  // √|Re α|·π²/l
  double im_scale = 0.0;      // |Im α|·π²/l
  double residual_energy = 0.0;
  double residual_length = 0.0;
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  bool bounds_pass = false;
  std::string failure;

  bool ok() const { return failure.empty() && converged; }
};

struct DegenerationResult {
  std::vector<RecordRow> rows;  // sorted by decreasing l
  std::optional<CompactnessVerdict> verdict;
  std::string verdict_failure;

  nlohmann::json to_json() const;
};

/// Solve, segment and account one family member.
RecordRow run_member(const ExperimentConfig& cfg, double l, std::uint64_t seed);

/// Every member on a pool of `threads` workers. Output does not depend on
/// the thread count.
DegenerationResult run_degeneration(const ExperimentConfig& cfg, int threads = 1);

/// Build the `single` field, relax it if asked, and evaluate every
/// invariant and lemma check. Writes report.json and field.txt into the
/// output directory when `write` is set.
nlohmann::json run_single(const ExperimentConfig& cfg, bool write = true);

/// Segment the `single` field and account its necks.
nlohmann::json run_segment(const ExperimentConfig& cfg);

/// Derived collar quantities for cfg.collar.
nlohmann::json collar_table(const CollarQuery& q);

/// The initial field described by the `single` section.
MapField build_single_field(const ExperimentConfig& cfg);

// Export.

enum class TableFormat { Csv, Json };

/// Column order of the CSV export.
const std::vector<std::string>& csv_header();
std::string to_csv(const std::vector<RecordRow>& rows);
nlohmann::json rows_to_json(const std::vector<RecordRow>& rows);
std::vector<RecordRow> rows_from_json(const nlohmann::json& j);
/// Throws IoError on an empty table or a failed write.
void export_table(const std::vector<RecordRow>& rows, TableFormat format,
                  const std::filesystem::path& path);

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

/// Standalone log–log line chart, one polyline per series. Nonpositive
/// points are dropped. Throws InvalidArgument for an empty list or a series
/// with fewer than two points, DegenerateAxis when all x coincide.
std::string render_svg(const std::vector<Series>& series, const std::string& title);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace necklab
