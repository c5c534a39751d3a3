#pragma once

#include <complex>
#include <string>
#include <vector>

#include "json.hpp"
#include "necklab/collar.hpp"
#include "necklab/grid.hpp"

namespace necklab {

using Complex = std::complex<double>;

/// Calibration constants for the lemma checks. The thresholds are existence
/// constants with no known values; every check is gated on its hypothesis.
struct InvariantOptions {
  DiffOrder order = DiffOrder::Second;
  double eps0 = 0.5;
  double eps1 = 0.1;
  double eps2 = 0.5;
  /// Constant in ∫Θ ≤ C·ω and ∫√Θ ≤ C·√ω.
  double lemma_constant = 10.0;
  /// C in the Θ'' ≥ Θ slack C·h²·max Θ.
  double theta_slack_constant = 10.0;

  static InvariantOptions from_json(const nlohmann::json& j);
};

/// Slice integrals of the first-derivative quantities, one entry per row.
struct RowStats {
  std::vector<double> ut2;       // ∫|u_t|² dθ
  std::vector<double> uth2;      // ∫|u_θ|² dθ, i.e. Θ
  std::vector<double> cross;     // ∫u_t·u_θ dθ
  std::vector<double> grad_sup;  // max over the row of |∇u|

  Complex alpha_row(int i) const { return {ut2[i] - uth2[i], -2.0 * cross[i]}; }
  double density(int i) const { return ut2[i] + uth2[i]; }
};

RowStats row_stats(const MapField& f, DiffOrder order = DiffOrder::Second);

/// φ = |u_t|² − |u_θ|² − 2i·u_t·u_θ on the interior rows 1..n_t−2.
struct HopfField {
  CylinderGrid grid;
  std::vector<Complex> values;  // (n_t − 2)·n_th, row-major

  Complex at(int i, int j) const { return values[static_cast<std::size_t>(i - 1) * grid.n_th + j]; }
  double max_abs() const;
};

struct AlphaResult {
  Complex alpha;
  std::vector<Complex> per_slice;
  double drift = 0.0;
};

struct ThetaProfile {
  std::vector<double> values;
};

struct Oscillation {
  double value = 0.0;
  bool sampled = false;
};

struct NeckMetrics {
  double energy = 0.0;
  double avg_length = 0.0;
  double oscillation = 0.0;
  double window_energy = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
};

/// One inequality lhs ≤ rhs (up to slack), evaluated only when its
/// hypothesis holds.
struct Check {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = true;
  bool precondition_met = true;

  nlohmann::json to_json() const;
};

struct CheckReport {
  std::string name;
  std::vector<Check> checks;

  bool pass() const;
  void append(const CheckReport& other);
  nlohmann::json to_json() const;
};

double energy(const MapField& f, double t_a, double t_b, DiffOrder order = DiffOrder::Second);
double energy(const CylinderGrid& grid, const RowStats& s, RowRange range);

ThetaProfile theta_profile(const MapField& f, DiffOrder order = DiffOrder::Second);
HopfField hopf(const MapField& f, DiffOrder order = DiffOrder::Second);

/// sup over rows 2..n_t−3 of |½(φ_t + iφ_θ)| by central differences.
double hopf_dbar(const HopfField& h);

/// Per-slice α on the interior rows, their componentwise median and drift.
AlphaResult alpha(const MapField& f, DiffOrder order = DiffOrder::Second);
/// The same restricted to the interior rows that lie in [t_a, t_b].
AlphaResult alpha(const MapField& f, double t_a, double t_b, DiffOrder order = DiffOrder::Second);
AlphaResult alpha(const CylinderGrid& grid, const RowStats& s, RowRange range);

double average_length(const MapField& f, double t_a, double t_b,
                      DiffOrder order = DiffOrder::Second);
double average_length(const CylinderGrid& grid, const RowStats& s, RowRange range);

/// Largest target distance between two nodes of the subcylinder. Exact up to
/// 4096 nodes; above that a fixed row/column sample plus both end rows.
Oscillation oscillation(const MapField& f, double t_a, double t_b);

/// Largest ∫∫|du|² over unit windows anchored at grid rows.
/// Throws RangeTooShort when t_b − t_a < 1.
double window_energy(const MapField& f, double t_a, double t_b,
                     DiffOrder order = DiffOrder::Second);
double window_energy(const CylinderGrid& grid, const RowStats& s, RowRange range);

NeckMetrics neck_metrics(const MapField& f, double t_a, double t_b,
                         DiffOrder order = DiffOrder::Second);

/// Θ'' ≥ Θ and ∫Θ^ν ≤ 2(Θ(T₁)^ν + Θ(T₂)^ν)/ν for ν ∈ {1, ½}, on the longest
/// run of rows where sup|∇u| ≤ eps1.
CheckReport check_theta_convexity(const MapField& f, const InvariantOptions& opts = {});

/// Energy, length and Im α bounds against ∫Θ and ∫√Θ, plus the ∫Θ ≤ C·ω
/// pair when ω ≤ eps2. α is the trapezoid mean of the per-row values over
/// the range.
CheckReport check_neck_bounds(const MapField& f, double t_a, double t_b,
                              const InvariantOptions& opts = {});

/// osc ≤ 4π sup|∇u| + L/√(2π).
CheckReport check_osc_bound(const MapField& f, double t_a, double t_b,
                            const InvariantOptions& opts = {});

/// Every lemma check over the whole cylinder.
CheckReport lemma_suite(const MapField& f, const InvariantOptions& opts = {});

/// |E_flat − E_collar| / E_flat, where E_collar integrates λ⁻²|du|² against
/// the area form λ² dt dθ. Throws OutOfCollar if the grid leaves the collar.
double conformal_energy_invariance(const MapField& f, const CollarSpec& collar);

}  // namespace necklab
