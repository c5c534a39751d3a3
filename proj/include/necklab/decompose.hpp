#pragma once

#include <vector>

#include "json.hpp"
#include "necklab/invariants.hpp"

namespace necklab {

/// A t-interval whose ends sit on grid rows. May be a single row (length 0)
/// when a bubble touches an end of the cylinder.
struct Interval {
  int first_row = 0;
  int last_row = 0;
  double t_a = 0.0;
  double t_b = 0.0;

  double length() const { return t_b - t_a; }
};

enum class DecompositionCase { AllNeck, Mixed };

/// Necks I⁰..I^K alternating with bubbles J¹..J^K, tiling the cylinder.
struct Decomposition {
  DecompositionCase kind = DecompositionCase::AllNeck;
  std::vector<Interval> necks;
  std::vector<Interval> bubbles;
  double epsilon = 0.0;
  int n_t = 0;

  nlohmann::json to_json() const;
};

struct SegmentOptions {
  /// Window-energy threshold; 0.5·eps0 with eps0 = 0.5.
  double epsilon = 0.25;
  double merge_gap = 1.0;
  double margin = 1.0;
  DiffOrder order = DiffOrder::Second;

  static SegmentOptions from_json(const nlohmann::json& j);
};

/// Mark unit windows with ∫∫|du|² ≥ epsilon, merge marked windows closer than
/// merge_gap, pad by margin and call the complement necks.
/// Throws RangeTooShort for cylinders shorter than 4.
Decomposition segment(const MapField& f, const SegmentOptions& opts = {});

struct NeckIdentityReport {
  Complex alpha;
  double alpha_drift = 0.0;
  double neck_length = 0.0;  // Σ|I^i|
  double total_neck_energy = 0.0;
  double total_neck_length = 0.0;
  double predicted_energy = 0.0;  // ½|Re α|·Σ|I^i|
  double predicted_length = 0.0;  // √|Re α|·Σ|I^i|
  double residual_energy = 0.0;
  double residual_length = 0.0;
  /// α on each nonempty neck, and the largest deviation from `alpha`.
  std::vector<Complex> neck_alpha;
  double neck_alpha_deviation = 0.0;
  std::vector<CheckReport> bound_checks;

  bool bounds_pass() const;
  nlohmann::json to_json() const;
};

/// Relative deviation |value − prediction| / |prediction|; the absolute
/// deviation when the prediction is zero.
double relative_residual(double value, double prediction);

/// Throws MismatchedDecomposition unless `d` tiles the rows of `f`.
NeckIdentityReport neck_identity(const MapField& f, const Decomposition& d,
                                 const InvariantOptions& opts = {});

/// Shape of a positive sequence indexed by decreasing core length.
enum class Trend { Zero, Constant, ToZero, ToInfinity };

const char* to_string(Trend t);

/// Classify by relative spread (≤ 10% means constant) and otherwise by the
/// sign of the log–log slope against 1/l. All entries ≤ 1e-12 is Zero.
Trend classify_trend(const std::vector<double>& inv_l, const std::vector<double>& values);

struct FamilyMember {
  double l = 0.0;
  NeckIdentityReport report;
};

struct CompactnessVerdict {
  std::vector<double> l;
  std::vector<double> energy_scale;  // |Re α_n|·π²/l_n
  std::vector<double> length_scale;  // √|Re α_n|·π²/l_n
  Trend energy_trend = Trend::Zero;
  Trend length_trend = Trend::Zero;
  /// 1..4, or 0 when the trend pair matches no regime.
  int regime = 0;
  bool w12_modulo_bubbles = false;
  bool c0_modulo_bubbles = false;

  nlohmann::json to_json() const;
};

/// Sorts members by decreasing l. Throws TooFewSamples below three members.
CompactnessVerdict classify_compactness(std::vector<FamilyMember> members);

}  // namespace necklab
