#include "necklab/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "necklab/error.hpp"

namespace necklab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kZeroTrend = 1e-12;
constexpr double kConstantSpread = 0.1;

Interval make_interval(const CylinderGrid& g, int first, int last) {
  return {first, last, g.t(first), g.t(last)};
}

nlohmann::json interval_json(const Interval& iv) {
  return {{"t_a", iv.t_a}, {"t_b", iv.t_b}, {"first_row", iv.first_row}, {"last_row", iv.last_row}};
}

nlohmann::json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

int regime_of(Trend e, Trend l) {
  const auto to_zero = [](Trend t) { return t == Trend::Zero || t == Trend::ToZero; };
  if (e == Trend::Constant && l == Trend::ToInfinity) return 1;
  if (to_zero(e) && l == Trend::ToInfinity) return 2;
  if (to_zero(e) && l == Trend::Constant) return 3;
  if (to_zero(e) && to_zero(l)) return 4;
  return 0;
}

}  // namespace

nlohmann::json Decomposition::to_json() const {
  nlohmann::json n = nlohmann::json::array();
  nlohmann::json b = nlohmann::json::array();
  for (const auto& iv : necks) n.push_back(interval_json(iv));
  for (const auto& iv : bubbles) b.push_back(interval_json(iv));
  return {{"case", kind == DecompositionCase::AllNeck ? "AllNeck" : "Mixed"},
          {"epsilon", epsilon},
          {"necks", n},
          {"bubbles", b}};
}

SegmentOptions SegmentOptions::from_json(const nlohmann::json& j) {
  SegmentOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon") o.epsilon = value.get<double>();
    else if (key == "merge_gap") o.merge_gap = value.get<double>();
    else if (key == "margin") o.margin = value.get<double>();
    else throw Error(ErrorCode::ConfigError, "unknown segment key '" + key + "'");
  }
  if (!(o.epsilon > 0.0) || o.merge_gap < 0.0 || o.margin < 0.0) {
    throw Error(ErrorCode::ConfigError, "segment epsilon must be positive, gap and margin >= 0");
  }
  return o;
}

Decomposition segment(const MapField& f, const SegmentOptions& opts) {
  const auto& g = f.grid();
  if (g.length() < 4.0) throw Error(ErrorCode::RangeTooShort, "segmentation needs length >= 4");
  if (!(opts.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const RowStats s = row_stats(f, opts.order);
  const int m = std::max(1, static_cast<int>(std::lround(1.0 / g.h_t)));

  // Marked windows as row ranges, merged while the gap stays within merge_gap.
  const int gap_rows = static_cast<int>(std::lround(opts.merge_gap / g.h_t));
  std::vector<std::pair<int, int>> merged;
  for (int i = 0; i + m < g.n_t; ++i) {
    double w = 0.5 * (s.density(i) + s.density(i + m));
    for (int k = i + 1; k < i + m; ++k) w += s.density(k);
    if (w * g.h_t < opts.epsilon) continue;
    if (!merged.empty() && i - merged.back().second <= gap_rows) {
      merged.back().second = i + m;
    } else {
      merged.emplace_back(i, i + m);
    }
  }

  const int pad = static_cast<int>(std::lround(opts.margin / g.h_t));
  std::vector<std::pair<int, int>> padded;
  for (auto [a, b] : merged) {
    a = std::max(0, a - pad);
    b = std::min(g.n_t - 1, b + pad);
    if (!padded.empty() && a <= padded.back().second) {
      padded.back().second = std::max(padded.back().second, b);
    } else {
      padded.emplace_back(a, b);
    }
  }

  Decomposition d;
  d.epsilon = opts.epsilon;
  d.n_t = g.n_t;
  d.kind = padded.empty() ? DecompositionCase::AllNeck : DecompositionCase::Mixed;
  int cursor = 0;
  for (const auto& [a, b] : padded) {
    d.necks.push_back(make_interval(g, cursor, a));
    d.bubbles.push_back(make_interval(g, a, b));
    cursor = b;
  }
  d.necks.push_back(make_interval(g, cursor, g.n_t - 1));
  return d;
}

double relative_residual(double value, double prediction) {
  if (prediction == 0.0) return std::abs(value);
  return std::abs(value - prediction) / std::abs(prediction);
}

bool NeckIdentityReport::bounds_pass() const {
  return std::all_of(bound_checks.begin(), bound_checks.end(),
                     [](const CheckReport& r) { return r.pass(); });
}

nlohmann::json NeckIdentityReport::to_json() const {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& r : bound_checks) checks.push_back(r.to_json());
  nlohmann::json na = nlohmann::json::array();
  for (const auto& z : neck_alpha) na.push_back(complex_json(z));
  return {{"alpha", complex_json(alpha)},
          {"alpha_drift", alpha_drift},
          {"neck_length", neck_length},
          {"total_neck_energy", total_neck_energy},
          {"total_neck_length", total_neck_length},
          {"predicted_energy", predicted_energy},
          {"predicted_length", predicted_length},
          {"residual_energy", residual_energy},
          {"residual_length", residual_length},
          {"neck_alpha", na},
          {"neck_alpha_deviation", neck_alpha_deviation},
          {"bound_checks", checks}};
}

NeckIdentityReport neck_identity(const MapField& f, const Decomposition& d,
                                 const InvariantOptions& opts) {
  const auto& g = f.grid();
  const auto mismatch = [] {
    return Error(ErrorCode::MismatchedDecomposition, "intervals do not tile the field's rows");
  };
  if (d.n_t != g.n_t || d.necks.size() != d.bubbles.size() + 1) throw mismatch();
  int cursor = 0;
  for (std::size_t k = 0; k < d.necks.size(); ++k) {
    const Interval& n = d.necks[k];
    if (n.first_row != cursor || n.last_row < n.first_row) throw mismatch();
    cursor = n.last_row;
    if (k < d.bubbles.size()) {
      const Interval& b = d.bubbles[k];
      if (b.first_row != cursor || b.last_row <= b.first_row) throw mismatch();
      cursor = b.last_row;
    }
  }
  if (cursor != g.n_t - 1) throw mismatch();

  const RowStats s = row_stats(f, opts.order);
  const AlphaResult full = alpha(g, s, RowRange{0, g.n_t - 1});
  NeckIdentityReport r;
  r.alpha = full.alpha;
  r.alpha_drift = full.drift;
  for (const Interval& n : d.necks) {
    if (n.last_row == n.first_row) continue;
    const RowRange range{n.first_row, n.last_row};
    r.neck_length += n.length();
    r.total_neck_energy += energy(g, s, range);
    r.total_neck_length += average_length(g, s, range);
    const Complex a = alpha(g, s, range).alpha;
    r.neck_alpha.push_back(a);
    r.neck_alpha_deviation = std::max(r.neck_alpha_deviation, std::abs(a - r.alpha));
    CheckReport checks = check_neck_bounds(f, n.t_a, n.t_b, opts);
    checks.name = "neck_bounds[" + std::to_string(n.t_a) + ", " + std::to_string(n.t_b) + "]";
    r.bound_checks.push_back(std::move(checks));
  }
  const double re = std::abs(r.alpha.real());
  r.predicted_energy = 0.5 * re * r.neck_length;
  r.predicted_length = std::sqrt(re) * r.neck_length;
  r.residual_energy = relative_residual(r.total_neck_energy, r.predicted_energy);
  r.residual_length = relative_residual(r.total_neck_length, r.predicted_length);
  return r;
}

const char* to_string(Trend t) {
  switch (t) {
    case Trend::Zero: return "zero";
    case Trend::Constant: return "constant";
    case Trend::ToZero: return "to_zero";
    case Trend::ToInfinity: return "to_infinity";
  }
  return "unknown";
}

Trend classify_trend(const std::vector<double>& inv_l, const std::vector<double>& values) {
  if (values.size() != inv_l.size() || values.size() < 2) {
    throw Error(ErrorCode::TooFewSamples, "trend needs at least two samples");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*hi <= kZeroTrend) return Trend::Zero;
  if ((*hi - *lo) / *hi <= kConstantSpread) return Trend::Constant;
  // Least-squares slope of log(value) against log(1/l), over positive values.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) continue;
    const double x = std::log(inv_l[k]);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return Trend::ToZero;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return slope > 0.0 ? Trend::ToInfinity : Trend::ToZero;
}

nlohmann::json CompactnessVerdict::to_json() const {
  return {{"l", l},
          {"energy_scale", energy_scale},
          {"length_scale", length_scale},
          {"energy_trend", to_string(energy_trend)},
          {"length_trend", to_string(length_trend)},
          {"regime", regime},
          {"w12_modulo_bubbles", w12_modulo_bubbles},
          {"c0_modulo_bubbles", c0_modulo_bubbles}};
}

CompactnessVerdict classify_compactness(std::vector<FamilyMember> members) {
  if (members.size() < 3) throw Error(ErrorCode::TooFewSamples, "need at least three members");
  std::stable_sort(members.begin(), members.end(),
                   [](const FamilyMember& a, const FamilyMember& b) { return a.l > b.l; });
  CompactnessVerdict v;
  std::vector<double> inv_l;
  for (const auto& m : members) {
    const double re = std::abs(m.report.alpha.real());
    v.l.push_back(m.l);
    inv_l.push_back(1.0 / m.l);
    v.energy_scale.push_back(re * kPi * kPi / m.l);
    v.length_scale.push_back(std::sqrt(re) * kPi * kPi / m.l);
  }
  v.energy_trend = classify_trend(inv_l, v.energy_scale);
  v.length_trend = classify_trend(inv_l, v.length_scale);
  v.regime = regime_of(v.energy_trend, v.length_trend);
  v.w12_modulo_bubbles = v.energy_trend == Trend::Zero || v.energy_trend == Trend::ToZero;
  v.c0_modulo_bubbles = v.length_trend == Trend::Zero || v.length_trend == Trend::ToZero;
  return v;
}

}  // namespace necklab
