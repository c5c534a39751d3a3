#include "necklab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "necklab/error.hpp"

namespace necklab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kExactOscNodes = 4096;
constexpr int kOscSampleRows = 64;
constexpr int kOscSampleCols = 32;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double side_slack(double lhs, double rhs) {
  return 1e-6 * (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
}

Check make_check(std::string name, double lhs, double rhs, double slack) {
  Check c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = slack;
  c.pass = lhs <= rhs + slack;
  return c;
}

Check skipped(std::string name) {
  Check c;
  c.name = std::move(name);
  c.precondition_met = false;
  return c;
}

// Interior rows (those with an α sample) that fall inside `range`.
RowRange interior_part(const CylinderGrid& grid, RowRange range) {
  RowRange r{std::max(range.first, 1), std::min(range.last, grid.n_t - 2)};
  if (r.last < r.first) throw Error(ErrorCode::EmptyRange, "no interior rows in range");
  return r;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double integrate_sqrt(const CylinderGrid& grid, const std::vector<double>& rows, RowRange range) {
  std::vector<double> r(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) r[i] = std::sqrt(std::max(rows[i], 0.0));
  return integrate_rows(grid, r, range);
}

double sup_over(const std::vector<double>& v, RowRange range) {
  double s = 0.0;
  for (int i = range.first; i <= range.last; ++i) s = std::max(s, v[i]);
  return s;
}

}  // namespace

InvariantOptions InvariantOptions::from_json(const nlohmann::json& j) {
  InvariantOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key == "order") {
      const auto s = value.get<std::string>();
      if (s == "second") o.order = DiffOrder::Second;
      else if (s == "fourth") o.order = DiffOrder::Fourth;
      else throw Error(ErrorCode::ConfigError, "order must be 'second' or 'fourth'");
    } else if (key == "eps0") {
      o.eps0 = value.get<double>();
    } else if (key == "eps1") {
      o.eps1 = value.get<double>();
    } else if (key == "eps2") {
      o.eps2 = value.get<double>();
    } else if (key == "lemma_constant") {
      o.lemma_constant = value.get<double>();
    } else if (key == "theta_slack_constant") {
      o.theta_slack_constant = value.get<double>();
    } else {
      throw Error(ErrorCode::ConfigError, "unknown invariants key '" + key + "'");
    }
  }
  if (!(o.eps0 > 0 && o.eps1 > 0 && o.eps2 > 0 && o.lemma_constant > 0 &&
        o.theta_slack_constant >= 0)) {
    throw Error(ErrorCode::ConfigError, "invariant constants must be positive");
  }
  return o;
}

nlohmann::json Check::to_json() const {
  return {{"name", name}, {"lhs", lhs},   {"rhs", rhs},
          {"slack", slack}, {"pass", pass}, {"precondition_met", precondition_met}};
}

bool CheckReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void CheckReport::append(const CheckReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& c : checks) items.push_back(c.to_json());
  return {{"name", name}, {"pass", pass()}, {"checks", items}};
}

RowStats row_stats(const MapField& f, DiffOrder order) {
  const auto& g = f.grid();
  const Partials p = partials(f, order);
  RowStats s;
  s.ut2.assign(g.n_t, 0.0);
  s.uth2.assign(g.n_t, 0.0);
  s.cross.assign(g.n_t, 0.0);
  s.grad_sup.assign(g.n_t, 0.0);
  for (int i = 0; i < g.n_t; ++i) {
    double a = 0.0, b = 0.0, c = 0.0, sup = 0.0;
    for (int j = 0; j < g.n_th; ++j) {
      const std::size_t n = g.node(i, j);
      const double tt = dot(p.t_at(n), p.t_at(n));
      const double hh = dot(p.th_at(n), p.th_at(n));
      a += tt;
      b += hh;
      c += dot(p.t_at(n), p.th_at(n));
      sup = std::max(sup, tt + hh);
    }
    s.ut2[i] = a * g.h_th;
    s.uth2[i] = b * g.h_th;
    s.cross[i] = c * g.h_th;
    s.grad_sup[i] = std::sqrt(sup);
  }
  return s;
}

double HopfField::max_abs() const {
  double m = 0.0;
  for (const auto& z : values) m = std::max(m, std::abs(z));
  return m;
}

double energy(const CylinderGrid& grid, const RowStats& s, RowRange range) {
  std::vector<double> d(grid.n_t);
  for (int i = 0; i < grid.n_t; ++i) d[i] = s.density(i);
  return 0.5 * integrate_rows(grid, d, range);
}

double energy(const MapField& f, double t_a, double t_b, DiffOrder order) {
  const RowRange range = snap_range(f.grid(), t_a, t_b);
  return energy(f.grid(), row_stats(f, order), range);
}

ThetaProfile theta_profile(const MapField& f, DiffOrder order) {
  return {row_stats(f, order).uth2};
}

HopfField hopf(const MapField& f, DiffOrder order) {
  const auto& g = f.grid();
  const Partials p = partials(f, order);
  HopfField h;
  h.grid = g;
  h.values.reserve(static_cast<std::size_t>(g.n_t - 2) * g.n_th);
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      const std::size_t n = g.node(i, j);
      h.values.emplace_back(dot(p.t_at(n), p.t_at(n)) - dot(p.th_at(n), p.th_at(n)),
                            -2.0 * dot(p.t_at(n), p.th_at(n)));
    }
  }
  return h;
}

double hopf_dbar(const HopfField& h) {
  const auto& g = h.grid;
  double sup = 0.0;
  for (int i = 2; i < g.n_t - 2; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      const Complex dt = (h.at(i + 1, j) - h.at(i - 1, j)) / (2.0 * g.h_t);
      const Complex dth = (h.at(i, g.wrap(j + 1)) - h.at(i, g.wrap(j - 1))) / (2.0 * g.h_th);
      sup = std::max(sup, std::abs(0.5 * (dt + Complex(0.0, 1.0) * dth)));
    }
  }
  return sup;
}

AlphaResult alpha(const CylinderGrid& grid, const RowStats& s, RowRange range) {
  const RowRange r = interior_part(grid, range);
  AlphaResult out;
  std::vector<double> re, im;
  for (int i = r.first; i <= r.last; ++i) {
    const Complex a = s.alpha_row(i);
    out.per_slice.push_back(a);
    re.push_back(a.real());
    im.push_back(a.imag());
  }
  out.alpha = {median(re), median(im)};
  for (const auto& a : out.per_slice) out.drift = std::max(out.drift, std::abs(a - out.alpha));
  return out;
}

AlphaResult alpha(const MapField& f, DiffOrder order) {
  const auto& g = f.grid();
  return alpha(g, row_stats(f, order), RowRange{0, g.n_t - 1});
}

AlphaResult alpha(const MapField& f, double t_a, double t_b, DiffOrder order) {
  const RowRange range = snap_range(f.grid(), t_a, t_b);
  return alpha(f.grid(), row_stats(f, order), range);
}

double average_length(const CylinderGrid& grid, const RowStats& s, RowRange range) {
  return integrate_sqrt(grid, s.ut2, range);
}

double average_length(const MapField& f, double t_a, double t_b, DiffOrder order) {
  const RowRange range = snap_range(f.grid(), t_a, t_b);
  return average_length(f.grid(), row_stats(f, order), range);
}

Oscillation oscillation(const MapField& f, double t_a, double t_b) {
  const auto& g = f.grid();
  const RowRange range = snap_range(g, t_a, t_b);
  std::vector<std::pair<int, int>> nodes;
  Oscillation out;
  if (static_cast<std::size_t>(range.rows()) * g.n_th <= kExactOscNodes) {
    for (int i = range.first; i <= range.last; ++i) {
      for (int j = 0; j < g.n_th; ++j) nodes.emplace_back(i, j);
    }
  } else {
    out.sampled = true;
    const int n_rows = std::min(kOscSampleRows, range.rows());
    const int n_cols = std::min(kOscSampleCols, g.n_th);
    std::vector<int> rows;
    for (int r = 0; r < n_rows; ++r) {
      rows.push_back(range.first + static_cast<int>(std::lround(
                                       static_cast<double>(r) * (range.rows() - 1) / (n_rows - 1))));
    }
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    for (int i : rows) {
      const bool end_row = i == range.first || i == range.last;
      if (end_row) {
        for (int j = 0; j < g.n_th; ++j) nodes.emplace_back(i, j);
      } else {
        for (int c = 0; c < n_cols; ++c) nodes.emplace_back(i, c * g.n_th / n_cols);
      }
    }
  }
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const auto pa = f.at(nodes[a].first, nodes[a].second);
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      out.value = std::max(out.value, f.target().distance(pa, f.at(nodes[b].first, nodes[b].second)));
    }
  }
  return out;
}

double window_energy(const CylinderGrid& grid, const RowStats& s, RowRange range) {
  const int m = std::max(1, static_cast<int>(std::lround(1.0 / grid.h_t)));
  if ((range.last - range.first) * grid.h_t < 1.0 - 1e-9 || range.last - range.first < m) {
    throw Error(ErrorCode::RangeTooShort, "window energy needs a range of length >= 1");
  }
  double best = 0.0;
  for (int i = range.first; i + m <= range.last; ++i) {
    double w = 0.5 * (s.density(i) + s.density(i + m));
    for (int k = i + 1; k < i + m; ++k) w += s.density(k);
    best = std::max(best, w * grid.h_t);
  }
  return best;
}

double window_energy(const MapField& f, double t_a, double t_b, DiffOrder order) {
  if (t_b - t_a < 1.0) throw Error(ErrorCode::RangeTooShort, "window energy needs t_b - t_a >= 1");
  const RowRange range = snap_range(f.grid(), t_a, t_b);
  return window_energy(f.grid(), row_stats(f, order), range);
}

NeckMetrics neck_metrics(const MapField& f, double t_a, double t_b, DiffOrder order) {
  const auto& g = f.grid();
  const RowRange range = snap_range(g, t_a, t_b);
  const RowStats s = row_stats(f, order);
  NeckMetrics m;
  m.t_a = g.t(range.first);
  m.t_b = g.t(range.last);
  m.energy = energy(g, s, range);
  m.avg_length = average_length(g, s, range);
  m.oscillation = oscillation(f, m.t_a, m.t_b).value;
  m.window_energy = (m.t_b - m.t_a) >= 1.0 - 1e-9 ? window_energy(g, s, range) : 0.0;
  return m;
}

CheckReport check_theta_convexity(const MapField& f, const InvariantOptions& opts) {
  const auto& g = f.grid();
  const RowStats s = row_stats(f, opts.order);
  CheckReport report{"theta_convexity", {}};

  // Longest run of rows where the gradient is below eps1.
  int best_first = 0, best_len = 0, first = 0;
  for (int i = 0; i <= g.n_t; ++i) {
    if (i < g.n_t && s.grad_sup[i] <= opts.eps1) continue;
    if (i - first > best_len) {
      best_len = i - first;
      best_first = first;
    }
    first = i + 1;
  }
  if (best_len < 3) {
    report.checks.push_back(skipped("theta_second_derivative"));
    report.checks.push_back(skipped("theta_power_integral_nu_1"));
    report.checks.push_back(skipped("theta_power_integral_nu_half"));
    return report;
  }
  const RowRange run{best_first, best_first + best_len - 1};
  const auto& theta = s.uth2;

  double worst = -std::numeric_limits<double>::infinity();
  double max_theta = 0.0;
  for (int i = run.first; i <= run.last; ++i) max_theta = std::max(max_theta, theta[i]);
  for (int i = run.first + 1; i < run.last; ++i) {
    const double second = (theta[i + 1] - 2.0 * theta[i] + theta[i - 1]) / (g.h_t * g.h_t);
    worst = std::max(worst, theta[i] - second);
  }
  const double h = std::max(g.h_t, g.h_th);
  report.checks.push_back(make_check("theta_second_derivative", worst, 0.0,
                                     opts.theta_slack_constant * h * h * max_theta));

  const double t1 = std::max(theta[run.first], 0.0);
  const double t2 = std::max(theta[run.last], 0.0);
  const double int1 = integrate_rows(g, theta, run);
  const double rhs1 = 2.0 * (t1 + t2);
  report.checks.push_back(make_check("theta_power_integral_nu_1", int1, rhs1, side_slack(int1, rhs1)));
  const double int_half = integrate_sqrt(g, theta, run);
  const double rhs_half = 4.0 * (std::sqrt(t1) + std::sqrt(t2));
  report.checks.push_back(make_check("theta_power_integral_nu_half", int_half, rhs_half,
                                     side_slack(int_half, rhs_half)));
  return report;
}

CheckReport check_neck_bounds(const MapField& f, double t_a, double t_b,
                              const InvariantOptions& opts) {
  const auto& g = f.grid();
  const RowRange range = snap_range(g, t_a, t_b);
  const RowStats s = row_stats(f, opts.order);
  CheckReport report{"neck_bounds", {}};

  const double span = (range.last - range.first) * g.h_t;
  std::vector<double> re(g.n_t), im(g.n_t);
  for (int i = 0; i < g.n_t; ++i) {
    re[i] = s.alpha_row(i).real();
    im[i] = s.alpha_row(i).imag();
  }
  const double re_alpha = integrate_rows(g, re, range) / span;
  const double im_alpha = integrate_rows(g, im, range) / span;
  const double e = energy(g, s, range);
  const double len = average_length(g, s, range);
  const double int_theta = integrate_rows(g, s.uth2, range);
  const double int_sqrt_theta = integrate_sqrt(g, s.uth2, range);

  auto push = [&](const char* name, double lhs, double rhs) {
    report.checks.push_back(make_check(name, lhs, rhs, side_slack(lhs, rhs)));
  };
  push("energy_vs_re_alpha", std::abs(e - 0.5 * std::abs(re_alpha) * span), int_theta);
  push("length_vs_re_alpha", std::abs(len - std::sqrt(std::abs(re_alpha)) * span), int_sqrt_theta);
  push("im_alpha", std::abs(im_alpha) * span, 2.0 * std::sqrt(2.0 * e) * std::sqrt(int_theta));

  bool small = false;
  double omega = 0.0;
  if (span >= 1.0 - 1e-9 && range.last - range.first >= std::lround(1.0 / g.h_t)) {
    omega = window_energy(g, s, range);
    small = omega <= opts.eps2;
  }
  if (small) {
    push("theta_integral_vs_window_energy", int_theta, opts.lemma_constant * omega);
    push("sqrt_theta_integral_vs_window_energy", int_sqrt_theta,
         opts.lemma_constant * std::sqrt(omega));
  } else {
    report.checks.push_back(skipped("theta_integral_vs_window_energy"));
    report.checks.push_back(skipped("sqrt_theta_integral_vs_window_energy"));
  }
  return report;
}

CheckReport check_osc_bound(const MapField& f, double t_a, double t_b,
                            const InvariantOptions& opts) {
  const auto& g = f.grid();
  const RowRange range = snap_range(g, t_a, t_b);
  const RowStats s = row_stats(f, opts.order);
  const double osc = oscillation(f, t_a, t_b).value;
  const double rhs = 4.0 * kPi * sup_over(s.grad_sup, range) +
                     average_length(g, s, range) / std::sqrt(2.0 * kPi);
  return {"oscillation_bound", {make_check("oscillation", osc, rhs, 1e-6 * rhs)}};
}

CheckReport lemma_suite(const MapField& f, const InvariantOptions& opts) {
  const auto& g = f.grid();
  CheckReport report{"lemma_suite", {}};
  report.append(check_theta_convexity(f, opts));
  report.append(check_neck_bounds(f, g.t_min, g.t_max, opts));
  report.append(check_osc_bound(f, g.t_min, g.t_max, opts));
  return report;
}

double conformal_energy_invariance(const MapField& f, const CollarSpec& collar) {
  const auto& g = f.grid();
  if (!collar.contains(g.t_min) || !collar.contains(g.t_max)) {
    throw Error(ErrorCode::OutOfCollar, "field is not defined inside the collar cylinder");
  }
  const Partials p = partials(f);
  std::vector<double> flat(g.n_t), curved(g.n_t);
  for (int i = 0; i < g.n_t; ++i) {
    const double t = std::clamp(g.t(i), collar.t_lo, collar.t_hi);
    const double lam2 = std::pow(conformal_factor(collar.l, t), 2);
    double a = 0.0, b = 0.0;
    for (int j = 0; j < g.n_th; ++j) {
      const std::size_t n = g.node(i, j);
      const double rho = dot(p.t_at(n), p.t_at(n)) + dot(p.th_at(n), p.th_at(n));
      a += rho;
      b += (rho / lam2) * lam2;
    }
    flat[i] = a * g.h_th;
    curved[i] = b * g.h_th;
  }
  const RowRange all{0, g.n_t - 1};
  const double e_flat = 0.5 * integrate_rows(g, flat, all);
  const double e_curved = 0.5 * integrate_rows(g, curved, all);
  if (e_flat == 0.0) return std::abs(e_curved);
  return std::abs(e_flat - e_curved) / e_flat;
}

}  // namespace necklab
