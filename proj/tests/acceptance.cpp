// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every line passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "necklab/collar.hpp"
#include "necklab/decompose.hpp"
#include "necklab/fields.hpp"
#include "necklab/harness.hpp"
#include "necklab/invariants.hpp"
#include "necklab/solver.hpp"

using namespace necklab;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent high-precision evaluations of the closed forms.
constexpr double kGeodesicEnergy = 7.85398163397448309616;   // π·a²·Λ, a = 0.5, Λ = 10
constexpr double kGeodesicLength = 12.5331413731550025121;   // √(2π)·a·Λ
constexpr double kGeodesicAlpha = 1.57079632679489661923;    // 2π·a²
constexpr double kBubbleEnergy = 12.5652296414727393387;     // 4π·tanh 5
constexpr double kSubcollarT1 = 3.14421392612890377798;      // l = 0.1, δ = asinh 1

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel(double value, double ref) { return std::abs(value - ref) / std::abs(ref); }

struct Shared {
  std::vector<MapField> solved;  // every converged solve, for the lemma suite
  std::vector<std::string> solved_names;
  std::vector<DegenerationResult> families;
  std::vector<std::string> family_csv;
};

SolveConfig tight(double tol) {
  SolveConfig c;
  c.tol_tension = tol;
  c.max_iters = 200;
  return c;
}

// Slice drift is measured with the five-point stencil, as for the bubble below;
// the second-order figure is printed alongside it.
Outcome alpha_conservation(Shared& sh) {
  double drift[2] = {0, 0}, drift2[2] = {0, 0}, alpha_abs[2] = {0, 0};
  bool converged = true;
  const int sizes[2][2] = {{512, 128}, {256, 64}};
  for (int k = 0; k < 2; ++k) {
    const auto grid = CylinderGrid::make(0.0, 4.0, sizes[k][0], sizes[k][1]);
    const MapField f0 = wobbly_geodesic(grid, 0.2, 0.03);
    const SolveResult r = solve(f0, BoundaryData::from_field(f0), tight(1e-8));
    converged = converged && r.report.converged;
    const AlphaResult a = alpha(r.field, DiffOrder::Fourth);
    drift[k] = a.drift;
    drift2[k] = alpha(r.field, DiffOrder::Second).drift;
    alpha_abs[k] = std::abs(a.alpha);
    if (r.report.converged) {
      sh.solved.push_back(r.field);
      sh.solved_names.push_back(fmt("wobbly %dx%d", sizes[k][0], sizes[k][1]));
    }
  }
  const double ratio = drift[1] / drift[0];
  const bool pass = converged && drift[0] <= 1e-3 * alpha_abs[0] && ratio >= 3.0;
  return {pass, fmt("|alpha|=%.6g drift(512x128)=%.3g (bound %.3g) drift(256x64)=%.3g ratio=%.2f; "
                    "second-order stencil: %.3g / %.3g",
                    alpha_abs[0], drift[0], 1e-3 * alpha_abs[0], drift[1], ratio, drift2[0],
                    drift2[1])};
}

Outcome geodesic_neck(Shared& sh) {
  const auto grid = CylinderGrid::make(0.0, 10.0, 1001, 16);
  const auto target = TargetManifold::unit_sphere(3);
  const MapField f0 = perturbed_geodesic(grid, target, 0.5, 0.2, 7);
  const SolveResult r = solve(f0, BoundaryData::from_field(f0), tight(1e-10));
  const auto [p, v] = geodesic_frame(target);
  const MapField oracle = geodesic_ansatz(grid, target, p, v, 0.5);
  double dist = 0.0;
  for (int i = 0; i < grid.n_t; ++i) {
    for (int j = 0; j < grid.n_th; ++j) {
      dist = std::max(dist, target.distance(r.field.at(i, j), oracle.at(i, j)));
    }
  }
  const double e = energy(r.field, 0.0, 10.0);
  const double len = average_length(r.field, 0.0, 10.0);
  const Complex a = alpha(r.field).alpha;
  if (r.report.converged) {
    sh.solved.push_back(r.field);
    sh.solved_names.push_back("geodesic neck");
  }
  const bool pass = r.report.converged && rel(e, kGeodesicEnergy) <= 1e-3 &&
                    rel(len, kGeodesicLength) <= 1e-3 &&
                    std::abs(a - Complex(kGeodesicAlpha, 0.0)) <= 1e-3 * kGeodesicAlpha;
  return {pass, fmt("E=%.6f (rel %.1e) L=%.6f (rel %.1e) alpha=%.6f%+.1ei (rel %.1e) "
                    "max dist to c(at)=%.1e iters=%d",
                    e, rel(e, kGeodesicEnergy), len, rel(len, kGeodesicLength), a.real(), a.imag(),
                    std::abs(a - kGeodesicAlpha) / kGeodesicAlpha, dist, r.report.iterations)};
}

Outcome conformal_bubble_check() {
  const auto grid = CylinderGrid::make(-5.0, 5.0, 1024, 128);
  const MapField f = conformal_bubble(grid);
  const double e = energy(f, -5.0, 5.0);
  const double a4 = std::abs(alpha(f, DiffOrder::Fourth).alpha);
  const double a2 = std::abs(alpha(f, DiffOrder::Second).alpha);
  const bool pass = rel(e, kBubbleEnergy) <= 1e-3 && a4 <= 1e-6 * e;
  return {pass, fmt("E=%.6f (rel %.1e) |alpha| fourth-order=%.2e second-order=%.2e bound=%.2e", e,
                    rel(e, kBubbleEnergy), a4, a2, 1e-6 * e)};
}

Outcome collar_identities() {
  bool area_ok = true, core_ok = true, transform_ok = true;
  std::string areas;
  for (double l : {0.01, 0.1, 0.5}) {
    const double closed = collar_area(l);
    const double quad = collar_area_quadrature(l);
    area_ok = area_ok && rel(quad, closed) <= 1e-6;
    areas += fmt(" l=%.2f closed=%.9f quad=%.9f ratio=%.9f;", l, closed, quad, quad / closed);
    const CollarSpec c = CollarSpec::make(l);
    core_ok = core_ok && std::abs(injrad(l, c.core_t) - l / 2) <= 2 * 0x1p-52 * l;
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < 1000; ++s) {
    const double l = 0.01 + 0.5 * u01(rng);
    const double a = std::atan(std::sinh(l / 2));
    const double phi = a + (kPi - 2 * a) * u01(rng);
    const double r = std::exp(l * u01(rng));
    const CylinderPoint pt = fermi_to_cylinder(l, r, phi);
    worst = std::max(worst, std::abs(injrad_fermi(l, phi) - injrad(l, pt.t)));
  }
  transform_ok = worst <= 1e-12;
  const double t1 = subcollar(0.1, std::asinh(1.0)).t1;
  const bool t1_ok = std::abs(t1 - kSubcollarT1) <= 1e-9;
  return {area_ok && core_ok && transform_ok && t1_ok,
          fmt("area %s [%s ] injrad(core)=l/2 %s; transform max dev=%.1e %s; T1=%.12f %s",
              area_ok ? "ok" : "MISMATCH", areas.c_str(), core_ok ? "ok" : "FAIL", worst,
              transform_ok ? "ok" : "FAIL", t1, t1_ok ? "ok" : "FAIL")};
}

Outcome lemma_suite_all(const Shared& sh) {
  int evaluated = 0, skipped = 0, failed = 0, gated_convexity = 0;
  std::string failures;
  for (std::size_t k = 0; k < sh.solved.size(); ++k) {
    const CheckReport r = lemma_suite(sh.solved[k]);
    for (const auto& c : r.checks) {
      if (!c.precondition_met) {
        ++skipped;
        continue;
      }
      ++evaluated;
      if (c.name == "theta_second_derivative") ++gated_convexity;
      if (!c.pass) {
        ++failed;
        failures += fmt(" %s/%s(%.3g>%.3g)", sh.solved_names[k].c_str(), c.name.c_str(), c.lhs, c.rhs);
      }
    }
  }
  int member_checks = 0;
  for (const auto& fam : sh.families) {
    for (const auto& row : fam.rows) {
      ++member_checks;
      if (!row.bounds_pass) {
        ++failed;
        failures += fmt(" member l=%.3f neck bounds", row.l);
      }
    }
  }
  const bool pass = failed == 0 && gated_convexity > 0 && !sh.solved.empty();
  return {pass, fmt("%zu solves: %d checks evaluated, %d gated off, theta convexity evaluated on %d; "
                    "%d family members' neck bounds; violations=%d%s",
                    sh.solved.size(), evaluated, skipped, gated_convexity, member_checks, failed,
                    failures.c_str())};
}

std::vector<double> smooth_tangent(const MapField& f, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  const auto& g = f.grid();
  const int k = f.dim();
  double c[3][3][3];
  for (auto& a : c)
    for (auto& b : a)
      for (double& x : b) x = n01(rng);
  std::vector<double> v(f.values().size(), 0.0);
  for (int i = 1; i < g.n_t - 1; ++i) {
    const double s = (g.t(i) - g.t_min) / g.length();
    for (int j = 0; j < g.n_th; ++j) {
      const double th = g.theta(j);
      double* out = v.data() + g.node(i, j) * k;
      for (int q = 0; q < k; ++q) {
        for (int m = 0; m < 3; ++m) {
          out[q] += std::sin((m + 1) * kPi * s) * (c[q][m][0] + c[q][m][1] * std::cos(th) +
                                                   c[q][m][2] * std::sin(2 * th));
        }
      }
      f.target().tangent_project(f.at(i, j), {out, static_cast<std::size_t>(k)});
    }
  }
  return v;
}

Outcome energy_gradient() {
  const auto grid = CylinderGrid::make(0.0, 4.0, 256, 64);
  const MapField f = wobbly_geodesic(grid, 0.2, 0.03);
  std::mt19937_64 rng(5);
  double worst = 0.0, worst_ratio_dev = 0.0;
  for (int s = 0; s < 10; ++s) {
    const auto v = smooth_tangent(f, rng);
    worst = std::max(worst, energy_gradient_check(f, v, 1e-5));
    const double r = energy_gradient_check(f, v, 2e-4) / energy_gradient_check(f, v, 1e-4);
    worst_ratio_dev = std::max(worst_ratio_dev, std::abs(r / 4.0 - 1.0));
  }
  return {worst <= 1e-6 && worst_ratio_dev <= 0.2,
          fmt("max deviation(h=1e-5)=%.2e; h=2e-4 vs 1e-4 ratio within %.1f%% of 4", worst,
              100 * worst_ratio_dev)};
}

ExperimentConfig family_config(DisplacementRule rule) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::Degeneration;
  cfg.degeneration.l_schedule = {0.2, 0.1, 0.05, 0.025};
  cfg.degeneration.rule = rule;
  cfg.solver.max_iters = 100;
  cfg.seed = 3;
  return cfg;
}

const std::vector<std::pair<std::string, DisplacementRule>>& families() {
  static const std::vector<std::pair<std::string, DisplacementRule>> f = {
      {"slope c/sqrt(Lambda)", DisplacementRule::power_law(1.0, 0.5)},
      {"power p=3/4", DisplacementRule::power_law(1.0, 0.75)},
      {"fixed displacement D=1", DisplacementRule::fixed_displacement(1.0)},
      {"power p=3/2", DisplacementRule::power_law(1.0, 1.5)}};
  return f;
}

Outcome degeneration(Shared& sh) {
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < families().size(); ++k) {
    const auto& [name, rule] = families()[k];
    const DegenerationResult res = run_degeneration(family_config(rule), 1);
    const int expected = static_cast<int>(k) + 1;
    const int regime = res.verdict ? res.verdict->regime : 0;
    double worst_e = 0.0, worst_l = 0.0, literal_l = 0.0;
    bool rows_ok = true;
    for (const auto& r : res.rows) {
      rows_ok = rows_ok && r.ok();
      worst_e = std::max(worst_e, relative_residual(r.e_neck, r.energy_scale * r.neck_fraction));
      worst_l = std::max(worst_l, relative_residual(r.l_neck, r.predicted_length));
      literal_l = std::max(literal_l, r.l_neck / (r.length_scale * r.neck_fraction));
    }
    const double im_last = res.rows.back().im_scale;
    const bool ok = rows_ok && regime == expected && worst_e <= 0.05 && worst_l <= 0.05 &&
                    im_last <= 1e-3;
    pass = pass && ok;
    detail += fmt("\n      %-24s regime %d (want %d) W12 %s C0 %s; E res %.1e, L res %.1e "
                  "(L / (sqrt|Re a| pi^2/l nu) = %.4f); |Im a| pi^2/l last=%.1e%s",
                  name.c_str(), regime, expected,
                  res.verdict && res.verdict->w12_modulo_bubbles ? "yes" : "no",
                  res.verdict && res.verdict->c0_modulo_bubbles ? "yes" : "no", worst_e, worst_l,
                  literal_l, im_last, rows_ok ? "" : " [row failure]");
    sh.family_csv.push_back(to_csv(res.rows));
    sh.families.push_back(res);
  }
  return {pass, detail};
}

Outcome segmentation() {
  const auto grid = CylinderGrid::make(-20.0, 20.0, 641, 64);
  const MapField f = neck_with_bubble(grid, 0.1);
  const Decomposition d = segment(f);
  const NeckIdentityReport r = neck_identity(f, d);
  const InvariantOptions opts;
  const double tol = 1e-3 * std::max(std::abs(r.alpha), opts.eps0);
  const bool one = d.bubbles.size() == 1 && d.bubbles[0].t_a < 0.0 && d.bubbles[0].t_b > 0.0;
  const bool pass = one && r.residual_energy <= 0.05 && r.neck_alpha_deviation <= tol;
  return {pass, fmt("bubbles=%zu first=[%.3f, %.3f]; residual E=%.2e L=%.2e; neck alpha dev=%.2e "
                    "(tol %.1e)",
                    d.bubbles.size(), d.bubbles.empty() ? 0.0 : d.bubbles[0].t_a,
                    d.bubbles.empty() ? 0.0 : d.bubbles[0].t_b, r.residual_energy,
                    r.residual_length, r.neck_alpha_deviation, tol)};
}

Outcome determinism(const Shared& sh) {
  bool same = sh.family_csv.size() == families().size();
  for (std::size_t k = 0; k < families().size() && same; ++k) {
    const DegenerationResult res = run_degeneration(family_config(families()[k].second), 8);
    same = to_csv(res.rows) == sh.family_csv[k];
  }
  return {same, same ? "threads 1 and 8 give byte-identical CSV for all four families"
                     : "CSV differs between thread counts"};
}

}  // namespace

int main() {
  Shared sh;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "alpha conservation", [&] { return alpha_conservation(sh); }},
      {2, "geodesic neck closed forms", [&] { return geodesic_neck(sh); }},
      {3, "conformal bubble", [] { return conformal_bubble_check(); }},
      {4, "collar identities", [] { return collar_identities(); }},
      {7, "degeneration regimes", [&] { return degeneration(sh); }},
      {5, "lemma suite", [&] { return lemma_suite_all(sh); }},
      {6, "energy gradient", [] { return energy_gradient(); }},
      {8, "segmentation", [] { return segmentation(); }},
      {9, "determinism", [&] { return determinism(sh); }},
  };
  bool all = true;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
