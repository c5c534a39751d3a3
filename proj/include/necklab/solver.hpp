#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "necklab/grid.hpp"

namespace necklab {

/// Dirichlet data on the two boundary circles, n_th·K values each.
struct BoundaryData {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoundaryData from_field(const MapField& f);
  void validate(const CylinderGrid& grid, const TargetManifold& target) const;
};

enum class SolveMethod { Flow, Newton };

struct SolveConfig {
  /// Explicit step. Zero selects 0.2·min(h_t, h_θ)².
  double dt = 0.0;
  double tol_tension = 1e-8;
  int max_iters = 20000;
  int log_every = 10;
  SolveMethod method = SolveMethod::Newton;
  /// Write a field file every `checkpoint_every` iterations into
  /// `checkpoint_dir` when both are set.
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;

  double step(const CylinderGrid& grid) const;
  /// Throws InvalidArgument for an unstable step or a nonpositive tolerance.
  void validate(const CylinderGrid& grid) const;
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  std::vector<std::pair<int, double>> energy_history;
  bool converged = false;
};

struct SolveResult {
  MapField field;
  SolveReport report;
};

/// τ = Δ_h u + A(u)(∇u, ∇u) per node, five-point Laplacian with periodic θ.
/// Same layout as the field values; boundary rows are zero.
std::vector<double> tension(const MapField& f);

/// sup over interior nodes of |P_u τ|, the part of the tension tangent to
/// the target. It vanishes exactly at critical points of discrete_energy.
double tension_residual(const MapField& f);

/// Edge-based Dirichlet energy whose gradient is −h_t·h_θ·Δ_h u:
/// ½Σ|δ_t u|²·h_θ/h_t over t-edges plus ½Σ|δ_θ u|²·h_t/h_θ over θ-edges,
/// with the boundary rows weighted ½.
double discrete_energy(const MapField& f);

/// One explicit Euler step u ← project(u + dt·P_u τ) on the interior rows.
MapField flow_step(const MapField& f, double dt);

/// Column-wise shortest geodesic between the two boundary circles.
MapField interpolate_boundary(const CylinderGrid& grid, const TargetManifold& target,
                              const BoundaryData& bc);

/// Relax `f0` to a discrete harmonic map with the given Dirichlet rows.
SolveResult solve(const MapField& f0, const BoundaryData& bc, const SolveConfig& cfg);

/// |(E(f ⊕ hv) − E(f ⊖ hv))/(2h) + ⟨τ, v⟩| / max(1, |⟨τ, v⟩|), with
/// ⟨a, b⟩ = h_t·h_θ·Σ_interior a·b and ⊕ adding then projecting.
double energy_gradient_check(const MapField& f, std::span<const double> v, double h);

}  // namespace necklab
