#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "necklab/manifold.hpp"

namespace necklab {

/// Uniform discretization of the flat cylinder [t_min, t_max] × S¹.
///
/// Rows are indexed by t (inclusive endpoints), columns by θ (periodic,
/// θ_j = j·2π/n_th). Node (i, j) lives at flat index i·n_th + j.
struct CylinderGrid {
  double t_min = 0.0;
  double t_max = 0.0;
  int n_t = 0;
  int n_th = 0;
  double h_t = 0.0;
  double h_th = 0.0;

  static CylinderGrid make(double t_min, double t_max, int n_t, int n_th);

  double t(int i) const { return t_min + i * h_t; }
  double theta(int j) const;
  int wrap(int j) const { return ((j % n_th) + n_th) % n_th; }
  std::size_t node(int i, int j) const {
    return static_cast<std::size_t>(i) * n_th + static_cast<std::size_t>(j);
  }
  std::size_t nodes() const { return static_cast<std::size_t>(n_t) * n_th; }
  /// Index of the grid row closest to t, clamped into [0, n_t-1].
  int nearest_row(double t) const;
  double length() const { return t_max - t_min; }
};

/// Inclusive range of grid rows [first, last].
struct RowRange {
  int first = 0;
  int last = 0;
  int rows() const { return last - first + 1; }
};

/// Snap [t_a, t_b] to grid rows. Throws EmptyRange when fewer than two rows
/// fall inside or the range leaves the grid.
RowRange snap_range(const CylinderGrid& grid, double t_a, double t_b);

/// A map from the cylinder into a target, sampled at the grid nodes.
/// Values are stored flat: node-major, K ambient coordinates per node.
class MapField {
 public:
  MapField(CylinderGrid grid, TargetManifold target, std::vector<double> values);

  /// Sample `fn(t, θ)` at every node; values are projected onto the target.
  static MapField sample(const CylinderGrid& grid, const TargetManifold& target,
                         const std::function<Vec(double, double)>& fn);

  const CylinderGrid& grid() const { return grid_; }
  const TargetManifold& target() const { return target_; }
  int dim() const { return target_.ambient_dim(); }

  std::span<const double> at(int i, int j) const {
    return {values_.data() + grid_.node(i, j) * dim(), static_cast<std::size_t>(dim())};
  }
  std::span<double> at(int i, int j) {
    return {values_.data() + grid_.node(i, j) * dim(), static_cast<std::size_t>(dim())};
  }
  Vec vec(int i, int j) const;

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }

  /// Throws InvalidArgument unless every node is finite and on the target
  /// within `tol`.
  void validate(double tol = 1e-8) const;

 private:
  CylinderGrid grid_;
  TargetManifold target_;
  std::vector<double> values_;
};

enum class DiffOrder { Second, Fourth };

/// Ambient partial derivatives, same layout as MapField values.
struct Partials {
  int dim = 0;
  std::vector<double> du_t;
  std::vector<double> du_th;

  std::span<const double> t_at(std::size_t node) const {
    return {du_t.data() + node * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> th_at(std::size_t node) const {
    return {du_th.data() + node * dim, static_cast<std::size_t>(dim)};
  }
};

/// Central differences in t and θ (θ periodic). The two boundary rows use
/// one-sided second-order stencils; with `DiffOrder::Fourth` the rows next
/// to them fall back to second-order central differences.
Partials partials(const MapField& f, DiffOrder order = DiffOrder::Second);

/// Rectangle rule Σ_j g[i_t, j]·h_θ over one slice of a per-node scalar.
double slice_integral(const CylinderGrid& grid, std::span<const double> g, int i_t);

/// Trapezoid rule in t of per-row values over the snapped rows.
double integrate_rows(const CylinderGrid& grid, std::span<const double> row_values, RowRange range);

/// ∫∫ g dt dθ over [t_a, t_b] × S¹ (rectangle in θ, trapezoid in t).
double integrate(const CylinderGrid& grid, std::span<const double> g, double t_a, double t_b);

}  // namespace necklab
