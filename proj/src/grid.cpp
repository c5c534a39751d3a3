#include "necklab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "necklab/error.hpp"

namespace necklab {

CylinderGrid CylinderGrid::make(double t_min, double t_max, int n_t, int n_th) {
  if (!(t_max - t_min > 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "cylinder must be longer than 2");
  }
  if (n_t < 8 || n_th < 8) {
    throw Error(ErrorCode::InvalidArgument, "grid needs at least 8 nodes in each direction");
  }
  CylinderGrid g;
  g.t_min = t_min;
  g.t_max = t_max;
  g.n_t = n_t;
  g.n_th = n_th;
  g.h_t = (t_max - t_min) / (n_t - 1);
  g.h_th = 2.0 * std::numbers::pi / n_th;
  return g;
}

double CylinderGrid::theta(int j) const { return wrap(j) * h_th; }

int CylinderGrid::nearest_row(double t) const {
  const long i = std::lround((t - t_min) / h_t);
  if (i < 0) return 0;
  if (i > n_t - 1) return n_t - 1;
  return static_cast<int>(i);
}

RowRange snap_range(const CylinderGrid& grid, double t_a, double t_b) {
  const double slack = 1e-9 * (1.0 + std::abs(grid.t_min) + std::abs(grid.t_max));
  if (!(t_a < t_b) || t_a < grid.t_min - slack || t_b > grid.t_max + slack) {
    throw Error(ErrorCode::EmptyRange, "range [" + std::to_string(t_a) + ", " +
                                           std::to_string(t_b) + "] is not inside the grid");
  }
  RowRange r{grid.nearest_row(t_a), grid.nearest_row(t_b)};
  if (r.last - r.first < 1) {
    throw Error(ErrorCode::EmptyRange, "fewer than two grid rows in range");
  }
  return r;
}

MapField::MapField(CylinderGrid grid, TargetManifold target, std::vector<double> values)
    : grid_(grid), target_(std::move(target)), values_(std::move(values)) {
  if (values_.size() != grid_.nodes() * static_cast<std::size_t>(target_.ambient_dim())) {
    throw Error(ErrorCode::InvalidArgument, "field size does not match grid and target");
  }
  validate();
}

MapField MapField::sample(const CylinderGrid& grid, const TargetManifold& target,
                          const std::function<Vec(double, double)>& fn) {
  const int k = target.ambient_dim();
  std::vector<double> values(grid.nodes() * k);
  for (int i = 0; i < grid.n_t; ++i) {
    for (int j = 0; j < grid.n_th; ++j) {
      const Vec p = target.project(fn(grid.t(i), grid.theta(j)));
      std::copy(p.data(), p.data() + k, values.begin() + grid.node(i, j) * k);
    }
  }
  return MapField(grid, target, std::move(values));
}

Vec MapField::vec(int i, int j) const {
  const auto s = at(i, j);
  return Eigen::Map<const Vec>(s.data(), dim());
}

void MapField::validate(double tol) const {
  for (int i = 0; i < grid_.n_t; ++i) {
    for (int j = 0; j < grid_.n_th; ++j) {
      if (!target_.contains(at(i, j), tol)) {
        throw Error(ErrorCode::InvalidArgument, "field value at node (" + std::to_string(i) +
                                                    ", " + std::to_string(j) +
                                                    ") is not on the target");
      }
    }
  }
}

namespace {

// Writes the displacement u(b) - u(a) into out.
class Differ {
 public:
  explicit Differ(const MapField& f) : f_(f), sphere_(f.target().kind() == TargetManifold::Kind::UnitSphere) {}

  void operator()(int ia, int ja, int ib, int jb, double* out) const {
    const auto a = f_.at(ia, ja);
    const auto b = f_.at(ib, jb);
    if (sphere_) {
      for (std::size_t k = 0; k < a.size(); ++k) out[k] = b[k] - a[k];
    } else {
      f_.target().displacement(a, b, {out, a.size()});
    }
  }

 private:
  const MapField& f_;
  bool sphere_;
};

}  // namespace

Partials partials(const MapField& f, DiffOrder order) {
  const auto& g = f.grid();
  const int k = f.dim();
  Partials p;
  p.dim = k;
  p.du_t.assign(g.nodes() * k, 0.0);
  p.du_th.assign(g.nodes() * k, 0.0);
  const Differ diff(f);
  std::vector<double> d1(k), d2(k), d3(k), d4(k);

  for (int i = 0; i < g.n_t; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      double* out_t = p.du_t.data() + g.node(i, j) * k;
      double* out_th = p.du_th.data() + g.node(i, j) * k;

      // t direction
      if (i == 0) {
        diff(0, j, 1, j, d1.data());
        diff(0, j, 2, j, d2.data());
        for (int c = 0; c < k; ++c) out_t[c] = (4.0 * d1[c] - d2[c]) / (2.0 * g.h_t);
      } else if (i == g.n_t - 1) {
        diff(i, j, i - 1, j, d1.data());
        diff(i, j, i - 2, j, d2.data());
        for (int c = 0; c < k; ++c) out_t[c] = -(4.0 * d1[c] - d2[c]) / (2.0 * g.h_t);
      } else if (order == DiffOrder::Fourth && i >= 2 && i <= g.n_t - 3) {
        diff(i, j, i + 1, j, d1.data());
        diff(i, j, i - 1, j, d2.data());
        diff(i, j, i + 2, j, d3.data());
        diff(i, j, i - 2, j, d4.data());
        for (int c = 0; c < k; ++c) {
          out_t[c] = (8.0 * (d1[c] - d2[c]) - (d3[c] - d4[c])) / (12.0 * g.h_t);
        }
      } else {
        diff(i - 1, j, i + 1, j, d1.data());
        for (int c = 0; c < k; ++c) out_t[c] = d1[c] / (2.0 * g.h_t);
      }

      // θ direction, periodic
      if (order == DiffOrder::Fourth) {
        diff(i, j, i, g.wrap(j + 1), d1.data());
        diff(i, j, i, g.wrap(j - 1), d2.data());
        diff(i, j, i, g.wrap(j + 2), d3.data());
        diff(i, j, i, g.wrap(j - 2), d4.data());
        for (int c = 0; c < k; ++c) {
          out_th[c] = (8.0 * (d1[c] - d2[c]) - (d3[c] - d4[c])) / (12.0 * g.h_th);
        }
      } else {
        diff(i, g.wrap(j - 1), i, g.wrap(j + 1), d1.data());
        for (int c = 0; c < k; ++c) out_th[c] = d1[c] / (2.0 * g.h_th);
      }
    }
  }
  return p;
}

double slice_integral(const CylinderGrid& grid, std::span<const double> g, int i_t) {
  if (i_t < 0 || i_t >= grid.n_t) {
    throw Error(ErrorCode::InvalidArgument, "slice index out of range");
  }
  double sum = 0.0;
  for (int j = 0; j < grid.n_th; ++j) sum += g[grid.node(i_t, j)];
  return sum * grid.h_th;
}

double integrate_rows(const CylinderGrid& grid, std::span<const double> row_values, RowRange range) {
  if (range.last - range.first < 1) {
    throw Error(ErrorCode::EmptyRange, "fewer than two grid rows in range");
  }
  double sum = 0.5 * (row_values[range.first] + row_values[range.last]);
  for (int i = range.first + 1; i < range.last; ++i) sum += row_values[i];
  return sum * grid.h_t;
}

double integrate(const CylinderGrid& grid, std::span<const double> g, double t_a, double t_b) {
  const RowRange range = snap_range(grid, t_a, t_b);
  std::vector<double> rows(grid.n_t, 0.0);
  for (int i = range.first; i <= range.last; ++i) rows[i] = slice_integral(grid, g, i);
  return integrate_rows(grid, rows, range);
}

}  // namespace necklab
