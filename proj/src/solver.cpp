#include "necklab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "necklab/error.hpp"
#include "necklab/field_io.hpp"

namespace necklab {

namespace {

constexpr double kDivergedNorm = 1e6;
constexpr int kMaxHalvings = 30;
constexpr int kFallbackFlowSteps = 20;

// u(b) − u(a), through the lattice on a torus.
void diff(const MapField& f, int ia, int ja, int ib, int jb, double* out) {
  const auto a = f.at(ia, ja);
  const auto b = f.at(ib, jb);
  if (f.target().kind() == TargetManifold::Kind::UnitSphere) {
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = b[k] - a[k];
  } else {
    f.target().displacement(a, b, {out, a.size()});
  }
}

// Five-point Laplacian at an interior node.
void laplacian(const MapField& f, int i, int j, std::vector<double>& out,
               std::vector<double>& scratch) {
  const auto& g = f.grid();
  const int k = f.dim();
  const double wt = 1.0 / (g.h_t * g.h_t);
  const double wth = 1.0 / (g.h_th * g.h_th);
  std::fill(out.begin(), out.end(), 0.0);
  const int nbr[4][2] = {{i + 1, j}, {i - 1, j}, {i, g.wrap(j + 1)}, {i, g.wrap(j - 1)}};
  for (int n = 0; n < 4; ++n) {
    diff(f, i, j, nbr[n][0], nbr[n][1], scratch.data());
    const double w = n < 2 ? wt : wth;
    for (int c = 0; c < k; ++c) out[c] += w * scratch[c];
  }
}

double sq_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

void check_same_grid(const MapField& f, std::span<const double> v) {
  if (v.size() != f.values().size()) {
    throw Error(ErrorCode::InvalidArgument, "perturbation size does not match field");
  }
}

// Move every interior node along its tangent displacement w (K per node).
MapField retract(const MapField& f, std::span<const double> w, double scale) {
  MapField out = f;
  const auto& g = f.grid();
  const int k = f.dim();
  const bool sphere = f.target().kind() == TargetManifold::Kind::UnitSphere;
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      auto u = out.at(i, j);
      const double* wn = w.data() + g.node(i, j) * k;
      if (sphere) {
        double len2 = 0.0;
        for (int c = 0; c < k; ++c) len2 += wn[c] * wn[c];
        const double len = scale * std::sqrt(len2);
        if (len > 1e-8) {
          const double cs = std::cos(len);
          const double sn = std::sin(len) / len * scale;
          for (int c = 0; c < k; ++c) u[c] = cs * u[c] + sn * wn[c];
        } else {
          for (int c = 0; c < k; ++c) u[c] += scale * wn[c];
        }
      } else {
        for (int c = 0; c < k; ++c) u[c] += scale * wn[c];
      }
      f.target().project_inplace(u);
    }
  }
  return out;
}

class NewtonSystem {
 public:
  explicit NewtonSystem(const MapField& f)
      : grid_(f.grid()), k_(f.dim()), d_(f.target().tangent_dim()),
        rows_(grid_.n_t - 2), n_(static_cast<Eigen::Index>(rows_) * grid_.n_th * d_) {}

  // Solve for the tangent update; returns ambient displacements per node, or
  // nothing when the linear solve fails.
  std::optional<std::vector<double>> step(const MapField& f) {
    const auto& g = grid_;
    const TargetManifold& target = f.target();
    const bool sphere = target.kind() == TargetManifold::Kind::UnitSphere;
    const double wt = 1.0 / (g.h_t * g.h_t);
    const double wth = 1.0 / (g.h_th * g.h_th);

    frames_.resize(static_cast<std::size_t>(rows_) * g.n_th);
    for (int i = 1; i < g.n_t - 1; ++i) {
      for (int j = 0; j < g.n_th; ++j) frames_[slot(i, j)] = target.tangent_frame(f.at(i, j));
    }

    Eigen::VectorXd rhs(n_);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n_) * d_ * 5);
    std::vector<double> lap(k_), scratch(k_);
    for (int i = 1; i < g.n_t - 1; ++i) {
      for (int j = 0; j < g.n_th; ++j) {
        const auto& e = frames_[slot(i, j)];
        laplacian(f, i, j, lap, scratch);
        const Eigen::Map<const Vec> lap_v(lap.data(), k_);
        const Eigen::Map<const Vec> u(f.at(i, j).data(), k_);
        const Eigen::Index row0 = index(i, j);
        rhs.segment(row0, d_) = e.transpose() * lap_v;
        const double shift = sphere ? u.dot(lap_v) : 0.0;
        const Eigen::MatrixXd self = (2.0 * wt + 2.0 * wth) * e.transpose() * e;
        for (int a = 0; a < d_; ++a) {
          for (int b = 0; b < d_; ++b) {
            trip.emplace_back(row0 + a, row0 + b, self(a, b) + (a == b ? shift : 0.0));
          }
        }
        const int nbr[4][2] = {{i + 1, j}, {i - 1, j}, {i, g.wrap(j + 1)}, {i, g.wrap(j - 1)}};
        for (int m = 0; m < 4; ++m) {
          const int ni = nbr[m][0];
          if (ni < 1 || ni > g.n_t - 2) continue;
          const double w = m < 2 ? wt : wth;
          const Eigen::MatrixXd block = -w * e.transpose() * frames_[slot(ni, nbr[m][1])];
          const Eigen::Index col0 = index(ni, nbr[m][1]);
          for (int a = 0; a < d_; ++a) {
            for (int b = 0; b < d_; ++b) trip.emplace_back(row0 + a, col0 + b, block(a, b));
          }
        }
      }
    }
    Eigen::SparseMatrix<double> a(n_, n_);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    std::optional<Eigen::VectorXd> xi = solve_ldlt(a, rhs);
    if (!xi) xi = solve_lu(a, rhs);
    if (!xi) return std::nullopt;

    std::vector<double> w(g.nodes() * k_, 0.0);
    for (int i = 1; i < g.n_t - 1; ++i) {
      for (int j = 0; j < g.n_th; ++j) {
        const Vec amb = frames_[slot(i, j)] * xi->segment(index(i, j), d_);
        std::copy(amb.data(), amb.data() + k_, w.begin() + g.node(i, j) * k_);
      }
    }
    return w;
  }

 private:
  std::size_t slot(int i, int j) const {
    return static_cast<std::size_t>(i - 1) * grid_.n_th + static_cast<std::size_t>(j);
  }
  Eigen::Index index(int i, int j) const { return static_cast<Eigen::Index>(slot(i, j)) * d_; }

  static bool accurate(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& b) {
    if (!x.allFinite()) return false;
    return (a * x - b).norm() <= 1e-8 * std::max(1.0, b.norm());
  }

  std::optional<Eigen::VectorXd> solve_ldlt(const Eigen::SparseMatrix<double>& a,
                                            const Eigen::VectorXd& b) {
    if (!ldlt_analyzed_) {
      ldlt_.analyzePattern(a);
      ldlt_analyzed_ = true;
    }
    ldlt_.factorize(a);
    if (ldlt_.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd x = ldlt_.solve(b);
    if (!accurate(a, x, b)) return std::nullopt;
    return x;
  }

  std::optional<Eigen::VectorXd> solve_lu(const Eigen::SparseMatrix<double>& a,
                                          const Eigen::VectorXd& b) {
    if (!lu_analyzed_) {
      lu_.analyzePattern(a);
      lu_analyzed_ = true;
    }
    lu_.factorize(a);
    if (lu_.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd x = lu_.solve(b);
    if (!accurate(a, x, b)) return std::nullopt;
    return x;
  }

  CylinderGrid grid_;
  int k_;
  int d_;
  int rows_;
  Eigen::Index n_;
  std::vector<Eigen::MatrixXd> frames_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  bool ldlt_analyzed_ = false;
  bool lu_analyzed_ = false;
};

void enforce_boundary(MapField& f, const BoundaryData& bc) {
  const auto& g = f.grid();
  const int k = f.dim();
  auto& v = f.mutable_values();
  std::copy(bc.lower.begin(), bc.lower.end(), v.begin());
  std::copy(bc.upper.begin(), bc.upper.end(),
            v.begin() + static_cast<std::ptrdiff_t>(g.node(g.n_t - 1, 0) * k));
}

}  // namespace

BoundaryData BoundaryData::from_field(const MapField& f) {
  const auto& g = f.grid();
  const std::size_t row = static_cast<std::size_t>(g.n_th) * f.dim();
  const auto& v = f.values();
  BoundaryData bc;
  bc.lower.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(row));
  bc.upper.assign(v.end() - static_cast<std::ptrdiff_t>(row), v.end());
  return bc;
}

void BoundaryData::validate(const CylinderGrid& grid, const TargetManifold& target) const {
  const std::size_t k = static_cast<std::size_t>(target.ambient_dim());
  const std::size_t row = static_cast<std::size_t>(grid.n_th) * k;
  if (lower.size() != row || upper.size() != row) {
    throw Error(ErrorCode::InvalidArgument, "boundary rows have the wrong size");
  }
  for (std::size_t n = 0; n < row; n += k) {
    if (!target.contains({lower.data() + n, k}, 1e-10) ||
        !target.contains({upper.data() + n, k}, 1e-10)) {
      throw Error(ErrorCode::InvalidArgument, "boundary point is not on the target");
    }
  }
}

double SolveConfig::step(const CylinderGrid& grid) const {
  const double h = std::min(grid.h_t, grid.h_th);
  return dt > 0.0 ? dt : 0.2 * h * h;
}

void SolveConfig::validate(const CylinderGrid& grid) const {
  const double h = std::min(grid.h_t, grid.h_th);
  if (dt < 0.0 || step(grid) > 0.25 * h * h) {
    throw Error(ErrorCode::InvalidArgument, "time step violates dt <= 0.25*min(h)^2");
  }
  if (!(tol_tension > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol_tension must be positive");
  if (max_iters < 0 || log_every < 1) {
    throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 0 and log_every >= 1");
  }
}

std::vector<double> tension(const MapField& f) {
  const auto& g = f.grid();
  const int k = f.dim();
  const Partials p = partials(f);
  std::vector<double> out(f.values().size(), 0.0);
  std::vector<double> lap(k), scratch(k);
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      const std::size_t n = g.node(i, j);
      laplacian(f, i, j, lap, scratch);
      const Vec a = f.target().sff_term(f.vec(i, j), Eigen::Map<const Vec>(p.t_at(n).data(), k),
                                        Eigen::Map<const Vec>(p.th_at(n).data(), k));
      for (int c = 0; c < k; ++c) out[n * k + c] = lap[c] + a[c];
    }
  }
  return out;
}

double tension_residual(const MapField& f) {
  const auto& g = f.grid();
  const int k = f.dim();
  std::vector<double> lap(k), scratch(k);
  double sup = 0.0;
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      laplacian(f, i, j, lap, scratch);
      f.target().tangent_project(f.at(i, j), lap);
      sup = std::max(sup, std::sqrt(sq_norm(lap)));
    }
  }
  return sup;
}

double discrete_energy(const MapField& f) {
  const auto& g = f.grid();
  const int k = f.dim();
  std::vector<double> d(k);
  double e_t = 0.0;
  for (int i = 0; i + 1 < g.n_t; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      diff(f, i, j, i + 1, j, d.data());
      e_t += sq_norm(d);
    }
  }
  double e_th = 0.0;
  for (int i = 0; i < g.n_t; ++i) {
    double row = 0.0;
    for (int j = 0; j < g.n_th; ++j) {
      diff(f, i, j, i, g.wrap(j + 1), d.data());
      row += sq_norm(d);
    }
    e_th += (i == 0 || i == g.n_t - 1) ? 0.5 * row : row;
  }
  return 0.5 * e_t * g.h_th / g.h_t + 0.5 * e_th * g.h_t / g.h_th;
}

MapField flow_step(const MapField& f, double dt) {
  const auto& g = f.grid();
  const int k = f.dim();
  MapField out = f;
  std::vector<double> lap(k), scratch(k);
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      laplacian(f, i, j, lap, scratch);
      f.target().tangent_project(f.at(i, j), lap);
      auto u = out.at(i, j);
      for (int c = 0; c < k; ++c) u[c] += dt * lap[c];
      const double n2 = sq_norm(u);
      if (!(n2 <= kDivergedNorm * kDivergedNorm)) {
        throw Error(ErrorCode::Diverged, "node (" + std::to_string(i) + ", " + std::to_string(j) +
                                             ") left every bounded set");
      }
      f.target().project_inplace(u);
    }
  }
  return out;
}

MapField interpolate_boundary(const CylinderGrid& grid, const TargetManifold& target,
                              const BoundaryData& bc) {
  bc.validate(grid, target);
  const int k = target.ambient_dim();
  std::vector<double> values(grid.nodes() * k);
  std::vector<double> d(k);
  for (int j = 0; j < grid.n_th; ++j) {
    const std::span<const double> lo(bc.lower.data() + j * k, k);
    const std::span<const double> hi(bc.upper.data() + j * k, k);
    const double angle = target.distance(lo, hi);
    target.displacement(lo, hi, d);
    for (int i = 0; i < grid.n_t; ++i) {
      const double s = static_cast<double>(i) / (grid.n_t - 1);
      std::span<double> out(values.data() + grid.node(i, j) * k, k);
      if (target.kind() == TargetManifold::Kind::UnitSphere && angle > 1e-12 &&
          angle < 3.14159) {
        const double wa = std::sin((1.0 - s) * angle) / std::sin(angle);
        const double wb = std::sin(s * angle) / std::sin(angle);
        for (int c = 0; c < k; ++c) out[c] = wa * lo[c] + wb * hi[c];
      } else {
        for (int c = 0; c < k; ++c) out[c] = lo[c] + s * d[c];
      }
      target.project_inplace(out);
    }
  }
  return MapField(grid, target, std::move(values));
}

SolveResult solve(const MapField& f0, const BoundaryData& bc, const SolveConfig& cfg) {
  const auto& g = f0.grid();
  cfg.validate(g);
  bc.validate(g, f0.target());
  const BoundaryData given = BoundaryData::from_field(f0);
  for (std::size_t n = 0; n < bc.lower.size(); ++n) {
    if (std::abs(given.lower[n] - bc.lower[n]) > 1e-10 ||
        std::abs(given.upper[n] - bc.upper[n]) > 1e-10) {
      throw Error(ErrorCode::InvalidArgument, "initial field does not match boundary data");
    }
  }

  MapField f = f0;
  enforce_boundary(f, bc);
  const double dt = cfg.step(g);
  SolveReport report;
  double energy = discrete_energy(f);
  report.energy_history.emplace_back(0, energy);
  double residual = tension_residual(f);
  std::optional<NewtonSystem> newton;
  if (cfg.method == SolveMethod::Newton) newton.emplace(f);

  int it = 0;
  while (residual > cfg.tol_tension && it < cfg.max_iters) {
    bool moved = false;
    if (newton) {
      if (auto w = newton->step(f)) {
        double scale = 1.0;
        for (int h = 0; h < kMaxHalvings && !moved; ++h, scale *= 0.5) {
          MapField trial = retract(f, *w, scale);
          const double e = discrete_energy(trial);
          if (e <= energy + 1e-12 * std::max(1.0, energy)) {
            f = std::move(trial);
            moved = true;
          }
        }
      }
    }
    if (!moved) {
      for (int s = 0; s < kFallbackFlowSteps; ++s) f = flow_step(f, dt);
    }
    ++it;
    energy = discrete_energy(f);
    residual = tension_residual(f);
    if (it % cfg.log_every == 0 || residual <= cfg.tol_tension || it == cfg.max_iters) {
      report.energy_history.emplace_back(it, energy);
    }
    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_dir.empty() && it % cfg.checkpoint_every == 0) {
      save_field(cfg.checkpoint_dir / ("checkpoint_" + std::to_string(it) + ".field"), f);
    }
  }
  report.iterations = it;
  report.final_residual = residual;
  report.converged = residual <= cfg.tol_tension;
  return {std::move(f), std::move(report)};
}

double energy_gradient_check(const MapField& f, std::span<const double> v, double h) {
  check_same_grid(f, v);
  const auto& g = f.grid();
  const int k = f.dim();
  auto shifted = [&](double s) {
    MapField out = f;
    for (int i = 1; i < g.n_t - 1; ++i) {
      for (int j = 0; j < g.n_th; ++j) {
        auto u = out.at(i, j);
        const double* vn = v.data() + g.node(i, j) * k;
        for (int c = 0; c < k; ++c) u[c] += s * vn[c];
        f.target().project_inplace(u);
      }
    }
    return out;
  };
  const double fd = (discrete_energy(shifted(h)) - discrete_energy(shifted(-h))) / (2.0 * h);
  const std::vector<double> tau = tension(f);
  double inner = 0.0;
  for (int i = 1; i < g.n_t - 1; ++i) {
    for (int j = 0; j < g.n_th; ++j) {
      const std::size_t n = g.node(i, j) * k;
      for (int c = 0; c < k; ++c) inner += tau[n + c] * v[n + c];
    }
  }
  inner *= g.h_t * g.h_th;
  return std::abs(fd + inner) / std::max(1.0, std::abs(inner));
}

}  // namespace necklab
