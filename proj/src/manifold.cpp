#include "necklab/manifold.hpp"

#include <cmath>
#include <algorithm>
#include <limits>
#include <vector>

#include "necklab/error.hpp"

namespace necklab {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonTangent: return "NonTangent";
    case ErrorCode::EmptyRange: return "EmptyRange";
    case ErrorCode::RangeTooShort: return "RangeTooShort";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::LengthOutOfRange: return "LengthOutOfRange";
    case ErrorCode::OutOfCollar: return "OutOfCollar";
    case ErrorCode::DeltaTooSmall: return "DeltaTooSmall";
    case ErrorCode::MismatchedDecomposition: return "MismatchedDecomposition";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateAxis: return "DegenerateAxis";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

constexpr double kMinSphereNorm = 1e-14;
constexpr double kTangentTol = 1e-10;

Eigen::Map<const Vec> view(std::span<const double> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

}  // namespace

TargetManifold TargetManifold::unit_sphere(int ambient_dim) {
  if (ambient_dim < 2) {
    throw Error(ErrorCode::InvalidArgument, "sphere ambient dimension must be >= 2");
  }
  return TargetManifold(Kind::UnitSphere, ambient_dim);
}

TargetManifold TargetManifold::flat_torus(const Eigen::MatrixXd& basis) {
  if (basis.rows() < 1 || basis.rows() != basis.cols()) {
    throw Error(ErrorCode::InvalidArgument, "torus basis must be square");
  }
  const Eigen::MatrixXd gram = basis * basis.transpose();
  if (!(gram.determinant() > 0.0) || !basis.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "torus lattice basis is singular");
  }
  TargetManifold m(Kind::FlatTorus, static_cast<int>(basis.rows()));
  m.basis_ = basis;
  m.basis_t_ = basis.transpose();
  m.lu_ = m.basis_t_.partialPivLu();
  return m;
}

Vec TargetManifold::lattice_coords(std::span<const double> p) const {
  return lu_.solve(view(p));
}

bool TargetManifold::in_fundamental_domain(std::span<const double> p) const {
  const Vec c = lattice_coords(p);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (!(c[i] >= 0.0 && c[i] < 1.0)) return false;
  }
  return true;
}

void TargetManifold::project_inplace(std::span<double> p) const {
  if (kind_ == Kind::UnitSphere) {
    Eigen::Map<Vec> x(p.data(), dim_);
    const double n2 = x.squaredNorm();
    if (std::abs(n2 - 1.0) <= 16.0 * dim_ * std::numeric_limits<double>::epsilon()) return;
    const double n = std::sqrt(n2);
    if (!(n > kMinSphereNorm)) {
      throw Error(ErrorCode::ZeroVector, "cannot project a (near) zero vector onto the sphere");
    }
    x /= n;
    return;
  }
  // Torus: reduce lattice coordinates into [0,1). A reduced point can land on
  // the far edge after the round trip through B^T; the loop settles it.
  for (int attempt = 0; attempt < 4; ++attempt) {
    if (in_fundamental_domain(p)) return;
    Vec c = lattice_coords(p);
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      c[i] -= std::floor(c[i]);
      if (c[i] >= 1.0) c[i] = 0.0;
    }
    Eigen::Map<Vec>(p.data(), dim_) = basis_t_ * c;
  }
}

Vec TargetManifold::project(const Vec& p) const {
  if (p.size() != dim_) throw Error(ErrorCode::InvalidArgument, "dimension mismatch");
  Vec out = p;
  project_inplace({out.data(), static_cast<size_t>(out.size())});
  return out;
}

Vec TargetManifold::sff_term(const Vec& u, const Vec& du_t, const Vec& du_th) const {
  if (kind_ == Kind::FlatTorus) return Vec::Zero(dim_);
  return (du_t.squaredNorm() + du_th.squaredNorm()) * u;
}

Vec TargetManifold::geodesic(const Vec& p, const Vec& v, double s) const {
  if (kind_ == Kind::UnitSphere) {
    if (std::abs(v.dot(p)) > kTangentTol) {
      throw Error(ErrorCode::NonTangent, "initial velocity is not tangent to the sphere");
    }
    return std::cos(s) * p + std::sin(s) * v;
  }
  return project(p + s * v);
}

double TargetManifold::distance(std::span<const double> p, std::span<const double> q) const {
  if (kind_ == Kind::UnitSphere) {
    // 2 asin(|p-q|/2) equals arccos(p·q) on the sphere and keeps full
    // precision for nearby points.
    const double chord = (view(p) - view(q)).norm();
    return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
  }
  Vec d(dim_);
  displacement(p, q, {d.data(), static_cast<size_t>(dim_)});
  return d.norm();
}

double TargetManifold::distance(const Vec& p, const Vec& q) const {
  return distance(std::span<const double>(p.data(), p.size()),
                  std::span<const double>(q.data(), q.size()));
}

void TargetManifold::displacement(std::span<const double> from, std::span<const double> to,
                                  std::span<double> out) const {
  if (kind_ == Kind::UnitSphere) {
    for (int k = 0; k < dim_; ++k) out[k] = to[k] - from[k];
    return;
  }
  const Vec raw = view(to) - view(from);
  Vec c = lu_.solve(raw);
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = std::round(c[i]);
  Vec best = raw - basis_t_ * c;
  double best_n2 = best.squaredNorm();
  // Rounding lattice coordinates is exact for orthogonal lattices; for
  // skewed ones scan the neighbouring images.
  if (dim_ <= 4) {
    const int n_images = static_cast<int>(std::pow(3, dim_));
    Vec offset(dim_);
    for (int code = 0; code < n_images; ++code) {
      int rest = code;
      for (int k = 0; k < dim_; ++k) {
        offset[k] = static_cast<double>(rest % 3 - 1);
        rest /= 3;
      }
      const Vec cand = raw - basis_t_ * (c + offset);
      const double n2 = cand.squaredNorm();
      if (n2 < best_n2) {
        best_n2 = n2;
        best = cand;
      }
    }
  }
  for (int k = 0; k < dim_; ++k) out[k] = best[k];
}

void TargetManifold::tangent_project(std::span<const double> u, std::span<double> v) const {
  if (kind_ == Kind::FlatTorus) return;
  double dot = 0.0;
  for (int k = 0; k < dim_; ++k) dot += u[k] * v[k];
  for (int k = 0; k < dim_; ++k) v[k] -= dot * u[k];
}

Eigen::MatrixXd TargetManifold::tangent_frame(std::span<const double> u) const {
  if (kind_ == Kind::FlatTorus) return Eigen::MatrixXd::Identity(dim_, dim_);
  // Householder reflection H with H u = ∓e_0; its remaining columns span u^⊥.
  Vec v = view(u);
  const double sign = u[0] >= 0.0 ? 1.0 : -1.0;
  v[0] += sign;
  const double vv = v.squaredNorm();
  Eigen::MatrixXd frame(dim_, dim_ - 1);
  for (int c = 1; c < dim_; ++c) {
    for (int r = 0; r < dim_; ++r) {
      frame(r, c - 1) = (r == c ? 1.0 : 0.0) - 2.0 * v[r] * v[c] / vv;
    }
  }
  return frame;
}

bool TargetManifold::contains(std::span<const double> p, double tol) const {
  if (static_cast<int>(p.size()) != dim_) return false;
  for (double x : p) {
    if (!std::isfinite(x)) return false;
  }
  if (kind_ == Kind::UnitSphere) return std::abs(view(p).norm() - 1.0) <= tol;
  const Vec c = lattice_coords(p);
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c[i] < -tol || c[i] > 1.0 + tol) return false;
  }
  return true;
}

nlohmann::json TargetManifold::descriptor() const {
  if (kind_ == Kind::UnitSphere) return {{"name", "sphere"}, {"dim", dim_}};
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < dim_; ++r) {
    std::vector<double> row(dim_);
    for (int c = 0; c < dim_; ++c) row[c] = basis_(r, c);
    rows.push_back(row);
  }
  return {{"name", "torus"}, {"basis", rows}};
}

TargetManifold TargetManifold::from_descriptor(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name")) {
    throw Error(ErrorCode::ConfigError, "target descriptor needs a name");
  }
  const std::string name = j.at("name").get<std::string>();
  for (const auto& [key, _] : j.items()) {
    if (key != "name" && key != "dim" && key != "basis") {
      throw Error(ErrorCode::ConfigError, "unknown target key '" + key + "'");
    }
  }
  if (name == "sphere") {
    return unit_sphere(j.value("dim", 3));
  }
  if (name == "torus") {
    const auto rows = j.at("basis").get<std::vector<std::vector<double>>>();
    Eigen::MatrixXd b(rows.size(), rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.size()) {
        throw Error(ErrorCode::ConfigError, "torus basis must be square");
      }
      for (size_t c = 0; c < rows.size(); ++c) b(r, c) = rows[r][c];
    }
    return flat_torus(b);
  }
  throw Error(ErrorCode::ConfigError, "unknown target '" + name + "'");
}

}  // namespace necklab
