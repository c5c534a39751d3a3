#pragma once

#include <Eigen/Dense>
#include "json.hpp"
#include <span>
#include <string>

namespace necklab {

using Vec = Eigen::VectorXd;

/// Embedded target N ⊂ R^K. Either the unit sphere S^{K-1} or a flat torus
/// R^K / Λ where Λ is spanned by the rows of a nonsingular K×K basis.
///
/// Torus points are stored as their canonical representative
/// Σ c_i b_i with every c_i in [0, 1).
class TargetManifold {
 public:
  enum class Kind { UnitSphere, FlatTorus };

  static TargetManifold unit_sphere(int ambient_dim);
  /// `basis` holds one lattice vector per row.
  static TargetManifold flat_torus(const Eigen::MatrixXd& basis);

  Kind kind() const { return kind_; }
  int ambient_dim() const { return dim_; }
  /// Dimension of the tangent spaces (K-1 for the sphere, K for the torus).
  int tangent_dim() const { return kind_ == Kind::UnitSphere ? dim_ - 1 : dim_; }
  const Eigen::MatrixXd& basis() const { return basis_; }

  /// Nearest-point retraction. Idempotent bitwise.
  Vec project(const Vec& p) const;
  void project_inplace(std::span<double> p) const;

  /// A(u)(∇u, ∇u) for the pair of partials.
  Vec sff_term(const Vec& u, const Vec& du_t, const Vec& du_th) const;

  /// Unit-speed geodesic from p with initial unit tangent v.
  Vec geodesic(const Vec& p, const Vec& v, double s) const;

  double distance(const Vec& p, const Vec& q) const;
  double distance(std::span<const double> p, std::span<const double> q) const;

  /// Ambient displacement from `from` to `to`. On the torus this is the
  /// shortest lattice image, which makes finite differences well defined
  /// across the fundamental-domain seams.
  void displacement(std::span<const double> from, std::span<const double> to,
                    std::span<double> out) const;

  /// Orthogonal projection of v onto T_u N, in place.
  void tangent_project(std::span<const double> u, std::span<double> v) const;

  /// Orthonormal tangent frame at u as columns of a K × tangent_dim matrix.
  Eigen::MatrixXd tangent_frame(std::span<const double> u) const;

  bool contains(std::span<const double> p, double tol = 1e-10) const;

  nlohmann::json descriptor() const;
  static TargetManifold from_descriptor(const nlohmann::json& j);

 private:
  TargetManifold(Kind kind, int dim) : kind_(kind), dim_(dim) {}

  bool in_fundamental_domain(std::span<const double> p) const;
  Vec lattice_coords(std::span<const double> p) const;

  Kind kind_;
  int dim_;
  Eigen::MatrixXd basis_;    // rows are lattice vectors
  Eigen::MatrixXd basis_t_;  // columns are lattice vectors
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

}  // namespace necklab
