#pragma once

namespace necklab {

/// Largest admissible core length, 2·arcsinh(1).
double max_core_length();

/// Standard collar around a closed geodesic of length l, in its flat
/// cylinder model [t_lo, t_hi] × S¹ with conformal factor λ(t).
struct CollarSpec {
  double l = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double core_t = 0.0;

  /// Throws LengthOutOfRange unless 0 < l ≤ 2·arcsinh(1).
  static CollarSpec make(double l);

  double length() const { return t_hi - t_lo; }
  bool contains(double t) const;
};

struct CylinderBounds {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

/// Points of the collar whose injectivity radius is at most δ.
struct SubcollarBounds {
  double delta = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;

  double length() const { return t2 - t1; }
};

struct CylinderPoint {
  double t = 0.0;
  double theta = 0.0;
};

CylinderBounds cylinder_bounds(double l);

/// λ(t) = l / (2π·sin(lt/2π)); the collar metric is λ²(dt² + dθ²).
double conformal_factor(double l, double t);

/// arcsinh(sinh(l/2) / sin(lt/2π)).
double injrad(double l, double t);

/// Injectivity radius from the Fermi-type angle: arcsinh(sinh(l/2)/sin φ).
double injrad_fermi(double l, double phi);

/// t1 = (2π/l)·arcsin(sinh(l/2)/sinh δ), t2 = 2π²/l − t1.
/// Throws DeltaTooSmall when sinh(l/2) > sinh δ.
SubcollarBounds subcollar(double l, double delta);

/// Collar area in closed form, l / sinh(l/2).
double collar_area(double l);

/// 2π·∫ λ(t)² dt over [t_lo, t_hi] by adaptive Gauss–Kronrod quadrature.
double collar_area_quadrature(double l);

/// (t, θ) = ((2π/l)·φ, (2π/l)·log r) for 1 ≤ r ≤ e^l and φ inside the collar
/// angle range, with θ reduced into [0, 2π). Throws OutOfCollar otherwise.
CylinderPoint fermi_to_cylinder(double l, double r, double phi);

}  // namespace necklab
