#include "necklab/collar.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "necklab/error.hpp"

namespace necklab {

namespace {

constexpr double kPi = std::numbers::pi;

void check_length(double l) {
  if (!(l > 0.0 && l <= max_core_length())) {
    throw Error(ErrorCode::LengthOutOfRange,
                "core length " + std::to_string(l) + " is outside (0, 2 asinh 1]");
  }
}

// Relative slack for points sitting on the collar ends after rounding.
double edge_slack(const CollarSpec& c) { return 1e-12 * c.t_hi; }

}  // namespace

double max_core_length() { return 2.0 * std::asinh(1.0); }

CollarSpec CollarSpec::make(double l) {
  check_length(l);
  const double a = std::atan(std::sinh(0.5 * l));
  CollarSpec c;
  c.l = l;
  c.t_lo = 2.0 * kPi / l * a;
  c.t_hi = 2.0 * kPi / l * (kPi - a);
  c.core_t = kPi * kPi / l;
  return c;
}

bool CollarSpec::contains(double t) const {
  return t >= t_lo - edge_slack(*this) && t <= t_hi + edge_slack(*this);
}

CylinderBounds cylinder_bounds(double l) {
  const CollarSpec c = CollarSpec::make(l);
  return {c.t_lo, c.t_hi};
}

double conformal_factor(double l, double t) {
  const CollarSpec c = CollarSpec::make(l);
  if (!c.contains(t)) throw Error(ErrorCode::OutOfCollar, "t = " + std::to_string(t));
  return l / (2.0 * kPi * std::sin(l * t / (2.0 * kPi)));
}

double injrad(double l, double t) {
  const CollarSpec c = CollarSpec::make(l);
  if (!c.contains(t)) throw Error(ErrorCode::OutOfCollar, "t = " + std::to_string(t));
  return std::asinh(std::sinh(0.5 * l) / std::sin(l * t / (2.0 * kPi)));
}

double injrad_fermi(double l, double phi) {
  check_length(l);
  const double a = std::atan(std::sinh(0.5 * l));
  if (!(phi >= a * (1.0 - 1e-12) && phi <= (kPi - a) * (1.0 + 1e-12))) {
    throw Error(ErrorCode::OutOfCollar, "phi = " + std::to_string(phi));
  }
  return std::asinh(std::sinh(0.5 * l) / std::sin(phi));
}

SubcollarBounds subcollar(double l, double delta) {
  check_length(l);
  if (!(delta > 0.0) || delta > std::asinh(1.0) * (1.0 + 1e-15)) {
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, asinh 1]");
  }
  const double ratio = std::sinh(0.5 * l) / std::sinh(delta);
  if (ratio > 1.0) {
    throw Error(ErrorCode::DeltaTooSmall, "sinh(l/2) exceeds sinh(delta)");
  }
  SubcollarBounds s;
  s.delta = delta;
  s.t1 = 2.0 * kPi / l * std::asin(ratio);
  s.t2 = 2.0 * kPi * kPi / l - s.t1;
  return s;
}

double collar_area(double l) {
  check_length(l);
  return l / std::sinh(0.5 * l);
}

double collar_area_quadrature(double l) {
  const CollarSpec c = CollarSpec::make(l);
  const auto lambda_sq = [l](double t) {
    const double lam = l / (2.0 * kPi * std::sin(l * t / (2.0 * kPi)));
    return lam * lam;
  };
  double error = 0.0;
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      lambda_sq, c.t_lo, c.t_hi, 20, 1e-14, &error);
  return 2.0 * kPi * integral;
}

CylinderPoint fermi_to_cylinder(double l, double r, double phi) {
  check_length(l);
  const double a = std::atan(std::sinh(0.5 * l));
  if (!(r >= 1.0 && r <= std::exp(l) * (1.0 + 1e-15))) {
    throw Error(ErrorCode::OutOfCollar, "r = " + std::to_string(r) + " is outside [1, e^l]");
  }
  if (!(phi >= a * (1.0 - 1e-12) && phi <= (kPi - a) * (1.0 + 1e-12))) {
    throw Error(ErrorCode::OutOfCollar, "phi = " + std::to_string(phi));
  }
  // The circles r = 1 and r = e^l are identified.
  double theta = 2.0 * kPi / l * std::log(r);
  if (theta >= 2.0 * kPi * (1.0 - 1e-14)) theta = 0.0;
  return {2.0 * kPi / l * phi, theta};
}

}  // namespace necklab
