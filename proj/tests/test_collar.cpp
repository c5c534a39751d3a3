#include <cmath>
#include <numbers>

#include "doctest.h"
#include "necklab/collar.hpp"
#include "necklab/error.hpp"

using namespace necklab;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("collar bounds and core position") {
  const double l = 0.1;
  const CollarSpec c = CollarSpec::make(l);
  CHECK(c.core_t == doctest::Approx(kPi * kPi / l));
  CHECK(c.t_lo + c.t_hi == doctest::Approx(2 * c.core_t).epsilon(1e-15));
  // Cylinder length tends to 2π²/l as l → 0.
  CHECK(c.length() * l / (2 * kPi * kPi) == doctest::Approx(1.0 - l / kPi).epsilon(1e-3));
  const CylinderBounds b = cylinder_bounds(l);
  CHECK(b.t_lo == c.t_lo);
  CHECK(max_core_length() == doctest::Approx(2 * std::asinh(1.0)));
  CHECK(code_of([] { CollarSpec::make(0.0); }) == ErrorCode::LengthOutOfRange);
  CHECK(code_of([] { CollarSpec::make(1.8); }) == ErrorCode::LengthOutOfRange);
}

TEST_CASE("conformal factor and injectivity radius") {
  const double l = 0.2;
  const CollarSpec c = CollarSpec::make(l);
  CHECK(conformal_factor(l, c.core_t) == doctest::Approx(l / (2 * kPi)).epsilon(1e-15));
  CHECK(injrad(l, c.core_t) == doctest::Approx(l / 2).epsilon(1e-15));
  // At the collar ends sin(lt/2π) = sinh(l/2)/cosh(l/2), so injrad = asinh(cosh(l/2)).
  CHECK(injrad(l, c.t_lo) == doctest::Approx(std::asinh(std::cosh(l / 2))).epsilon(1e-13));
  CHECK(code_of([&] { injrad(l, c.t_lo - 1.0); }) == ErrorCode::OutOfCollar);
  CHECK(code_of([&] { conformal_factor(l, c.t_hi + 1.0); }) == ErrorCode::OutOfCollar);
  // Symmetric about the core.
  CHECK(injrad(l, c.core_t - 3.0) == doctest::Approx(injrad(l, c.core_t + 3.0)).epsilon(1e-14));
}

TEST_CASE("subcollar bounds") {
  const SubcollarBounds s = subcollar(0.1, std::asinh(1.0));
  CHECK(s.t1 == doctest::Approx(3.14421392612890377798).epsilon(1e-12));
  CHECK(s.t1 + s.t2 == doctest::Approx(2 * kPi * kPi / 0.1));
  // injrad equals δ on the subcollar ends.
  CHECK(injrad(0.1, s.t1) == doctest::Approx(std::asinh(1.0)).epsilon(1e-12));
  CHECK(code_of([] { subcollar(1.0, 0.1); }) == ErrorCode::DeltaTooSmall);
  CHECK(code_of([] { subcollar(0.1, 2.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { subcollar(0.1, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("collar area: closed form against quadrature of the conformal factor") {
  // Frozen reference values for 2π∫λ² dt over the collar.
  CHECK(collar_area_quadrature(0.01) == doctest::Approx(3.99998333338194432).epsilon(1e-12));
  CHECK(collar_area_quadrature(0.1) == doctest::Approx(3.99833381931633571).epsilon(1e-12));
  CHECK(collar_area_quadrature(0.5) == doctest::Approx(3.95863516330200036).epsilon(1e-12));
  CHECK(collar_area(0.1) == doctest::Approx(1.99916690965816786).epsilon(1e-14));
}

TEST_CASE("Fermi coordinates map onto the cylinder") {
  const double l = 0.3;
  const double a = std::atan(std::sinh(l / 2));
  const CylinderPoint mid = fermi_to_cylinder(l, 1.0, kPi / 2);
  CHECK(mid.t == doctest::Approx(CollarSpec::make(l).core_t));
  CHECK(mid.theta == 0.0);
  CHECK(fermi_to_cylinder(l, std::exp(l), 1.0).theta == 0.0);
  CHECK(fermi_to_cylinder(l, std::exp(l / 2), 1.0).theta == doctest::Approx(kPi));
  CHECK(injrad_fermi(l, kPi / 2) == doctest::Approx(l / 2));
  CHECK(code_of([&] { fermi_to_cylinder(l, 0.5, 1.0); }) == ErrorCode::OutOfCollar);
  CHECK(code_of([&] { injrad_fermi(l, a / 2); }) == ErrorCode::OutOfCollar);
}
