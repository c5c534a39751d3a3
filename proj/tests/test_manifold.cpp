#include <cmath>
#include <numbers>

#include "doctest.h"
#include "necklab/error.hpp"
#include "necklab/manifold.hpp"

using namespace necklab;

namespace {

Vec v3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

std::span<const double> sp(const Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

TEST_CASE("sphere projection normalizes and rejects zero") {
  const auto s2 = TargetManifold::unit_sphere(3);
  const Vec p = s2.project(v3(3, 0, 4));
  CHECK(p[0] == doctest::Approx(0.6));
  CHECK(p[2] == doctest::Approx(0.8));
  CHECK(s2.contains(sp(p)));
  CHECK_THROWS_AS(s2.project(v3(0, 0, 0)), Error);
  try {
    s2.project(v3(0, 0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
  CHECK_THROWS_AS(TargetManifold::unit_sphere(1), Error);
}

TEST_CASE("sphere geodesic is a unit speed great circle") {
  const auto s2 = TargetManifold::unit_sphere(3);
  const Vec p = v3(1, 0, 0), v = v3(0, 1, 0);
  for (double s : {0.0, 0.3, 1.0, 2.5, 3.0}) {
    const Vec q = s2.geodesic(p, v, s);
    CHECK(q.norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s2.distance(p, q) == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(s2.geodesic(p, v3(1, 1, 0).normalized(), 1.0), Error);
}

TEST_CASE("sphere distance keeps precision for close points") {
  const auto s2 = TargetManifold::unit_sphere(3);
  const Vec p = v3(1, 0, 0);
  const Vec q = v3(std::cos(1e-9), std::sin(1e-9), 0);
  CHECK(s2.distance(p, q) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("tangent projection removes the normal part") {
  const auto s2 = TargetManifold::unit_sphere(3);
  const Vec u = v3(0, 0, 1);
  Vec w = v3(1, 2, 3);
  s2.tangent_project(sp(u), {w.data(), 3});
  CHECK(w[2] == doctest::Approx(0.0));
  CHECK(w[0] == doctest::Approx(1.0));
  const Eigen::MatrixXd frame = s2.tangent_frame(sp(u));
  CHECK(frame.cols() == 2);
  CHECK((frame.transpose() * frame - Eigen::MatrixXd::Identity(2, 2)).norm() < 1e-14);
  CHECK((frame.transpose() * u).norm() < 1e-14);
}

TEST_CASE("sphere second fundamental form term") {
  const auto s2 = TargetManifold::unit_sphere(3);
  const Vec u = v3(0, 0, 1);
  const Vec t = s2.sff_term(u, v3(1, 0, 0), v3(0, 2, 0));
  CHECK(t[2] == doctest::Approx(5.0));
}

TEST_CASE("flat torus wraps into the fundamental domain") {
  Eigen::MatrixXd b(2, 2);
  b << 1, 0, 0.5, 2;
  const auto t2 = TargetManifold::flat_torus(b);
  CHECK(t2.tangent_dim() == 2);
  Vec p(2);
  p << 1.25, 2.5;  // lattice coordinates (0.625, 1.25)
  const Vec q = t2.project(p);
  Vec expect(2);
  expect << 0.75, 0.5;
  CHECK((q - expect).norm() < 1e-14);
  CHECK(t2.distance(p, expect) < 1e-14);
  // Shortest displacement crosses the boundary.
  Vec a(2), c(2);
  a << 0.05, 0.0;
  c << 0.95, 0.0;
  CHECK(t2.distance(a, c) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(t2.sff_term(a, a, c).norm() == 0.0);
  Eigen::MatrixXd sing(2, 2);
  sing << 1, 2, 2, 4;
  CHECK_THROWS_AS(TargetManifold::flat_torus(sing), Error);
}

TEST_CASE("descriptor round trip") {
  Eigen::MatrixXd b(2, 2);
  b << 1, 0, 0, 3;
  const auto t2 = TargetManifold::flat_torus(b);
  const auto back = TargetManifold::from_descriptor(t2.descriptor());
  CHECK(back.kind() == TargetManifold::Kind::FlatTorus);
  CHECK((back.basis() - b).norm() == 0.0);
  const auto s = TargetManifold::from_descriptor(TargetManifold::unit_sphere(4).descriptor());
  CHECK(s.ambient_dim() == 4);
  CHECK(s.tangent_dim() == 3);
}
