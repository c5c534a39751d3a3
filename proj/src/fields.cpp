#include "necklab/fields.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace necklab {

namespace {

Vec vec3(double x, double y, double z) {
  Vec out(3);
  out << x, y, z;
  return out;
}

Vec bubble_point(double s, double theta) {
  const double sech = 1.0 / std::cosh(s);
  return vec3(sech * std::cos(theta), sech * std::sin(theta), std::tanh(s));
}

}  // namespace

MapField geodesic_ansatz(const CylinderGrid& grid, const TargetManifold& target, const Vec& p,
                         const Vec& v, double slope) {
  return MapField::sample(grid, target, [&](double t, double) {
    return target.geodesic(p, v, slope * (t - grid.t_min));
  });
}

MapField equator_wrap(const CylinderGrid& grid) {
  return MapField::sample(grid, TargetManifold::unit_sphere(3), [](double, double theta) {
    return vec3(std::cos(theta), std::sin(theta), 0.0);
  });
}

MapField conformal_bubble(const CylinderGrid& grid, double center) {
  return MapField::sample(grid, TargetManifold::unit_sphere(3), [center](double t, double theta) {
    return bubble_point(t - center, theta);
  });
}

MapField neck_with_bubble(const CylinderGrid& grid, double slope, double center) {
  return MapField::sample(grid, TargetManifold::unit_sphere(3), [=](double t, double theta) {
    const Vec b = bubble_point(t - center, theta);
    const double c = std::cos(slope * t);
    const double s = std::sin(slope * t);
    return vec3(b[0], c * b[1] - s * b[2], s * b[1] + c * b[2]);
  });
}

MapField wobbly_geodesic(const CylinderGrid& grid, double arc, double amp) {
  const double slope = arc / grid.length();
  return MapField::sample(grid, TargetManifold::unit_sphere(3), [&](double t, double theta) {
    const double s = (t - grid.t_min) / grid.length();
    const double z = amp * ((1.0 - s) * std::cos(theta) + s * std::sin(2.0 * theta));
    const double a = slope * (t - grid.t_min);
    return vec3(std::cos(a), std::sin(a), z);
  });
}

std::pair<Vec, Vec> geodesic_frame(const TargetManifold& target) {
  const int k = target.ambient_dim();
  Vec p = Vec::Zero(k);
  Vec v = Vec::Zero(k);
  if (target.kind() == TargetManifold::Kind::UnitSphere) {
    p[0] = 1.0;
    v[1] = 1.0;
  } else {
    v = target.basis().row(0).transpose().normalized();
  }
  return {p, v};
}

MapField perturbed_geodesic(const CylinderGrid& grid, const TargetManifold& target, double slope,
                            double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng);
  const auto [p, v] = geodesic_frame(target);
  const int k = target.ambient_dim();
  std::vector<double> values(grid.nodes() * k);
  for (int i = 0; i < grid.n_t; ++i) {
    const bool boundary = i == 0 || i == grid.n_t - 1;
    // The last row uses the exact cylinder length so the far boundary point
    // does not pick up rounding from t(i).
    const double elapsed = i == grid.n_t - 1 ? grid.length() : grid.t(i) - grid.t_min;
    const double bump = std::sin(std::numbers::pi * elapsed / grid.length());
    for (int j = 0; j < grid.n_th; ++j) {
      const double th = grid.theta(j);
      const double wobble = boundary ? 0.0 : amp * bump * (c0 + c1 * std::cos(th) + c2 * std::sin(th));
      const double s = slope * elapsed + wobble;
      const Vec u = target.kind() == TargetManifold::Kind::UnitSphere
                        ? Vec(std::cos(s) * p + std::sin(s) * v)
                        : target.project(p + s * v);
      std::copy(u.data(), u.data() + k, values.begin() + grid.node(i, j) * k);
    }
  }
  return MapField(grid, target, std::move(values));
}

}  // namespace necklab
