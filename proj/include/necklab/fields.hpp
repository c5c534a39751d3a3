#pragma once

#include <cstdint>
#include <utility>

#include "necklab/grid.hpp"

namespace necklab {

// Closed-form test maps. All of them take values in S^2 ⊂ R^3 unless a
// target is passed explicitly.

/// u(t, θ) = cos(s)·p + sin(s)·v with s = slope·(t − t_min). Works for any
/// arc length, including arcs that wrap past π.
MapField geodesic_ansatz(const CylinderGrid& grid, const TargetManifold& target, const Vec& p,
                         const Vec& v, double slope);

/// u(t, θ) = (cos θ, sin θ, 0).
MapField equator_wrap(const CylinderGrid& grid);

/// Inverse stereographic image of e^{(t − center) + iθ}:
/// (sech s·cos θ, sech s·sin θ, tanh s), s = t − center.
MapField conformal_bubble(const CylinderGrid& grid, double center = 0.0);

/// The bubble above, rotated about the x axis by the angle slope·t. Far from
/// `center` it looks like a geodesic of speed `slope` through the poles.
MapField neck_with_bubble(const CylinderGrid& grid, double slope, double center = 0.0);

/// Geodesic from (1,0,0) towards (0,1,0) of total arc `arc` over the grid,
/// with a normal wobble of size `amp` that has one θ-mode on the lower row
/// and a second-harmonic mode on the upper row, blended linearly in t.
MapField wobbly_geodesic(const CylinderGrid& grid, double arc, double amp);

/// Base point and unit direction used for geodesic boundary data: (e_0, e_1)
/// on a sphere, the origin and the first lattice direction on a torus.
std::pair<Vec, Vec> geodesic_frame(const TargetManifold& target);

/// Geodesic of speed `slope` from the frame's base point, with a seeded
/// smooth displacement along the geodesic itself of size `amp` that vanishes
/// on both boundary rows. The image stays on the geodesic's great circle
/// (or line), so the boundary rows are exactly c(0) and c(slope·|P|).
MapField perturbed_geodesic(const CylinderGrid& grid, const TargetManifold& target, double slope,
                            double amp, std::uint64_t seed);

}  // namespace necklab
