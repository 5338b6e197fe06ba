#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "chb/geometry.hpp"

namespace chb {

using Rng = std::mt19937_64;

/// Smooth seeded boundary trajectory: a few low-frequency separable modes in
/// (x, t) with random coefficients, sup-normalized to `amplitude`. Low-pass by
/// construction so Taylor-order observations are not polluted by dt-scale
/// roughness.
std::vector<Vec> smoothBoundaryField(const Geometry& geom, const TimeGrid& tg, Rng& rng,
                                     double amplitude = 1.0, int modes = 3);

/// Smooth seeded bulk field (x-periodic modes times boundary-flat y-profiles).
Vec smoothBulkField(const Geometry& geom, Rng& rng, double amplitude = 1.0, int modes = 3);

/// Plain white-noise bulk field (for quadrature/identity oracles).
Vec randomBulkField(const Geometry& geom, Rng& rng, double amplitude = 1.0);

Vec randomBdryField(const Geometry& geom, Rng& rng, double amplitude = 1.0);

}  // namespace chb
