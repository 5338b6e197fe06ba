#pragma once

#include <vector>

#include "chb/linear_solver.hpp"
#include "chb/state_solver.hpp"

namespace chb {

/// Directional state derivative trajectory: pair part in chi, auxiliary
/// potential in mu. Zero initial data, zero mean at every node.
using SensitivityTrajectory = LinearTrajectory;

/// Coefficients (f''(y), f_Gamma''(y_Gamma)) frozen along a state trajectory;
/// the single ingredient shared by DS, D^2 S and the transposed adjoint.
struct LinearizedCoefficients {
  std::vector<Vec> lambda;   // nodes 0..nt (node 0 unused)
  std::vector<Vec> lambdaG;
};

LinearizedCoefficients linearizeAlong(const Geometry& geom, const PotentialPair& pot,
                                      const StateTrajectory& state);

/// DS(u)h: the linearized system with g = 0, g_Gamma = h.
SensitivityTrajectory applyDS(const Geometry& geom, const TimeGrid& tg,
                              const PotentialPair& pot, const StateTrajectory& state,
                              const ControlTrajectory& h,
                              const LinearSolveOptions& opts = {});

/// Batched DS for many directions (one factorization per step).
std::vector<SensitivityTrajectory> applyDSBatch(const Geometry& geom, const TimeGrid& tg,
                                                const PotentialPair& pot,
                                                const StateTrajectory& state,
                                                const std::vector<ControlTrajectory>& hs,
                                                const LinearSolveOptions& opts = {});

/// D^2 S(u)[h,k]: solves the two inner linearized systems, then the
/// second-order system with g = f'''(y) phi psi, g_Gamma = -f_Gamma'''(y_G)
/// phi_G psi_G.
SensitivityTrajectory applyD2S(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const StateTrajectory& state,
                               const ControlTrajectory& h, const ControlTrajectory& k,
                               const LinearSolveOptions& opts = {});

/// Variant reusing precomputed inner solves (phi = DS h, psi = DS k).
SensitivityTrajectory applyD2SFrom(const Geometry& geom, const TimeGrid& tg,
                                   const PotentialPair& pot, const StateTrajectory& state,
                                   const SensitivityTrajectory& phi,
                                   const SensitivityTrajectory& psi,
                                   const LinearSolveOptions& opts = {});

}  // namespace chb
