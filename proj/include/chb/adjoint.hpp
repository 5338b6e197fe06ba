#pragma once

#include <vector>

#include "chb/sensitivity.hpp"
#include "chb/state_solver.hpp"

namespace chb {

/// Tracking-cost data. Targets are node-indexed 0..nt (node 0 unused by the
/// scheme's quadrature). bOmega and bGamma must vanish (compatibility).
struct CostSpec {
  double bQ = 1.0;
  double bSigma = 1.0;
  double b0 = 0.1;
  double bOmega = 0.0;
  double bGamma = 0.0;
  std::vector<Vec> zQ;      // bulk targets
  std::vector<Vec> zSigma;  // boundary targets

  void validate(const Geometry& geom, const TimeGrid& tg) const;
};

/// Backward adjoint trajectory (p, q, q_Gamma = trace q); node 0 unused.
/// p is reported with mean_value(p(t_k)) = 0 (gauge convention; q and the
/// gradient are invariant under this shift).
struct AdjointTrajectory {
  std::vector<Vec> p;
  std::vector<Vec> q;

  [[nodiscard]] Vec qGamma(const Geometry& geom, int k) const { return geom.trace(q[k]); }
};

/// Transpose of the discrete linearized forward stepping applied to the
/// tracking residuals, swept backward from T.
AdjointTrajectory solveAdjoint(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const StateTrajectory& state,
                               const CostSpec& cost, const LinearSolveOptions& opts = {});

/// Riesz representative of the reduced derivative: q_Gamma + b0 u on Sigma.
std::vector<Vec> reducedGradient(const Geometry& geom, const TimeGrid& tg,
                                 const AdjointTrajectory& adj, const ControlTrajectory& u,
                                 double b0);

}  // namespace chb
