#pragma once

#include <optional>
#include <vector>

#include "chb/geometry.hpp"
#include "chb/potentials.hpp"

namespace chb {

/// Boundary control trajectory on Sigma, node-indexed 0..nt (node 0 unused by
/// the backward Euler dynamics).
using ControlTrajectory = std::vector<Vec>;

ControlTrajectory zeroControl(const Geometry& geom, const TimeGrid& tg);

/// Per-step Newton diagnostics.
struct StepDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool quadraticTail = true;  // warn-only: superlinear contraction observed
};

struct StateTrajectory {
  std::vector<Vec> y;  // nodes 0..nt, bulk order parameter
  std::vector<Vec> w;  // nodes 0..nt, chemical potential (node 0 consistent init)
  double m0 = 0.0;     // conserved mean
  std::vector<StepDiagnostics> steps;  // size nt
  double minSeparation = 0.0;  // min distance of y to the potential endpoints
  int energyViolations = 0;    // warn-only count (u = 0 runs)
};

/// Manufactured-solution forcing hooks (test instrumentation): bulk source in
/// the mass equation, bulk and boundary sources in the potential equation.
struct StateForcing {
  std::vector<Vec> massBulk;       // F1, nodes 0..nt
  std::vector<Vec> potentialBulk;  // F2
  std::vector<Vec> potentialBdry;  // F3 (adds to the control)
};

struct StateSolveOptions {
  double newtonTol = 1e-10;
  int newtonMaxIter = 30;
  int maxBacktrack = 30;
  double linTol = 1e-10;
  double conservationTol = 1e-10;
  bool trackEnergy = false;  // free-energy monotonicity audit (u = 0)
  const StateForcing* forcing = nullptr;
};

/// Implicit backward Euler with a coupled Newton solve per step over (y, w).
/// Initial datum must satisfy r- < y0 < r+ pointwise.
StateTrajectory solveState(const Geometry& geom, const TimeGrid& tg,
                           const PotentialPair& pot, const Vec& y0,
                           const ControlTrajectory& u,
                           const StateSolveOptions& opts = {});

/// Discrete free energy at one node: bulk + surface Dirichlet plus potentials.
double freeEnergy(const Geometry& geom, const PotentialPair& pot, const Vec& y);

struct StabilityReport {
  bool identicalInputs = false;
  double stateDistance = 0.0;    // ||S(u1) - S(u2)||_Y
  double controlDistance = 0.0;  // ||u1 - u2||_{L2(Sigma)}
  double ratio = 0.0;
};

/// Empirical Lipschitz probe for the control-to-state map.
StabilityReport stabilityProbe(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const Vec& y0,
                               const ControlTrajectory& u1, const ControlTrajectory& u2,
                               const StateSolveOptions& opts = {});

}  // namespace chb
