#pragma once

#include <vector>

#include "chb/adjoint.hpp"
#include "chb/sensitivity.hpp"
#include "chb/state_solver.hpp"

namespace chb {

/// Problem bundle threaded through the reduced-functional machinery.
struct Problem {
  const Geometry* geom = nullptr;
  const TimeGrid* tg = nullptr;
  const PotentialPair* pot = nullptr;
  Vec y0;
  CostSpec cost;
  StateSolveOptions stateOpts;
  LinearSolveOptions linOpts;
};

/// Value of the reduced cost at a precomputed state.
double evalJ(const Problem& pb, const ControlTrajectory& u, const StateTrajectory& state);

/// Convenience: solves the state, then evaluates.
double evalJ(const Problem& pb, const ControlTrajectory& u);

/// State + adjoint + gradient bundle at one control.
struct EvalRecord {
  double J = 0.0;
  StateTrajectory state;
  AdjointTrajectory adjoint;
  std::vector<Vec> gradient;  // q_Gamma + b0 u, nodes 1..nt
};

EvalRecord evaluate(const Problem& pb, const ControlTrajectory& u);

/// Hessian quadratic/bilinear form via the adjoint representation:
/// b0<h,k> + int_Q (bQ - q f''') phi_h phi_k + int_Sigma (bS - qG fG''') ...
double hessianForm(const Problem& pb, const EvalRecord& at, const SensitivityTrajectory& phiH,
                   const SensitivityTrajectory& phiK, const ControlTrajectory& h,
                   const ControlTrajectory& k);

double hessianForm(const Problem& pb, const EvalRecord& at, const ControlTrajectory& h,
                   const ControlTrajectory& k);

/// Diagonal forms for many directions with a single batched DS sweep.
std::vector<double> hessianQuadraticBatch(const Problem& pb, const EvalRecord& at,
                                          const std::vector<ControlTrajectory>& dirs);

/// Independent route through the second-order sensitivity system:
/// D_y J . D^2S[h,k] + bQ<phi_h,phi_k>_Q + bS<...>_Sigma + b0<h,k>_Sigma.
double hessianFormViaD2S(const Problem& pb, const EvalRecord& at, const ControlTrajectory& h,
                         const ControlTrajectory& k);

struct TaylorRow {
  double eps = 0.0;
  double remainder = 0.0;
};

struct TaylorReport {
  std::vector<TaylorRow> rows;
  double slope = 0.0;  // log-log least-squares slope
};

/// First- and second-order Taylor remainders of S in the Y-norm.
TaylorReport taylorStateFirst(const Problem& pb, const ControlTrajectory& u,
                              const ControlTrajectory& h, const std::vector<double>& eps);
TaylorReport taylorStateSecond(const Problem& pb, const ControlTrajectory& u,
                               const ControlTrajectory& h, const std::vector<double>& eps);

/// Cubic remainder of the reduced cost:
/// R = J(u+eps v) - J(u) - eps DJ v - eps^2/2 D2J[v,v].
TaylorReport taylorReducedCost(const Problem& pb, const ControlTrajectory& u,
                               const ControlTrajectory& v, const std::vector<double>& eps);

double logLogSlope(const std::vector<TaylorRow>& rows);

/// Elementwise trajectory helpers.
ControlTrajectory axpy(const ControlTrajectory& u, double eps, const ControlTrajectory& h);

}  // namespace chb
