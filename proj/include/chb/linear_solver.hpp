#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <vector>

#include "chb/geometry.hpp"

namespace chb {

/// Data of the generic linear initial-boundary value problem
///   dt chi - Lap mu = 0,          mu = dt chi - Lap chi + lambda chi + g,
///   dt chi_G + dn chi - Lap_G chi_G + lambda_G chi_G = g_G,   chi(0) = chi0.
/// All trajectories are node-indexed 0..nt; node 0 of the coefficient and
/// source fields is unused (backward Euler reads nodes 1..nt).
struct LinearSystemData {
  std::vector<Vec> lambda;   // bulk coefficient
  std::vector<Vec> lambdaG;  // boundary coefficient
  std::vector<Vec> g;        // bulk source
  std::vector<Vec> gG;       // boundary source
  Vec chi0;                  // initial bulk field (trace-conforming by construction)
};

/// One solution trajectory of the generic system.
struct LinearTrajectory {
  std::vector<Vec> chi;  // nodes 0..nt
  std::vector<Vec> mu;   // nodes 0..nt, node 0 zero
};

/// Sources for one instance in a batched sweep sharing (lambda, lambdaG).
struct LinearSources {
  std::vector<Vec> g;
  std::vector<Vec> gG;
  Vec chi0;
};

/// One-step block matrix of the backward Euler scheme,
///   A = [ M/dt  K ; C  -M ],  C = (M+M_G)/dt + K + K_G + M diag(lambda)
///                                 + T^T B diag(lambda_G) T.
/// With transpose=true the off-diagonal blocks are swapped, which is the
/// algebraic transpose (all blocks are symmetric); the backward adjoint sweep
/// factors exactly this matrix.
SpMat assembleStepMatrix(const Geometry& geom, double dt, const Vec& lambda,
                         const Vec& lambdaG, bool transpose = false);

/// Sparse LU wrapper reusing the symbolic analysis across steps (the pattern
/// is constant for a fixed geometry).
class StepSolver {
public:
  void factor(const SpMat& A, int step);
  [[nodiscard]] Vec solve(const Vec& rhs, int step) const;
  [[nodiscard]] Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs, int step) const;

private:
  Eigen::SparseLU<SpMat> lu_;
  bool analyzed_ = false;
};

struct LinearSolveOptions {
  double linTol = 1e-10;
  bool checkResidual = true;
};

LinearTrajectory solveLinear(const Geometry& geom, const TimeGrid& tg,
                             const LinearSystemData& sys,
                             const LinearSolveOptions& opts = {});

/// Batched variant: all instances share the step matrices (single
/// factorization per step, multi-column solve).
std::vector<LinearTrajectory> solveLinearBatch(const Geometry& geom, const TimeGrid& tg,
                                               const std::vector<Vec>& lambda,
                                               const std::vector<Vec>& lambdaG,
                                               const std::vector<LinearSources>& sources,
                                               const LinearSolveOptions& opts = {});

/// Residual of the discrete operator applied to a trajectory: for each step k
/// returns r1^k = M(chi^k-chi^{k-1})/dt + K mu^k and
/// r2^k = C_k chi^k - M mu^k - (M+M_G)chi^{k-1}/dt + M g^k - T^T B g_G^k.
/// A trajectory produced by solveLinear has both residual blocks ~ 0.
struct OperatorResidual {
  std::vector<Vec> r1;  // nodes 1..nt (index 0 zero)
  std::vector<Vec> r2;
  double maxNorm = 0.0;
};

OperatorResidual applyOperator(const Geometry& geom, const TimeGrid& tg,
                               const LinearSystemData& sys, const LinearTrajectory& traj);

}  // namespace chb
