#include "chb/adjoint.hpp"

#include <string>

#include "chb/errors.hpp"
#include "chb/linear_solver.hpp"

namespace chb {

void CostSpec::validate(const Geometry& geom, const TimeGrid& tg) const {
  if (bQ < 0 || bSigma < 0 || b0 < 0 || bOmega < 0 || bGamma < 0)
    throw ConfigError("cost weights must be nonnegative");
  if (bQ == 0 && bSigma == 0 && b0 == 0 && bOmega == 0 && bGamma == 0)
    throw ConfigError("cost weights must not all vanish");
  if (bOmega != 0 || bGamma != 0)
    throw CompatibilityViolated("b_Omega and b_Gamma must be zero");
  if (static_cast<int>(zQ.size()) != tg.nt + 1 || static_cast<int>(zSigma.size()) != tg.nt + 1)
    throw ConfigError("cost targets must have nt+1 nodes");
  if (tg.nt >= 1 && (zQ[1].size() != geom.nBulk() || zSigma[1].size() != geom.nBdry()))
    throw ConfigError("cost target fields have wrong size");
}

AdjointTrajectory solveAdjoint(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const StateTrajectory& state,
                               const CostSpec& cost, const LinearSolveOptions& opts) {
  cost.validate(geom, tg);
  const int n = geom.nBulk();
  const int nt = tg.nt;
  const double dt = tg.dt();
  const auto& w8 = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();

  const auto coeff = linearizeAlong(geom, pot, state);

  AdjointTrajectory adj;
  adj.p.assign(nt + 1, Vec::Zero(n));
  adj.q.assign(nt + 1, Vec::Zero(n));

  StepSolver solver;
  Vec pNext = Vec::Zero(n);  // (p+q)(T) = 0 and q_Gamma(T) = 0 under compatibility
  Vec qNext = Vec::Zero(n);
  for (int k = nt; k >= 1; --k) {
    SpMat At = assembleStepMatrix(geom, dt, coeff.lambda[k], coeff.lambdaG[k], true);
    solver.factor(At, k);

    Vec r1 = w8.cwiseProduct(cost.bQ * (state.y[k] - cost.zQ[k])) + w8.cwiseProduct(pNext) / dt;
    const Vec yG = geom.trace(state.y[k]);
    const Vec qNextG = geom.trace(qNext);
    for (int g = 0; g < geom.nBdry(); ++g)
      r1[bidx[g]] += bw[g] * (cost.bSigma * (yG[g] - cost.zSigma[k][g]) + qNextG[g] / dt);
    r1 += w8.cwiseProduct(qNext) / dt;

    Vec rhs(2 * n);
    rhs.head(n) = r1;
    rhs.tail(n).setZero();
    Vec sol = solver.solve(rhs, k);
    if (opts.checkResidual) {
      const double res = (At * sol - rhs).norm();
      if (res > opts.linTol * std::max(1.0, rhs.norm()))
        throw LinearSolveFailed("adjoint residual " + std::to_string(res), k);
    }
    Vec p = sol.head(n);
    Vec q = sol.tail(n);
    // Per-node gauge: store p mean-free. The shift propagates through the
    // recursion as the same additive constant and leaves q untouched.
    p.array() -= geom.meanValue(p);
    pNext = p;
    qNext = q;
    adj.p[k] = std::move(p);
    adj.q[k] = std::move(q);
  }
  return adj;
}

std::vector<Vec> reducedGradient(const Geometry& geom, const TimeGrid& tg,
                                 const AdjointTrajectory& adj, const ControlTrajectory& u,
                                 double b0) {
  std::vector<Vec> grad(tg.nt + 1, Vec::Zero(geom.nBdry()));
  for (int k = 1; k <= tg.nt; ++k) grad[k] = geom.trace(adj.q[k]) + b0 * u[k];
  return grad;
}

}  // namespace chb
