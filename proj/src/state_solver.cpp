#include "chb/state_solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chb/errors.hpp"
#include "chb/linear_solver.hpp"

namespace chb {

namespace {

Vec applyBulkDerivative(const PotentialPair& pot, int order, const Vec& y) {
  Vec out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) out[i] = pot.evalBulk(order, y[i]);
  return out;
}

Vec applyBdryDerivative(const PotentialPair& pot, int order, const Vec& yG) {
  Vec out(yG.size());
  for (Eigen::Index i = 0; i < yG.size(); ++i) out[i] = pot.evalBdry(order, yG[i]);
  return out;
}

bool insideDomain(const PotentialPair& pot, const Vec& y) {
  if (!std::isfinite(pot.rMinus())) return y.allFinite();
  return y.allFinite() && y.minCoeff() > pot.rMinus() && y.maxCoeff() < pot.rPlus();
}

struct StepContext {
  const Geometry& geom;
  const TimeGrid& tg;
  const PotentialPair& pot;
  const Vec* uK = nullptr;  // boundary control at the implicit node
  const Vec* f1 = nullptr;  // forcing fields, may be null
  const Vec* f2 = nullptr;
  const Vec* f3 = nullptr;
};

// Weak-form residual blocks of one backward Euler step at iterate (y, w).
void stepResidual(const StepContext& cx, const Vec& y, const Vec& yPrev, const Vec& w,
                  Vec& r1, Vec& r2) {
  const auto& geom = cx.geom;
  const auto& w8 = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();
  const double dt = cx.tg.dt();

  r1 = w8.cwiseProduct(y - yPrev) / dt + geom.stiffness() * w;
  if (cx.f1) r1 -= w8.cwiseProduct(*cx.f1);

  const Vec yG = geom.trace(y);
  const Vec yGPrev = geom.trace(yPrev);
  r2 = w8.cwiseProduct(y - yPrev) / dt + geom.stiffness() * y +
       w8.cwiseProduct(applyBulkDerivative(cx.pot, 1, y)) - w8.cwiseProduct(w);
  const Vec kg = geom.bdryStiffness() * yG;
  const Vec fg = applyBdryDerivative(cx.pot, 1, yG);
  for (int g = 0; g < geom.nBdry(); ++g) {
    const int i = bidx[g];
    double src = (*cx.uK)[g];
    if (cx.f3) src += (*cx.f3)[g];
    r2[i] += bw[g] * ((yG[g] - yGPrev[g]) / dt + fg[g] - src) + kg[g];
  }
  if (cx.f2) r2 -= w8.cwiseProduct(*cx.f2);
}

double residualNorm(const Geometry& geom, const Vec& r1, const Vec& r2) {
  // Dual-norm surrogate: the H-representatives of the residual functionals.
  const Vec inv = geom.weights().cwiseInverse();
  return std::sqrt(r1.cwiseProduct(inv).dot(r1) + r2.cwiseProduct(inv).dot(r2));
}

}  // namespace

ControlTrajectory zeroControl(const Geometry& geom, const TimeGrid& tg) {
  return ControlTrajectory(tg.nt + 1, Vec::Zero(geom.nBdry()));
}

double freeEnergy(const Geometry& geom, const PotentialPair& pot, const Vec& y) {
  const Vec yG = geom.trace(y);
  double e = 0.5 * geom.dirichletForm(y, y) + 0.5 * geom.bdryDirichletForm(yG, yG);
  for (Eigen::Index i = 0; i < y.size(); ++i) e += geom.weights()[i] * pot.evalBulk(0, y[i]);
  for (int g = 0; g < geom.nBdry(); ++g) e += geom.bdryWeights()[g] * pot.evalBdry(0, yG[g]);
  return e;
}

StateTrajectory solveState(const Geometry& geom, const TimeGrid& tg, const PotentialPair& pot,
                           const Vec& y0, const ControlTrajectory& u,
                           const StateSolveOptions& opts) {
  const int n = geom.nBulk();
  const int nt = tg.nt;
  const double dt = tg.dt();
  const auto& w8 = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();

  if (y0.size() != n) throw ConfigError("state.y0: wrong size");
  if (!insideDomain(pot, y0))
    throw SeparationLost(0, "initial datum violates r- < y0 < r+");
  if (static_cast<int>(u.size()) != nt + 1)
    throw ConfigError("control trajectory must have nt+1 nodes");

  StateTrajectory out;
  out.y.assign(nt + 1, Vec::Zero(n));
  out.w.assign(nt + 1, Vec::Zero(n));
  out.steps.resize(nt);
  out.y[0] = y0;
  out.m0 = geom.meanValue(y0);
  double expectedMean = out.m0;

  auto separation = [&](const Vec& y) {
    if (!std::isfinite(pot.rMinus())) return std::numeric_limits<double>::infinity();
    return std::min(y.minCoeff() - pot.rMinus(), pot.rPlus() - y.maxCoeff());
  };
  out.minSeparation = separation(y0);

  // Consistent chemical potential at the initial node (diagnostic value).
  {
    const Vec yG = geom.trace(y0);
    Vec mw = geom.stiffness() * y0 + w8.cwiseProduct(applyBulkDerivative(pot, 1, y0));
    const Vec kg = geom.bdryStiffness() * yG;
    const Vec fg = applyBdryDerivative(pot, 1, yG);
    for (int g = 0; g < geom.nBdry(); ++g) mw[bidx[g]] += bw[g] * fg[g] + kg[g];
    out.w[0] = mw.cwiseQuotient(w8);
  }

  double prevEnergy = opts.trackEnergy ? freeEnergy(geom, pot, y0) : 0.0;

  StepSolver solver;
  for (int k = 1; k <= nt; ++k) {
    StepContext cx{geom, tg, pot, &u[k], nullptr, nullptr, nullptr};
    if (opts.forcing) {
      if (!opts.forcing->massBulk.empty()) cx.f1 = &opts.forcing->massBulk[k];
      if (!opts.forcing->potentialBulk.empty()) cx.f2 = &opts.forcing->potentialBulk[k];
      if (!opts.forcing->potentialBdry.empty()) cx.f3 = &opts.forcing->potentialBdry[k];
    }

    const Vec& yPrev = out.y[k - 1];
    Vec y = yPrev;
    Vec w = (k == 1) ? out.w[0] : out.w[k - 1];

    Vec r1, r2;
    stepResidual(cx, y, yPrev, w, r1, r2);
    double res = residualNorm(geom, r1, r2);
    std::vector<double> history{res};

    int iter = 0;
    bool tail = true;
    while (res > opts.newtonTol) {
      if (iter >= opts.newtonMaxIter)
        throw NewtonDiverged(k, history,
                             "step " + std::to_string(k) + " stalled at residual " +
                                 std::to_string(res));
      const Vec lam = applyBulkDerivative(pot, 2, y);
      const Vec lamG = applyBdryDerivative(pot, 2, geom.trace(y));
      SpMat A = assembleStepMatrix(geom, dt, lam, lamG, false);
      solver.factor(A, k);
      Vec rhs(2 * n);
      rhs.head(n) = -r1;
      rhs.tail(n) = -r2;
      const Vec d = solver.solve(rhs, k);

      double alpha = 1.0;
      int bt = 0;
      Vec yTrial, wTrial, r1t, r2t;
      double resTrial = 0.0;
      for (;; ++bt) {
        if (bt > opts.maxBacktrack) {
          if (!insideDomain(pot, y + alpha * d.head(n)))
            throw SeparationLost(k, "Newton iterate left the potential domain");
          throw NewtonDiverged(k, history, "line search failed at step " + std::to_string(k));
        }
        yTrial = y + alpha * d.head(n);
        wTrial = w + alpha * d.tail(n);
        if (insideDomain(pot, yTrial)) {
          stepResidual(cx, yTrial, yPrev, wTrial, r1t, r2t);
          resTrial = residualNorm(geom, r1t, r2t);
          if (resTrial <= res * (1.0 - 1e-4 * alpha) || resTrial <= opts.newtonTol) break;
        }
        alpha *= 0.5;
      }
      y.swap(yTrial);
      w.swap(wTrial);
      r1.swap(r1t);
      r2.swap(r2t);
      // Quadratic-tail audit once the residual is small.
      if (res < 1e-3 && resTrial > 0.3 * res) tail = false;
      res = resTrial;
      history.push_back(res);
      ++iter;
    }

    out.y[k] = y;
    out.w[k] = w;
    out.steps[k - 1].iterations = iter;
    out.steps[k - 1].residual = res;
    out.steps[k - 1].quadraticTail = tail;
    out.minSeparation = std::min(out.minSeparation, separation(y));

    // Conservation: testing the mass equation with v = 1 is exact, so any
    // drift beyond forcing is a solver failure.
    if (cx.f1) expectedMean += dt * geom.meanValue(*cx.f1);
    const double mean = geom.meanValue(y);
    if (std::abs(mean - expectedMean) > opts.conservationTol * std::max(1.0, std::abs(out.m0)))
      throw AssertionError("mass conservation violated at step " + std::to_string(k) +
                           ": drift " + std::to_string(mean - expectedMean));

    if (opts.trackEnergy) {
      const double e = freeEnergy(geom, pot, y);
      if (e > prevEnergy + 1e-10 * (1.0 + std::abs(prevEnergy))) ++out.energyViolations;
      prevEnergy = e;
    }
  }
  return out;
}

StabilityReport stabilityProbe(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const Vec& y0,
                               const ControlTrajectory& u1, const ControlTrajectory& u2,
                               const StateSolveOptions& opts) {
  StabilityReport rep;
  std::vector<Vec> diffU(tg.nt + 1, Vec::Zero(geom.nBdry()));
  for (int k = 0; k <= tg.nt; ++k) diffU[k] = u1[k] - u2[k];
  rep.controlDistance = normL2Sigma(geom, tg, diffU);
  if (rep.controlDistance == 0.0) {
    rep.identicalInputs = true;
    return rep;
  }
  const StateTrajectory s1 = solveState(geom, tg, pot, y0, u1, opts);
  const StateTrajectory s2 = solveState(geom, tg, pot, y0, u2, opts);
  std::vector<Vec> diff(tg.nt + 1);
  for (int k = 0; k <= tg.nt; ++k) diff[k] = s1.y[k] - s2.y[k];
  rep.stateDistance = trajectoryNorms(geom, tg, diff).y;
  rep.ratio = rep.stateDistance / rep.controlDistance;
  return rep;
}

}  // namespace chb
