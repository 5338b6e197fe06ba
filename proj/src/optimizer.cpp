#include "chb/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chb/errors.hpp"
#include "chb/util.hpp"

namespace chb {

AdmissibleSet AdmissibleSet::constantBounds(const Geometry& geom, const TimeGrid& tg, double lo,
                                            double hi, double M0) {
  AdmissibleSet adm;
  adm.uMin.assign(tg.nt + 1, Vec::Constant(geom.nBdry(), lo));
  adm.uMax.assign(tg.nt + 1, Vec::Constant(geom.nBdry(), hi));
  adm.M0 = M0;
  return adm;
}

void AdmissibleSet::validate(const Geometry& geom, const TimeGrid& tg) const {
  if (static_cast<int>(uMin.size()) != tg.nt + 1 || static_cast<int>(uMax.size()) != tg.nt + 1)
    throw ConfigError("admissible bounds must have nt+1 nodes");
  for (int k = 0; k <= tg.nt; ++k)
    if ((uMin[k].array() > uMax[k].array()).any())
      throw InfeasibleSet("u_min > u_max at node " + std::to_string(k));
  // Nonemptiness: the lower bound itself must satisfy the derivative budget.
  if (normDtL2Sigma(geom, tg, uMin) > M0 * (1.0 + 1e-12))
    throw InfeasibleSet("u_min violates the M0 derivative budget");
}

ProjectionResult project(const Geometry& geom, const TimeGrid& tg, const ControlTrajectory& v,
                         const AdmissibleSet& adm) {
  adm.validate(geom, tg);
  ProjectionResult out;
  out.u.resize(tg.nt + 1);
  for (int k = 0; k <= tg.nt; ++k) {
    out.u[k] = v[k].cwiseMax(adm.uMin[k]).cwiseMin(adm.uMax[k]);
    if (!out.clamped && (out.u[k] - v[k]).cwiseAbs().maxCoeff() > 0) out.clamped = true;
  }
  const double dnorm = normDtL2Sigma(geom, tg, out.u);
  if (dnorm > adm.M0) {
    out.budgetActive = true;
    // Rescale the temporal fluctuation about the per-point time mean, then
    // re-clamp once (documented approximate projection).
    const double s = adm.M0 / dnorm;
    Vec mean = Vec::Zero(geom.nBdry());
    for (int k = 1; k <= tg.nt; ++k) mean += out.u[k];
    mean /= tg.nt;
    for (int k = 0; k <= tg.nt; ++k) {
      out.u[k] = mean + s * (out.u[k] - mean);
      out.u[k] = out.u[k].cwiseMax(adm.uMin[k]).cwiseMin(adm.uMax[k]);
    }
  }
  return out;
}

double stationarityResidual(const Problem& pb, const AdmissibleSet& adm,
                            const ControlTrajectory& u, const std::vector<Vec>& grad) {
  const ControlTrajectory trial = project(*pb.geom, *pb.tg, axpy(u, -1.0, grad), adm).u;
  std::vector<Vec> d(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) d[k] = u[k] - trial[k];
  return normL2Sigma(*pb.geom, *pb.tg, d);
}

OptimizeResult optimize(const Problem& pb, const AdmissibleSet& adm,
                        const ControlTrajectory& init, const OptimizeOptions& opts) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;

  OptimizeResult res;
  auto proj0 = project(g, tg, init, adm);
  res.budgetEverActive = proj0.budgetActive;
  res.u = std::move(proj0.u);
  res.record = evaluate(pb, res.u);

  ControlTrajectory prevU;
  std::vector<Vec> prevGrad;
  double step = opts.initStep;

  for (int iter = 0;; ++iter) {
    const double resid = stationarityResidual(pb, adm, res.u, res.record.gradient);
    res.history.push_back({iter, res.record.J, resid, step});
    res.residual = resid;
    res.iterations = iter;
    if (iter == 0) res.history.back().step = 0.0;

    const double tol = opts.gtol * std::max(1.0, res.history.front().residual);
    if (resid <= tol) {
      res.converged = true;
      return res;
    }
    if (iter >= opts.maxIter) return res;  // soft failure: best iterate flagged

    // Trial step: spectral (Barzilai-Borwein) when history allows, otherwise
    // grow the last accepted step; always Armijo-safeguarded.
    double alpha = opts.initStep;
    if (iter > 0) {
      alpha = std::min(opts.maxStep, 2.0 * step);
      if (opts.useBarzilaiBorwein && !prevU.empty()) {
        std::vector<Vec> s(res.u.size()), yv(res.u.size());
        for (std::size_t k = 0; k < res.u.size(); ++k) {
          s[k] = res.u[k] - prevU[k];
          yv[k] = res.record.gradient[k] - prevGrad[k];
        }
        const double ss = innerL2Sigma(g, tg, s, s);
        const double sy = innerL2Sigma(g, tg, s, yv);
        if (sy > 1e-14 * ss) alpha = std::clamp(ss / sy, 1e-4, opts.maxStep);
      }
    }

    prevU = res.u;
    prevGrad = res.record.gradient;

    bool accepted = false;
    while (alpha >= 1e-12) {
      auto proj = project(g, tg, axpy(res.u, -alpha, res.record.gradient), adm);
      std::vector<Vec> d(res.u.size());
      for (std::size_t k = 0; k < res.u.size(); ++k) d[k] = res.u[k] - proj.u[k];
      const double decrease = innerL2Sigma(g, tg, res.record.gradient, d);
      StateTrajectory stTrial = solveState(g, tg, *pb.pot, pb.y0, proj.u, pb.stateOpts);
      const double JTrial = evalJ(pb, proj.u, stTrial);
      if (JTrial <= res.record.J - opts.armijoC * decrease) {
        res.budgetEverActive = res.budgetEverActive || proj.budgetActive;
        res.u = std::move(proj.u);
        res.record.state = std::move(stTrial);
        res.record.J = JTrial;
        res.record.adjoint = solveAdjoint(g, tg, *pb.pot, res.record.state, pb.cost, pb.linOpts);
        res.record.gradient = reducedGradient(g, tg, res.record.adjoint, res.u, pb.cost.b0);
        step = alpha;
        accepted = true;
        break;
      }
      alpha *= opts.armijoShrink;
    }
    if (!accepted) return res;  // line search exhausted; best iterate returned
  }
}

ActiveMask buildActiveSet(const Geometry& geom, const TimeGrid& tg,
                          const std::vector<Vec>& gradient, double tau) {
  if (tau <= 0) throw ConfigError("active-set threshold tau must be positive");
  ActiveMask mask(tg.nt + 1, std::vector<std::uint8_t>(geom.nBdry(), 0));
  for (int k = 1; k <= tg.nt; ++k)
    for (int g = 0; g < geom.nBdry(); ++g)
      mask[k][g] = std::abs(gradient[k][g]) > tau ? 1 : 0;
  return mask;
}

ConeSample sampleCriticalCone(const Geometry& geom, const TimeGrid& tg,
                              const ControlTrajectory& uBar, const ActiveMask& mask,
                              const AdmissibleSet& adm, int count, std::uint64_t seed,
                              double activityTolRel) {
  ConeSample out;
  Rng rng(seed);
  const int maxAttempts = 8 * count + 16;
  int attempts = 0;
  while (static_cast<int>(out.directions.size()) < count && attempts < maxAttempts) {
    ++attempts;
    auto h = smoothBoundaryField(geom, tg, rng, 1.0);
    h[0].setZero();
    for (int k = 1; k <= tg.nt; ++k) {
      for (int g = 0; g < geom.nBdry(); ++g) {
        if (mask[k][g]) {
          h[k][g] = 0.0;
          continue;
        }
        const double gap = adm.uMax[k][g] - adm.uMin[k][g];
        const double atol = activityTolRel * std::max(gap, 1e-30);
        if (uBar[k][g] - adm.uMin[k][g] <= atol && adm.uMax[k][g] - uBar[k][g] <= atol)
          h[k][g] = 0.0;  // degenerate gap
        else if (uBar[k][g] - adm.uMin[k][g] <= atol)
          h[k][g] = std::abs(h[k][g]);
        else if (adm.uMax[k][g] - uBar[k][g] <= atol)
          h[k][g] = -std::abs(h[k][g]);
      }
    }
    const double dnorm = normDtL2Sigma(geom, tg, h);
    if (dnorm > adm.M0)
      for (auto& v : h) v *= adm.M0 / dnorm;
    if (normL2Sigma(geom, tg, h) < 1e-14) continue;
    out.directions.push_back(std::move(h));
  }
  out.emptyCone = out.directions.empty();
  return out;
}

SSCReport sscCheck(const Problem& pb, const AdmissibleSet& adm, const ControlTrajectory& uBar,
                   const EvalRecord& at, const SSCOptions& opts) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  SSCReport rep;

  double gmax = 0.0;
  for (int k = 1; k <= tg.nt; ++k)
    gmax = std::max(gmax, at.gradient[k].cwiseAbs().maxCoeff());
  // Auto threshold: a fraction of the gradient range, floored so that the
  // solver-noise gradient of an interior optimum yields the empty active set
  // (and hence the full cone) instead of masking everything.
  rep.tau = opts.tau > 0 ? opts.tau : std::max(0.1 * gmax, 1e-6);

  const ActiveMask mask = buildActiveSet(g, tg, at.gradient, rep.tau);
  ConeSample cone = sampleCriticalCone(g, tg, uBar, mask, adm, opts.directions, opts.seed);
  rep.emptyCone = cone.emptyCone;
  if (!cone.emptyCone) {
    const auto d2 = hessianQuadraticBatch(pb, at, cone.directions);
    rep.quotients.resize(d2.size());
    rep.deltaHat = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d2.size(); ++i) {
      const double n2 = innerL2Sigma(g, tg, cone.directions[i], cone.directions[i]);
      rep.quotients[i] = d2[i] / n2;
      if (rep.quotients[i] < rep.deltaHat) {
        rep.deltaHat = rep.quotients[i];
        rep.minIndex = static_cast<int>(i);
      }
    }
    if (rep.minIndex >= 0) rep.minDirection = cone.directions[rep.minIndex];
  }

  // Local quadratic growth probe around uBar. Samples are independent state
  // solves over immutable inputs; results land by index for determinism.
  Rng rng(opts.seed + 1);
  std::vector<ControlTrajectory> probes(opts.growthSamples);
  for (int s = 0; s < opts.growthSamples; ++s) {
    auto d = smoothBoundaryField(g, tg, rng, 1.0);
    const double nx = normX(g, tg, d);
    const double rho = opts.growthRadiusX * (s + 1) / opts.growthSamples;
    probes[s] = project(g, tg, axpy(uBar, rho / nx, d), adm).u;
  }
  std::vector<GrowthRow> rows(opts.growthSamples);
  parallelFor(opts.growthSamples, opts.workers, [&](int s) {
    const auto& u = probes[s];
    std::vector<Vec> diff(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) diff[k] = u[k] - uBar[k];
    rows[s].distX = normX(g, tg, diff);
    rows[s].distSigma = normL2Sigma(g, tg, diff);
    if (rows[s].distSigma >= 1e-14) rows[s].deltaJ = evalJ(pb, u) - at.J;
  });
  rep.sigmaHat = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (row.distSigma < 1e-14) continue;
    rep.growth.push_back(row);
    rep.sigmaHat = std::min(rep.sigmaHat, row.deltaJ / (row.distSigma * row.distSigma));
  }
  if (rep.growth.empty()) rep.sigmaHat = 0.0;
  rep.growthHolds = rep.sigmaHat >= 0.0;
  return rep;
}

}  // namespace chb
