#include "chb/reduced_functional.hpp"

#include <cmath>

#include "chb/errors.hpp"

namespace chb {

double evalJ(const Problem& pb, const ControlTrajectory& u, const StateTrajectory& state) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const auto& c = pb.cost;
  double acc = 0.0;
  for (int k = 1; k <= tg.nt; ++k) {
    if (c.bQ != 0) {
      const Vec r = state.y[k] - c.zQ[k];
      acc += tg.dt() * c.bQ * g.innerBulk(r, r);
    }
    if (c.bSigma != 0) {
      const Vec r = g.trace(state.y[k]) - c.zSigma[k];
      acc += tg.dt() * c.bSigma * g.innerBdry(r, r);
    }
    if (c.b0 != 0) acc += tg.dt() * c.b0 * g.innerBdry(u[k], u[k]);
  }
  return 0.5 * acc;
}

double evalJ(const Problem& pb, const ControlTrajectory& u) {
  const StateTrajectory st = solveState(*pb.geom, *pb.tg, *pb.pot, pb.y0, u, pb.stateOpts);
  return evalJ(pb, u, st);
}

EvalRecord evaluate(const Problem& pb, const ControlTrajectory& u) {
  EvalRecord rec;
  rec.state = solveState(*pb.geom, *pb.tg, *pb.pot, pb.y0, u, pb.stateOpts);
  rec.J = evalJ(pb, u, rec.state);
  rec.adjoint = solveAdjoint(*pb.geom, *pb.tg, *pb.pot, rec.state, pb.cost, pb.linOpts);
  rec.gradient = reducedGradient(*pb.geom, *pb.tg, rec.adjoint, u, pb.cost.b0);
  return rec;
}

double hessianForm(const Problem& pb, const EvalRecord& at, const SensitivityTrajectory& phiH,
                   const SensitivityTrajectory& phiK, const ControlTrajectory& h,
                   const ControlTrajectory& k) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const auto& pot = *pb.pot;
  const auto& c = pb.cost;
  double acc = c.b0 * innerL2Sigma(g, tg, h, k);
  for (int s = 1; s <= tg.nt; ++s) {
    const Vec& y = at.state.y[s];
    const Vec& q = at.adjoint.q[s];
    Vec wQ(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      wQ[i] = c.bQ - q[i] * pot.evalBulk(3, y[i]);
    acc += tg.dt() * g.innerBulk(wQ.cwiseProduct(phiH.chi[s]), phiK.chi[s]);

    const Vec yG = g.trace(y);
    const Vec qG = g.trace(q);
    const Vec phiHG = g.trace(phiH.chi[s]);
    const Vec phiKG = g.trace(phiK.chi[s]);
    Vec wS(yG.size());
    for (Eigen::Index i = 0; i < yG.size(); ++i)
      wS[i] = c.bSigma - qG[i] * pot.evalBdry(3, yG[i]);
    acc += tg.dt() * g.innerBdry(wS.cwiseProduct(phiHG), phiKG);
  }
  return acc;
}

double hessianForm(const Problem& pb, const EvalRecord& at, const ControlTrajectory& h,
                   const ControlTrajectory& k) {
  auto inner = applyDSBatch(*pb.geom, *pb.tg, *pb.pot, at.state, {h, k}, pb.linOpts);
  return hessianForm(pb, at, inner[0], inner[1], h, k);
}

std::vector<double> hessianQuadraticBatch(const Problem& pb, const EvalRecord& at,
                                          const std::vector<ControlTrajectory>& dirs) {
  auto phis = applyDSBatch(*pb.geom, *pb.tg, *pb.pot, at.state, dirs, pb.linOpts);
  std::vector<double> out(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i)
    out[i] = hessianForm(pb, at, phis[i], phis[i], dirs[i], dirs[i]);
  return out;
}

double hessianFormViaD2S(const Problem& pb, const EvalRecord& at, const ControlTrajectory& h,
                         const ControlTrajectory& k) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const auto& c = pb.cost;
  auto inner = applyDSBatch(g, tg, *pb.pot, at.state, {h, k}, pb.linOpts);
  const SensitivityTrajectory eta =
      applyD2SFrom(g, tg, *pb.pot, at.state, inner[0], inner[1], pb.linOpts);

  double acc = c.b0 * innerL2Sigma(g, tg, h, k);
  for (int s = 1; s <= tg.nt; ++s) {
    const Vec rQ = at.state.y[s] - c.zQ[s];
    acc += tg.dt() * c.bQ *
           (g.innerBulk(rQ, eta.chi[s]) + g.innerBulk(inner[0].chi[s], inner[1].chi[s]));
    const Vec yG = g.trace(at.state.y[s]);
    const Vec rS = yG - c.zSigma[s];
    acc += tg.dt() * c.bSigma *
           (g.innerBdry(rS, g.trace(eta.chi[s])) +
            g.innerBdry(g.trace(inner[0].chi[s]), g.trace(inner[1].chi[s])));
  }
  return acc;
}

double logLogSlope(const std::vector<TaylorRow>& rows) {
  // Least-squares fit of log(remainder) against log(eps).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : rows) {
    if (r.remainder <= 0 || r.eps <= 0) continue;
    const double x = std::log(r.eps), y = std::log(r.remainder);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ControlTrajectory axpy(const ControlTrajectory& u, double eps, const ControlTrajectory& h) {
  ControlTrajectory out(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] + eps * h[k];
  return out;
}

namespace {

double yNormOfDifference(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& a,
                         const std::vector<Vec>& b) {
  std::vector<Vec> d(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) d[k] = a[k] - b[k];
  return trajectoryNorms(g, tg, d).y;
}

}  // namespace

TaylorReport taylorStateFirst(const Problem& pb, const ControlTrajectory& u,
                              const ControlTrajectory& h, const std::vector<double>& eps) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const StateTrajectory base = solveState(g, tg, *pb.pot, pb.y0, u, pb.stateOpts);
  const SensitivityTrajectory ds = applyDS(g, tg, *pb.pot, base, h, pb.linOpts);

  TaylorReport rep;
  for (double e : eps) {
    const StateTrajectory pert =
        solveState(g, tg, *pb.pot, pb.y0, axpy(u, e, h), pb.stateOpts);
    std::vector<Vec> lin(tg.nt + 1);
    for (int k = 0; k <= tg.nt; ++k) lin[k] = base.y[k] + e * ds.chi[k];
    rep.rows.push_back({e, yNormOfDifference(g, tg, pert.y, lin)});
  }
  rep.slope = logLogSlope(rep.rows);
  return rep;
}

TaylorReport taylorStateSecond(const Problem& pb, const ControlTrajectory& u,
                               const ControlTrajectory& h, const std::vector<double>& eps) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const StateTrajectory base = solveState(g, tg, *pb.pot, pb.y0, u, pb.stateOpts);
  const SensitivityTrajectory ds = applyDS(g, tg, *pb.pot, base, h, pb.linOpts);
  const SensitivityTrajectory d2s =
      applyD2SFrom(g, tg, *pb.pot, base, ds, ds, pb.linOpts);

  TaylorReport rep;
  for (double e : eps) {
    const StateTrajectory pert =
        solveState(g, tg, *pb.pot, pb.y0, axpy(u, e, h), pb.stateOpts);
    std::vector<Vec> quad(tg.nt + 1);
    for (int k = 0; k <= tg.nt; ++k)
      quad[k] = base.y[k] + e * ds.chi[k] + 0.5 * e * e * d2s.chi[k];
    rep.rows.push_back({e, yNormOfDifference(g, tg, pert.y, quad)});
  }
  rep.slope = logLogSlope(rep.rows);
  return rep;
}

TaylorReport taylorReducedCost(const Problem& pb, const ControlTrajectory& u,
                               const ControlTrajectory& v, const std::vector<double>& eps) {
  const auto& g = *pb.geom;
  const auto& tg = *pb.tg;
  const EvalRecord rec = evaluate(pb, u);
  const double dJ = innerL2Sigma(g, tg, rec.gradient, v);
  const double d2J = hessianForm(pb, rec, v, v);

  TaylorReport rep;
  for (double e : eps) {
    const double Jp = evalJ(pb, axpy(u, e, v));
    const double rem = Jp - rec.J - e * dJ - 0.5 * e * e * d2J;
    rep.rows.push_back({e, std::abs(rem)});
  }
  rep.slope = logLogSlope(rep.rows);
  return rep;
}

}  // namespace chb
