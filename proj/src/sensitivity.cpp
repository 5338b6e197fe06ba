#include "chb/sensitivity.hpp"

namespace chb {

LinearizedCoefficients linearizeAlong(const Geometry& geom, const PotentialPair& pot,
                                      const StateTrajectory& state) {
  const int nt = static_cast<int>(state.y.size()) - 1;
  LinearizedCoefficients c;
  c.lambda.assign(nt + 1, Vec::Zero(geom.nBulk()));
  c.lambdaG.assign(nt + 1, Vec::Zero(geom.nBdry()));
  for (int k = 1; k <= nt; ++k) {
    const Vec& y = state.y[k];
    Vec lam(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) lam[i] = pot.evalBulk(2, y[i]);
    c.lambda[k] = std::move(lam);
    const Vec yG = geom.trace(y);
    Vec lamG(yG.size());
    for (Eigen::Index i = 0; i < yG.size(); ++i) lamG[i] = pot.evalBdry(2, yG[i]);
    c.lambdaG[k] = std::move(lamG);
  }
  return c;
}

std::vector<SensitivityTrajectory> applyDSBatch(const Geometry& geom, const TimeGrid& tg,
                                                const PotentialPair& pot,
                                                const StateTrajectory& state,
                                                const std::vector<ControlTrajectory>& hs,
                                                const LinearSolveOptions& opts) {
  const auto coeff = linearizeAlong(geom, pot, state);
  std::vector<LinearSources> sources;
  sources.reserve(hs.size());
  for (const auto& h : hs) {
    LinearSources s;
    s.gG = h;
    s.chi0 = Vec::Zero(geom.nBulk());
    sources.push_back(std::move(s));
  }
  return solveLinearBatch(geom, tg, coeff.lambda, coeff.lambdaG, sources, opts);
}

SensitivityTrajectory applyDS(const Geometry& geom, const TimeGrid& tg,
                              const PotentialPair& pot, const StateTrajectory& state,
                              const ControlTrajectory& h, const LinearSolveOptions& opts) {
  auto v = applyDSBatch(geom, tg, pot, state, {h}, opts);
  return std::move(v.front());
}

SensitivityTrajectory applyD2SFrom(const Geometry& geom, const TimeGrid& tg,
                                   const PotentialPair& pot, const StateTrajectory& state,
                                   const SensitivityTrajectory& phi,
                                   const SensitivityTrajectory& psi,
                                   const LinearSolveOptions& opts) {
  const int nt = tg.nt;
  const auto coeff = linearizeAlong(geom, pot, state);
  LinearSources src;
  src.g.assign(nt + 1, Vec::Zero(geom.nBulk()));
  src.gG.assign(nt + 1, Vec::Zero(geom.nBdry()));
  src.chi0 = Vec::Zero(geom.nBulk());
  for (int k = 1; k <= nt; ++k) {
    const Vec& y = state.y[k];
    Vec g(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
      g[i] = pot.evalBulk(3, y[i]) * phi.chi[k][i] * psi.chi[k][i];
    src.g[k] = std::move(g);
    const Vec yG = geom.trace(y);
    const Vec phiG = geom.trace(phi.chi[k]);
    const Vec psiG = geom.trace(psi.chi[k]);
    Vec gG(yG.size());
    for (Eigen::Index i = 0; i < yG.size(); ++i)
      gG[i] = -pot.evalBdry(3, yG[i]) * phiG[i] * psiG[i];
    src.gG[k] = std::move(gG);
  }
  auto v = solveLinearBatch(geom, tg, coeff.lambda, coeff.lambdaG, {std::move(src)}, opts);
  return std::move(v.front());
}

SensitivityTrajectory applyD2S(const Geometry& geom, const TimeGrid& tg,
                               const PotentialPair& pot, const StateTrajectory& state,
                               const ControlTrajectory& h, const ControlTrajectory& k,
                               const LinearSolveOptions& opts) {
  auto inner = applyDSBatch(geom, tg, pot, state, {h, k}, opts);
  return applyD2SFrom(geom, tg, pot, state, inner[0], inner[1], opts);
}

}  // namespace chb
