#include "chb/linear_solver.hpp"

#include <string>

#include "chb/errors.hpp"

namespace chb {

SpMat assembleStepMatrix(const Geometry& geom, double dt, const Vec& lambda,
                         const Vec& lambdaG, bool transpose) {
  const int n = geom.nBulk();
  const auto& K = geom.stiffness();
  const auto& KG = geom.bdryStiffness();
  const auto& w = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();

  // Row/column offsets of the two blocks; swapping off-diagonals transposes.
  const int r12 = transpose ? n : 0, c12 = transpose ? 0 : n;
  const int r21 = transpose ? 0 : n, c21 = transpose ? n : 0;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * K.nonZeros() + KG.nonZeros() + 4 * n);

  for (int c = 0; c < K.outerSize(); ++c)
    for (SpMat::InnerIterator it(K, c); it; ++it) {
      const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      trips.emplace_back(i + r12, j + c12, it.value());  // K block
      trips.emplace_back(i + r21, j + c21, it.value());  // K part of C
    }
  for (int c = 0; c < KG.outerSize(); ++c)
    for (SpMat::InnerIterator it(KG, c); it; ++it)
      trips.emplace_back(bidx[it.row()] + r21, bidx[it.col()] + c21, it.value());

  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, i, w[i] / dt);                          // M/dt
    trips.emplace_back(i + n, i + n, -w[i]);                      // -M
    trips.emplace_back(i + r21, i + c21, w[i] * (1.0 / dt + lambda[i]));
  }
  for (int g = 0; g < geom.nBdry(); ++g) {
    const int i = bidx[g];
    trips.emplace_back(i + r21, i + c21, bw[g] * (1.0 / dt + lambdaG[g]));
  }

  SpMat A(2 * n, 2 * n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

void StepSolver::factor(const SpMat& A, int step) {
  if (!analyzed_) {
    lu_.analyzePattern(A);
    analyzed_ = true;
  }
  lu_.factorize(A);
  if (lu_.info() != Eigen::Success)
    throw LinearSolveFailed("step matrix factorization failed", step);
}

Vec StepSolver::solve(const Vec& rhs, int step) const {
  Vec x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw LinearSolveFailed("triangular solve failed", step);
  return x;
}

Eigen::MatrixXd StepSolver::solve(const Eigen::MatrixXd& rhs, int step) const {
  Eigen::MatrixXd x = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw LinearSolveFailed("triangular solve failed", step);
  return x;
}

std::vector<LinearTrajectory> solveLinearBatch(const Geometry& geom, const TimeGrid& tg,
                                               const std::vector<Vec>& lambda,
                                               const std::vector<Vec>& lambdaG,
                                               const std::vector<LinearSources>& sources,
                                               const LinearSolveOptions& opts) {
  const int n = geom.nBulk();
  const int nt = tg.nt;
  const double dt = tg.dt();
  const auto& w = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();
  const int m = static_cast<int>(sources.size());

  std::vector<LinearTrajectory> out(m);
  for (int s = 0; s < m; ++s) {
    out[s].chi.assign(nt + 1, Vec::Zero(n));
    out[s].mu.assign(nt + 1, Vec::Zero(n));
    out[s].chi[0] = sources[s].chi0.size() ? sources[s].chi0 : Vec::Zero(n);
  }

  StepSolver solver;
  Eigen::MatrixXd rhs(2 * n, m), sol;
  for (int k = 1; k <= nt; ++k) {
    SpMat A = assembleStepMatrix(geom, dt, lambda[k], lambdaG[k], false);
    solver.factor(A, k);
    for (int s = 0; s < m; ++s) {
      const Vec& prev = out[s].chi[k - 1];
      Vec r1 = w.cwiseProduct(prev) / dt;
      Vec r2 = w.cwiseProduct(prev) / dt;
      for (int g = 0; g < geom.nBdry(); ++g) r2[bidx[g]] += bw[g] * prev[bidx[g]] / dt;
      if (!sources[s].g.empty()) r2 -= w.cwiseProduct(sources[s].g[k]);
      if (!sources[s].gG.empty())
        for (int g = 0; g < geom.nBdry(); ++g) r2[bidx[g]] += bw[g] * sources[s].gG[k][g];
      rhs.col(s).head(n) = r1;
      rhs.col(s).tail(n) = r2;
    }
    sol = solver.solve(rhs, k);
    for (int s = 0; s < m; ++s) {
      out[s].chi[k] = sol.col(s).head(n);
      out[s].mu[k] = sol.col(s).tail(n);
      if (opts.checkResidual) {
        const double res = (A * sol.col(s) - rhs.col(s)).norm();
        if (res > opts.linTol * std::max(1.0, rhs.col(s).norm()))
          throw LinearSolveFailed("residual " + std::to_string(res) + " at step " +
                                      std::to_string(k),
                                  k);
      }
    }
  }
  return out;
}

LinearTrajectory solveLinear(const Geometry& geom, const TimeGrid& tg,
                             const LinearSystemData& sys, const LinearSolveOptions& opts) {
  LinearSources src{sys.g, sys.gG, sys.chi0};
  auto v = solveLinearBatch(geom, tg, sys.lambda, sys.lambdaG, {std::move(src)}, opts);
  return std::move(v.front());
}

OperatorResidual applyOperator(const Geometry& geom, const TimeGrid& tg,
                               const LinearSystemData& sys, const LinearTrajectory& traj) {
  const int n = geom.nBulk();
  const int nt = tg.nt;
  const double dt = tg.dt();
  const auto& w = geom.weights();
  const auto& bw = geom.bdryWeights();
  const auto& bidx = geom.bdryIndex();
  const auto& K = geom.stiffness();
  const auto& KG = geom.bdryStiffness();

  OperatorResidual out;
  out.r1.assign(nt + 1, Vec::Zero(n));
  out.r2.assign(nt + 1, Vec::Zero(n));
  for (int k = 1; k <= nt; ++k) {
    const Vec& chi = traj.chi[k];
    const Vec& prev = traj.chi[k - 1];
    const Vec& mu = traj.mu[k];
    Vec r1 = w.cwiseProduct(chi - prev) / dt + K * mu;
    Vec r2 = w.cwiseProduct(chi - prev) / dt + K * chi +
             w.cwiseProduct(sys.lambda[k].cwiseProduct(chi)) - w.cwiseProduct(mu);
    const Vec chiG = geom.trace(chi);
    const Vec prevG = geom.trace(prev);
    const Vec kg = KG * chiG;
    for (int g = 0; g < geom.nBdry(); ++g) {
      const int i = bidx[g];
      r2[i] += bw[g] * ((chiG[g] - prevG[g]) / dt + sys.lambdaG[k][g] * chiG[g]) + kg[g];
    }
    if (!sys.g.empty()) r2 += w.cwiseProduct(sys.g[k]);
    if (!sys.gG.empty())
      for (int g = 0; g < geom.nBdry(); ++g) r2[bidx[g]] -= bw[g] * sys.gG[k][g];
    out.maxNorm = std::max(out.maxNorm, std::max(r1.cwiseAbs().maxCoeff(),
                                                 r2.cwiseAbs().maxCoeff()));
    out.r1[k] = std::move(r1);
    out.r2[k] = std::move(r2);
  }
  return out;
}

}  // namespace chb
