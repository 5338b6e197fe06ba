#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SparseLU>
#include <cmath>

#include "chb/linear_solver.hpp"
#include "chb/random_fields.hpp"

using namespace chb;

namespace {

LinearSystemData zeroSystem(const Geometry& g, const TimeGrid& tg) {
  LinearSystemData sys;
  sys.lambda.assign(tg.nt + 1, Vec::Zero(g.nBulk()));
  sys.lambdaG.assign(tg.nt + 1, Vec::Zero(g.nBdry()));
  sys.g.assign(tg.nt + 1, Vec::Zero(g.nBulk()));
  sys.gG.assign(tg.nt + 1, Vec::Zero(g.nBdry()));
  sys.chi0 = Vec::Zero(g.nBulk());
  return sys;
}

LinearSystemData randomSystem(const Geometry& g, const TimeGrid& tg, unsigned seed) {
  Rng rng(seed);
  LinearSystemData sys = zeroSystem(g, tg);
  for (int k = 1; k <= tg.nt; ++k) {
    sys.lambda[k] = randomBulkField(g, rng, 0.8);
    sys.lambdaG[k] = randomBdryField(g, rng, 0.8);
    sys.g[k] = randomBulkField(g, rng);
    sys.gG[k] = randomBdryField(g, rng);
  }
  return sys;
}

}  // namespace

TEST_CASE("zero data gives the zero trajectory") {
  const Geometry g = Geometry::strip2d(6, 3, 1.0, 0.5);
  const TimeGrid tg{0.2, 4};
  const LinearTrajectory t = solveLinear(g, tg, zeroSystem(g, tg));
  for (int k = 0; k <= tg.nt; ++k) {
    CHECK(t.chi[k].norm() == 0.0);
    CHECK(t.mu[k].norm() == 0.0);
  }
}

TEST_CASE("stepping solver matches a monolithic space-time solve") {
  // 8x4 strip, 5 steps; lambda = 0, g_G = 0, g a time-constant mean-zero field.
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  const TimeGrid tg{0.1, 5};
  const int n = g.nBulk();
  LinearSystemData sys = zeroSystem(g, tg);
  Rng rng(3);
  Vec gw = randomBulkField(g, rng);
  gw.array() -= g.meanValue(gw);
  for (int k = 1; k <= tg.nt; ++k) sys.g[k] = gw;

  const LinearTrajectory t = solveLinear(g, tg, sys);

  // Monolithic assembly: unknowns (chi^k, mu^k), k = 1..nt, stacked.
  const double dt = tg.dt();
  const SpMat A = assembleStepMatrix(g, dt, sys.lambda[1], sys.lambdaG[1], false);
  std::vector<Eigen::Triplet<double>> trips;
  const int N = 2 * n * tg.nt;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
  for (int k = 1; k <= tg.nt; ++k) {
    const int off = 2 * n * (k - 1);
    for (int c = 0; c < A.outerSize(); ++c)
      for (SpMat::InnerIterator it(A, c); it; ++it)
        trips.emplace_back(off + it.row(), off + it.col(), it.value());
    if (k > 1) {
      // -E coupling to the previous step: chi-block only.
      for (int i = 0; i < n; ++i) {
        trips.emplace_back(off + i, off - 2 * n + i, -g.weights()[i] / dt);
        trips.emplace_back(off + n + i, off - 2 * n + i, -g.weights()[i] / dt);
      }
      for (int b = 0; b < g.nBdry(); ++b) {
        const int i = g.bdryIndex()[b];
        trips.emplace_back(off + n + i, off - 2 * n + i, -g.bdryWeights()[b] / dt);
      }
    }
    rhs.segment(off + n, n) = -g.weights().cwiseProduct(sys.g[k]);
  }
  SpMat big(N, N);
  big.setFromTriplets(trips.begin(), trips.end());
  big.makeCompressed();
  Eigen::SparseLU<SpMat> lu(big);
  REQUIRE(lu.info() == Eigen::Success);
  const Eigen::VectorXd mono = lu.solve(rhs);

  for (int k = 1; k <= tg.nt; ++k) {
    const int off = 2 * n * (k - 1);
    CHECK((t.chi[k] - mono.segment(off, n)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((t.mu[k] - mono.segment(off + n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("linearity of the solution map") {
  const Geometry g = Geometry::interval1d(10, 1.0);
  const TimeGrid tg{0.3, 5};
  LinearSystemData d1 = randomSystem(g, tg, 5);
  LinearSystemData d2 = randomSystem(g, tg, 6);
  d2.lambda = d1.lambda;  // shared operator, sources differ
  d2.lambdaG = d1.lambdaG;

  const double a = 1.3, b = -0.7;
  LinearSystemData dc = d1;
  for (int k = 1; k <= tg.nt; ++k) {
    dc.g[k] = a * d1.g[k] + b * d2.g[k];
    dc.gG[k] = a * d1.gG[k] + b * d2.gG[k];
  }
  dc.chi0 = a * d1.chi0 + b * d2.chi0;

  const auto t1 = solveLinear(g, tg, d1);
  const auto t2 = solveLinear(g, tg, d2);
  const auto tc = solveLinear(g, tg, dc);
  for (int k = 0; k <= tg.nt; ++k)
    CHECK((tc.chi[k] - a * t1.chi[k] - b * t2.chi[k]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mean of chi is conserved") {
  const Geometry g = Geometry::strip2d(6, 4, 1.0, 0.4);
  const TimeGrid tg{0.2, 6};
  LinearSystemData sys = randomSystem(g, tg, 7);
  Rng rng(8);
  sys.chi0 = randomBulkField(g, rng);
  // Conservation needs a mean-free bulk source (testing with v = 1).
  for (int k = 1; k <= tg.nt; ++k) sys.g[k].array() -= g.meanValue(sys.g[k]);
  const auto t = solveLinear(g, tg, sys);
  const double m0 = g.meanValue(sys.chi0);
  for (int k = 1; k <= tg.nt; ++k)
    CHECK(g.meanValue(t.chi[k]) == doctest::Approx(m0).epsilon(1e-10));
}

TEST_CASE("solve then apply reproduces the data (round trip)") {
  const Geometry g = Geometry::strip2d(5, 3, 0.8, 0.5);
  const TimeGrid tg{0.25, 4};
  const LinearSystemData sys = randomSystem(g, tg, 9);
  const auto t = solveLinear(g, tg, sys);
  const OperatorResidual r = applyOperator(g, tg, sys, t);
  CHECK(r.maxNorm < 1e-10);
}

TEST_CASE("apply to zero trajectory returns minus the data terms") {
  const Geometry g = Geometry::interval1d(6, 1.0);
  const TimeGrid tg{0.1, 3};
  LinearSystemData sys = zeroSystem(g, tg);
  Rng rng(10);
  for (int k = 1; k <= tg.nt; ++k) sys.g[k] = randomBulkField(g, rng);
  LinearTrajectory zero;
  zero.chi.assign(tg.nt + 1, Vec::Zero(g.nBulk()));
  zero.mu.assign(tg.nt + 1, Vec::Zero(g.nBulk()));
  const OperatorResidual r = applyOperator(g, tg, sys, zero);
  for (int k = 1; k <= tg.nt; ++k) {
    CHECK(r.r1[k].norm() == 0.0);
    CHECK((r.r2[k] - g.weights().cwiseProduct(sys.g[k])).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("one-step operators: <A x, y> = <x, A^T y> exactly") {
  const Geometry g = Geometry::strip2d(6, 3, 1.0, 0.5);
  Rng rng(11);
  const Vec lam = randomBulkField(g, rng);
  const Vec lamG = randomBdryField(g, rng);
  const SpMat A = assembleStepMatrix(g, 0.05, lam, lamG, false);
  const SpMat At = assembleStepMatrix(g, 0.05, lam, lamG, true);
  CHECK((SpMat(A.transpose()) - At).norm() == 0.0);  // algebraic transpose, entrywise

  Eigen::VectorXd x = Eigen::VectorXd::Random(2 * g.nBulk());
  Eigen::VectorXd y = Eigen::VectorXd::Random(2 * g.nBulk());
  CHECK((A * x).dot(y) == doctest::Approx(x.dot(At * y)).epsilon(1e-13));
}

TEST_CASE("stability: solution bounded by the source uniformly over samples") {
  // Empirical stability bound: chi0 = 0, fixed lambda, random sources.
  const Geometry g = Geometry::interval1d(12, 1.0);
  const TimeGrid tg{0.4, 8};
  double maxRatio = 0.0;
  for (unsigned s = 0; s < 10; ++s) {
    LinearSystemData sys = randomSystem(g, tg, 100 + s);
    for (int k = 1; k <= tg.nt; ++k) {
      sys.lambda[k].setConstant(0.5);
      sys.lambdaG[k].setConstant(-0.25);
    }
    const auto t = solveLinear(g, tg, sys);
    const double num = trajectoryNorms(g, tg, t.chi).y;
    double den2 = 0.0;
    for (int k = 1; k <= tg.nt; ++k)
      den2 += tg.dt() * (g.innerBulk(sys.g[k], sys.g[k]) + g.innerBdry(sys.gG[k], sys.gG[k]));
    maxRatio = std::max(maxRatio, num / std::sqrt(den2));
  }
  CHECK(maxRatio < 50.0);  // a single constant bounds all samples
  CHECK(std::isfinite(maxRatio));
}

TEST_CASE("batched solve equals per-instance solves") {
  const Geometry g = Geometry::interval1d(8, 1.0);
  const TimeGrid tg{0.2, 4};
  const LinearSystemData base = randomSystem(g, tg, 12);
  std::vector<LinearSources> srcs;
  for (int i = 0; i < 3; ++i) {
    LinearSystemData d = randomSystem(g, tg, 20 + i);
    srcs.push_back({d.g, d.gG, d.chi0});
  }
  const auto batch = solveLinearBatch(g, tg, base.lambda, base.lambdaG, srcs);
  for (int i = 0; i < 3; ++i) {
    LinearSystemData d = base;
    d.g = srcs[i].g;
    d.gG = srcs[i].gG;
    d.chi0 = srcs[i].chi0;
    const auto single = solveLinear(g, tg, d);
    for (int k = 0; k <= tg.nt; ++k)
      CHECK((batch[i].chi[k] - single.chi[k]).cwiseAbs().maxCoeff() < 1e-12);
  }
}
