#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chb/random_fields.hpp"
#include "chb/reduced_functional.hpp"
#include "chb/sensitivity.hpp"

using namespace chb;

namespace {

struct Fixture {
  Geometry geom = Geometry::interval1d(12, 1.0);
  TimeGrid tg{0.25, 6};
  PotentialPair pot{Potential::logarithmic(2.0), Potential::logarithmic(2.0)};
  Vec y0;
  ControlTrajectory u;
  StateTrajectory state;

  explicit Fixture(unsigned seed = 31) {
    Rng rng(seed);
    y0 = smoothBulkField(geom, rng, 0.25);
    u = smoothBoundaryField(geom, tg, rng, 0.3);
    state = solveState(geom, tg, pot, y0, u);
  }

  [[nodiscard]] Problem problem() const {
    Problem pb;
    pb.geom = &geom;
    pb.tg = &tg;
    pb.pot = &pot;
    pb.y0 = y0;
    return pb;
  }
};

}  // namespace

TEST_CASE("DS is linear and vanishes on the zero direction") {
  Fixture fx;
  const auto zero = applyDS(fx.geom, fx.tg, fx.pot, fx.state, zeroControl(fx.geom, fx.tg));
  for (int k = 0; k <= fx.tg.nt; ++k) CHECK(zero.chi[k].norm() == 0.0);

  Rng rng(32);
  const auto h1 = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
  const auto h2 = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
  ControlTrajectory combo(fx.tg.nt + 1);
  for (int k = 0; k <= fx.tg.nt; ++k) combo[k] = 2.0 * h1[k] - 0.5 * h2[k];
  const auto a = applyDS(fx.geom, fx.tg, fx.pot, fx.state, h1);
  const auto b = applyDS(fx.geom, fx.tg, fx.pot, fx.state, h2);
  const auto c = applyDS(fx.geom, fx.tg, fx.pot, fx.state, combo);
  for (int k = 0; k <= fx.tg.nt; ++k)
    CHECK((c.chi[k] - 2.0 * a.chi[k] + 0.5 * b.chi[k]).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("DS trajectories have zero mean at every node") {
  Fixture fx;
  Rng rng(33);
  const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
  const auto xi = applyDS(fx.geom, fx.tg, fx.pot, fx.state, h);
  for (int k = 1; k <= fx.tg.nt; ++k)
    CHECK(std::abs(fx.geom.meanValue(xi.chi[k])) < 1e-12);
}

TEST_CASE("first-order Taylor remainder of S decays at order 2") {
  Fixture fx;
  Rng rng(34);
  const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 0.5);
  const auto rep = taylorStateFirst(fx.problem(), fx.u, h, {1e-1, 3e-2, 1e-2, 3e-3});
  CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("second-order Taylor remainder of S decays at order 3") {
  Fixture fx;
  Rng rng(35);
  const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 0.5);
  const auto rep = taylorStateSecond(fx.problem(), fx.u, h, {1e-1, 3e-2, 1e-2, 3e-3});
  CHECK(rep.slope == doctest::Approx(3.0).epsilon(0.14));
}

TEST_CASE("D2S is bilinear, symmetric, and vanishes with either direction") {
  Fixture fx;
  Rng rng(36);
  const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
  const auto k = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);

  const auto zh = applyD2S(fx.geom, fx.tg, fx.pot, fx.state, zeroControl(fx.geom, fx.tg), k);
  for (int s = 0; s <= fx.tg.nt; ++s) CHECK(zh.chi[s].norm() == 0.0);

  const auto hk = applyD2S(fx.geom, fx.tg, fx.pot, fx.state, h, k);
  const auto kh = applyD2S(fx.geom, fx.tg, fx.pot, fx.state, k, h);
  for (int s = 0; s <= fx.tg.nt; ++s)
    CHECK((hk.chi[s] - kh.chi[s]).cwiseAbs().maxCoeff() < 1e-12);

  // Bilinearity in the first argument.
  ControlTrajectory h2(fx.tg.nt + 1);
  for (int s = 0; s <= fx.tg.nt; ++s) h2[s] = -3.0 * h[s];
  const auto scaled = applyD2S(fx.geom, fx.tg, fx.pot, fx.state, h2, k);
  for (int s = 0; s <= fx.tg.nt; ++s)
    CHECK((scaled.chi[s] + 3.0 * hk.chi[s]).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("bound chain: ||D2S[h,k]||_Y <= K ||h|| ||k|| over random samples") {
  Fixture fx;
  Rng rng(37);
  double maxRatio = 0.0;
  for (int s = 0; s < 6; ++s) {
    const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
    const auto k = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
    const auto eta = applyD2S(fx.geom, fx.tg, fx.pot, fx.state, h, k);
    const double num = trajectoryNorms(fx.geom, fx.tg, eta.chi).y;
    const double den = normL2Sigma(fx.geom, fx.tg, h) * normL2Sigma(fx.geom, fx.tg, k);
    maxRatio = std::max(maxRatio, num / den);
  }
  CHECK(std::isfinite(maxRatio));
  CHECK(maxRatio < 100.0);
}

TEST_CASE("Lipschitz of DS in the base control: bounded trilinear ratio") {
  Fixture fx;
  Rng rng(38);
  double maxRatio = 0.0;
  for (int s = 0; s < 4; ++s) {
    const double e = 1e-1 * std::pow(10, -s * 0.5);
    const auto d = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
    const auto h = smoothBoundaryField(fx.geom, fx.tg, rng, 1.0);
    const auto u2 = axpy(fx.u, e, d);
    const auto st2 = solveState(fx.geom, fx.tg, fx.pot, fx.y0, u2);
    const auto a = applyDS(fx.geom, fx.tg, fx.pot, fx.state, h);
    const auto b = applyDS(fx.geom, fx.tg, fx.pot, st2, h);
    std::vector<Vec> diff(fx.tg.nt + 1);
    for (int k = 0; k <= fx.tg.nt; ++k) diff[k] = a.chi[k] - b.chi[k];
    const double du = normL2Sigma(fx.geom, fx.tg, axpy(u2, -1.0, fx.u));
    const double ratio = trajectoryNorms(fx.geom, fx.tg, diff).y /
                         (du * normL2Sigma(fx.geom, fx.tg, h));
    maxRatio = std::max(maxRatio, ratio);
  }
  CHECK(std::isfinite(maxRatio));
  CHECK(maxRatio < 100.0);
}
