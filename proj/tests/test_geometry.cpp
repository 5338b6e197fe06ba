#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "chb/errors.hpp"
#include "chb/geometry.hpp"
#include "chb/random_fields.hpp"

using namespace chb;

namespace {
constexpr double kTwoPi = 2.0 * M_PI;

Vec randomField(const Geometry& g, unsigned seed) {
  Rng rng(seed);
  return randomBulkField(g, rng);
}
}  // namespace

TEST_CASE("quadrature weights sum to the measures") {
  const Geometry strip = Geometry::strip2d(8, 4, 1.0, 0.5);
  CHECK(strip.weights().sum() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(strip.bdryWeights().sum() == doctest::Approx(2.0).epsilon(1e-14));

  const Geometry line = Geometry::interval1d(16, 2.0);
  CHECK(line.weights().sum() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(line.bdryWeights().sum() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("mean value: constants, periodic modes, random oracle") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  CHECK(g.meanValue(Vec::Constant(g.nBulk(), 3.25)) == doctest::Approx(3.25).epsilon(1e-14));

  Vec cosx(g.nBulk());
  for (int i = 0; i < g.nBulk(); ++i) cosx[i] = std::cos(kTwoPi * g.xCoord(i) / g.lx());
  CHECK(std::abs(g.meanValue(cosx)) < 1e-14);

  // Independent summation oracle on a random field.
  const Vec v = randomField(g, 42);
  double acc = 0.0;
  for (int i = 0; i < g.nBulk(); ++i) acc += g.weights()[i] * v[i];
  CHECK(g.meanValue(v) == doctest::Approx(acc / 0.5).epsilon(1e-14));
}

TEST_CASE("trace is a restriction and liftBdry is its transpose") {
  const Geometry g = Geometry::strip2d(6, 3, 1.0, 0.6);
  const Vec v = randomField(g, 7);
  const Vec tr = g.trace(v);
  for (int i = 0; i < g.nBdry(); ++i) CHECK(tr[i] == v[g.bdryIndex()[i]]);

  Rng rng(8);
  const Vec b = randomBdryField(g, rng);
  // <T^T b, v>_euclid = <b, T v>_euclid
  CHECK(g.liftBdry(b).dot(v) == doctest::Approx(b.dot(tr)).epsilon(1e-14));
}

TEST_CASE("summation by parts holds exactly for the chosen stencils") {
  for (const Geometry& g :
       {Geometry::strip2d(8, 5, 1.3, 0.7), Geometry::interval1d(9, 1.1)}) {
    const Vec u = randomField(g, 1);
    const Vec v = randomField(g, 2);
    const double lhs = g.innerBulk(-g.laplacian(u), v);
    const double rhs = g.dirichletForm(u, v) - g.innerBdry(g.normalDerivative(u), g.trace(v));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("boundary Laplacian is symmetric negative semidefinite") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  const auto KG = Eigen::MatrixXd(g.bdryStiffness());
  CHECK((KG - KG.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(KG);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);  // Delta_G = -B^{-1} K_G is NSD
}

TEST_CASE("neumann inverse: zero datum, Fourier symbol, eigenvector oracle") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);

  CHECK(g.neumannInverse(Vec::Zero(g.nBulk())).norm() == 0.0);

  // Discrete Fourier symbol oracle: cos(2 pi x / lx) is an exact eigenvector
  // with eigenvalue (2 - 2 cos(2 pi hx / lx)) / hx^2.
  Vec cosx(g.nBulk());
  for (int i = 0; i < g.nBulk(); ++i) cosx[i] = std::cos(kTwoPi * g.xCoord(i) / g.lx());
  const double lam = (2.0 - 2.0 * std::cos(kTwoPi * g.hx() / g.lx())) / (g.hx() * g.hx());
  const Vec sol = g.neumannInverse(cosx);
  CHECK((sol - cosx / lam).cwiseAbs().maxCoeff() < 1e-10);

  // Eigen-decomposition oracle: generalized eigenpair K x = lambda M x.
  const Eigen::MatrixXd K = Eigen::MatrixXd(g.stiffness());
  const Eigen::MatrixXd M = Eigen::MatrixXd(g.weights().asDiagonal());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
  const int pick = g.nBulk() / 2;  // some interior eigenpair, lambda > 0
  const double lambda = es.eigenvalues()[pick];
  REQUIRE(lambda > 1e-10);
  Vec vstar = es.eigenvectors().col(pick);
  vstar.array() -= g.meanValue(vstar);  // exact zero mean (already ~0 by orthogonality)
  const Vec w = g.neumannInverse(vstar);
  CHECK((w - vstar / lambda).cwiseAbs().maxCoeff() < 1e-8 * vstar.cwiseAbs().maxCoeff());
}

TEST_CASE("neumann inverse rejects nonzero-mean data and is self-adjoint") {
  const Geometry g = Geometry::interval1d(12, 1.0);
  CHECK_THROWS_AS((void)g.neumannInverse(Vec::Constant(g.nBulk(), 1.0)), MeanNotZero);

  auto mkZeroMean = [&](unsigned seed) {
    Vec v = randomField(g, seed);
    v.array() -= g.meanValue(v);
    return v;
  };
  const Vec a = mkZeroMean(3), b = mkZeroMean(4);
  // <u*, N v*> = <v*, N u*> and mean(N v*) = 0.
  CHECK(g.innerBulk(a, g.neumannInverse(b)) ==
        doctest::Approx(g.innerBulk(b, g.neumannInverse(a))).epsilon(1e-10));
  CHECK(std::abs(g.meanValue(g.neumannInverse(a))) < 1e-12);
}

TEST_CASE("dual norm: zero, identity with <v*, N v*>, homogeneity") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  CHECK(g.dualNorm(Vec::Zero(g.nBulk())) == 0.0);

  Vec v = randomField(g, 5);
  v.array() -= g.meanValue(v);
  const double dn = g.dualNorm(v);
  CHECK(dn * dn == doctest::Approx(g.innerBulk(v, g.neumannInverse(v))).epsilon(1e-9));
  CHECK(g.dualNorm(-2.5 * v) == doctest::Approx(2.5 * dn).epsilon(1e-9));
}

TEST_CASE("pair norms: zero, constants, random quadrature oracle") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  CHECK(g.pairNorms(g.makePair(Vec::Zero(g.nBulk()))).h == 0.0);

  const double c = 1.7;
  const PairNorms pn = g.pairNorms(g.makePair(Vec::Constant(g.nBulk(), c)));
  CHECK(pn.h == doctest::Approx(c * std::sqrt(0.5 + 2.0)).epsilon(1e-13));
  CHECK(pn.v == doctest::Approx(pn.h).epsilon(1e-13));  // gradients vanish

  const Vec v = randomField(g, 9);
  const PairNorms rn = g.pairNorms(g.makePair(v));
  double h2 = 0.0;
  for (int i = 0; i < g.nBulk(); ++i) h2 += g.weights()[i] * v[i] * v[i];
  const Vec tr = g.trace(v);
  for (int i = 0; i < g.nBdry(); ++i) h2 += g.bdryWeights()[i] * tr[i] * tr[i];
  CHECK(rn.h == doctest::Approx(std::sqrt(h2)).epsilon(1e-12));
}

TEST_CASE("non-conforming pairs are rejected") {
  const Geometry g = Geometry::interval1d(8, 1.0);
  PairField p = g.makePair(randomField(g, 11));
  p.bdry[0] += 0.5;
  CHECK_THROWS_AS((void)g.pairNorms(p), NonConforming);
}

TEST_CASE("interval1d has no surface terms") {
  const Geometry g = Geometry::interval1d(8, 1.0);
  CHECK(g.bdryStiffness().nonZeros() == 0);
  CHECK(g.nBdry() == 2);
}
