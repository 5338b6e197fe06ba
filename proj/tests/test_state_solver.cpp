#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chb/errors.hpp"
#include "chb/random_fields.hpp"
#include "chb/state_solver.hpp"

using namespace chb;

namespace {

PotentialPair regularPair() { return {Potential::regular(), Potential::regular()}; }
PotentialPair logPair() { return {Potential::logarithmic(2.0), Potential::logarithmic(2.0)}; }

}  // namespace

TEST_CASE("a spatially constant critical point is a fixed point of the scheme") {
  // Regular potential, y0 = 0: f'(0) = f_G'(0) = 0 and u = 0.
  const Geometry g = Geometry::strip2d(6, 3, 1.0, 0.5);
  const TimeGrid tg{0.2, 5};
  const auto st = solveState(g, tg, regularPair(), Vec::Zero(g.nBulk()), zeroControl(g, tg));
  for (int k = 1; k <= tg.nt; ++k) {
    CHECK(st.y[k].cwiseAbs().maxCoeff() < 1e-12);
    CHECK(st.w[k].cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("mass is conserved exactly for random admissible data") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  const TimeGrid tg{0.3, 8};
  Rng rng(21);
  const Vec y0 = smoothBulkField(g, rng, 0.3);
  auto u = smoothBoundaryField(g, tg, rng, 0.5);
  const auto st = solveState(g, tg, logPair(), y0, u);
  for (int k = 1; k <= tg.nt; ++k)
    CHECK(std::abs(g.meanValue(st.y[k]) - st.m0) <= 1e-10 * std::max(1.0, std::abs(st.m0)));
}

TEST_CASE("trace conformity and diagnostics are populated") {
  const Geometry g = Geometry::interval1d(10, 1.0);
  const TimeGrid tg{0.2, 4};
  Rng rng(22);
  const auto st =
      solveState(g, tg, logPair(), smoothBulkField(g, rng, 0.2), smoothBoundaryField(g, tg, rng, 0.3));
  CHECK(st.steps.size() == 4);
  for (const auto& s : st.steps) {
    CHECK(s.iterations >= 1);
    CHECK(s.residual <= 1e-10);
  }
  CHECK(st.minSeparation > 0.0);
}

TEST_CASE("quadratic potential makes the scheme linear: Newton converges immediately") {
  const Geometry g = Geometry::interval1d(12, 1.0);
  const TimeGrid tg{0.2, 4};
  PotentialPair quad(Potential::polynomial({0.0, 0.0, 0.5}), Potential::polynomial({0.0, 0.0, 0.5}));
  Rng rng(23);
  const auto st =
      solveState(g, tg, quad, smoothBulkField(g, rng, 0.4), smoothBoundaryField(g, tg, rng, 0.5));
  for (const auto& s : st.steps) CHECK(s.iterations <= 2);
}

TEST_CASE("free energy is non-increasing for an uncontrolled run") {
  const Geometry g = Geometry::strip2d(8, 4, 1.0, 0.5);
  const TimeGrid tg{0.5, 10};
  Rng rng(24);
  StateSolveOptions opts;
  opts.trackEnergy = true;
  const auto st = solveState(g, tg, logPair(), smoothBulkField(g, rng, 0.3),
                             zeroControl(g, tg), opts);
  CHECK(st.energyViolations == 0);
}

TEST_CASE("initial data outside the potential domain is rejected") {
  const Geometry g = Geometry::interval1d(8, 1.0);
  const TimeGrid tg{0.1, 2};
  CHECK_THROWS_AS(
      (void)solveState(g, tg, logPair(), Vec::Constant(g.nBulk(), 1.5), zeroControl(g, tg)),
      SeparationLost);
  CHECK_THROWS_AS(
      (void)solveState(g, tg, logPair(), Vec::Zero(g.nBulk()), ControlTrajectory{}),
      ConfigError);
}

namespace {

// Manufactured solution on the interval: y* = m + a(t) cos(pi x / lx) with the
// regular potential; forcing computed from the closed forms.
struct Manufactured {
  double m = 0.1, a0 = 0.2, lx = 1.0;
  [[nodiscard]] double a(double t) const { return a0 * (1.0 + 0.5 * std::sin(2.0 * t)); }
  [[nodiscard]] double ap(double t) const { return a0 * std::cos(2.0 * t); }
  [[nodiscard]] double kappa() const { return M_PI * M_PI / (lx * lx); }

  [[nodiscard]] double yStar(double x, double t) const {
    return m + a(t) * std::cos(M_PI * x / lx);
  }
  [[nodiscard]] double massForcing(double x, double t) const {
    const double c = std::cos(M_PI * x / lx);
    const double s = std::sin(M_PI * x / lx);
    const double at = a(t), k = kappa(), y = m + at * c;
    const double cp = -std::sqrt(k) * s;   // c'
    const double cpp = -k * c;             // c''
    // w* = a' c + a k c + y^3 - y ; F1 = dt y* - Lap w*
    const double lapCube = 6.0 * y * (at * cp) * (at * cp) + 3.0 * y * y * at * cpp;
    const double lapW = (ap(t) + at * k) * cpp + lapCube - at * cpp;
    return ap(t) * c - lapW;
  }
  [[nodiscard]] double bdryForcing(int side, double t) const {
    const double c = side == 0 ? 1.0 : -1.0;
    const double y = m + a(t) * c;
    return ap(t) * c + (y * y * y - y);  // dn y* = 0, Lap_G = 0 on the interval
  }
};

double mmsError(int nx, int nt, double T) {
  const Manufactured ms;
  const Geometry g = Geometry::interval1d(nx, ms.lx);
  const TimeGrid tg{T, nt};
  Vec y0(g.nBulk());
  for (int i = 0; i < g.nBulk(); ++i) y0[i] = ms.yStar(g.xCoord(i), 0.0);

  StateForcing forcing;
  forcing.massBulk.assign(nt + 1, Vec::Zero(g.nBulk()));
  forcing.potentialBdry.assign(nt + 1, Vec::Zero(g.nBdry()));
  for (int k = 1; k <= nt; ++k) {
    for (int i = 0; i < g.nBulk(); ++i)
      forcing.massBulk[k][i] = ms.massForcing(g.xCoord(i), tg.node(k));
    forcing.potentialBdry[k][0] = ms.bdryForcing(0, tg.node(k));
    forcing.potentialBdry[k][1] = ms.bdryForcing(1, tg.node(k));
  }
  StateSolveOptions opts;
  opts.forcing = &forcing;
  const auto st = solveState(g, tg, regularPair(), y0, zeroControl(g, tg), opts);

  double err = 0.0;
  for (int k = 1; k <= nt; ++k) {
    Vec exact(g.nBulk());
    for (int i = 0; i < g.nBulk(); ++i) exact[i] = ms.yStar(g.xCoord(i), tg.node(k));
    err = std::max(err, g.normBulk(st.y[k] - exact));
  }
  return err;
}

}  // namespace

TEST_CASE("manufactured solution: first order in time") {
  const double e1 = mmsError(64, 8, 0.5);
  const double e2 = mmsError(64, 16, 0.5);
  const double e3 = mmsError(64, 32, 0.5);
  const double o1 = std::log2(e1 / e2);
  const double o2 = std::log2(e2 / e3);
  CHECK(o1 == doctest::Approx(1.0).epsilon(0.35));
  CHECK(o2 == doctest::Approx(1.0).epsilon(0.35));
}

TEST_CASE("manufactured solution: second order in space") {
  // Tiny final time so the temporal error is negligible.
  const double e1 = mmsError(8, 400, 0.02);
  const double e2 = mmsError(16, 400, 0.02);
  const double e3 = mmsError(32, 400, 0.02);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.25));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("stability probe: identical inputs and Lipschitz ratios") {
  const Geometry g = Geometry::interval1d(10, 1.0);
  const TimeGrid tg{0.2, 5};
  Rng rng(25);
  const Vec y0 = smoothBulkField(g, rng, 0.2);
  const auto u = smoothBoundaryField(g, tg, rng, 0.3);
  CHECK(stabilityProbe(g, tg, logPair(), y0, u, u).identicalInputs);

  // Ratio approximately constant across perturbation scales (Lipschitz).
  const auto d = smoothBoundaryField(g, tg, rng, 1.0);
  std::vector<double> ratios;
  for (double e : {1e-1, 1e-2, 1e-3}) {
    auto u2 = u;
    for (int k = 0; k <= tg.nt; ++k) u2[k] += e * d[k];
    const auto rep = stabilityProbe(g, tg, logPair(), y0, u, u2);
    CHECK(!rep.identicalInputs);
    ratios.push_back(rep.ratio);
  }
  CHECK(ratios[0] == doctest::Approx(ratios[2]).epsilon(0.2));
}
