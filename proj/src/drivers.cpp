#include "chb/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "chb/csv.hpp"
#include "chb/errors.hpp"
#include "chb/util.hpp"

namespace chb {

namespace {

namespace fs = std::filesystem;

class Stopwatch {
public:
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double relDiff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double fitSlope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] <= 0 || ys[i] <= 0) continue;
    const double x = std::log(xs[i]), y = std::log(ys[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return 0.0;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

void writeManifest(const Instance& inst) {
  fs::create_directories(inst.outdir);
  std::ofstream out(fs::path(inst.outdir) / "manifest.cfg");
  out << "# resolved configuration; re-running from this file reproduces the run\n";
  ConfigMap m = inst.resolved;
  m.set("meta.version", "chb 1.0.0");
  out << m.render();
}

ControlTrajectory probeControl(const Instance& inst, double amplitude, std::uint64_t salt) {
  Rng rng(inst.seed + salt);
  return smoothBoundaryField(inst.geom, inst.tg, rng, amplitude);
}

SimulateReport runSimulate(const Instance& inst) {
  Stopwatch sw;
  writeManifest(inst);
  const auto u = zeroControl(inst.geom, inst.tg);
  StateSolveOptions opts = inst.stateOpts;
  opts.trackEnergy = true;
  const StateTrajectory st = solveState(inst.geom, inst.tg, inst.pot, inst.y0, u, opts);

  SimulateReport rep;
  rep.driftTol = opts.conservationTol * std::max(1.0, std::abs(st.m0));

  CsvWriter cons(fs::path(inst.outdir) / "conservation.csv", {"t", "mean", "drift"});
  for (int k = 0; k <= inst.tg.nt; ++k) {
    const double mean = inst.geom.meanValue(st.y[k]);
    const double drift = mean - st.m0;
    rep.maxDrift = std::max(rep.maxDrift, std::abs(drift));
    cons.row({inst.tg.node(k), mean, drift});
  }
  CsvWriter newton(fs::path(inst.outdir) / "newton.csv", {"step", "iterations", "residual"});
  for (int k = 1; k <= inst.tg.nt; ++k) {
    newton.row({static_cast<double>(k), static_cast<double>(st.steps[k - 1].iterations),
                st.steps[k - 1].residual});
    rep.totalNewtonIterations += st.steps[k - 1].iterations;
  }

  for (double t : inst.dumpTimes) {
    const int k = std::clamp(static_cast<int>(std::lround(t / inst.tg.dt())), 0, inst.tg.nt);
    const std::string tag = formatDouble(inst.tg.node(k));
    dumpBulkField(inst.geom, st.y[k], fs::path(inst.outdir) / ("y_t" + tag + ".csv"));
    dumpBulkField(inst.geom, st.w[k], fs::path(inst.outdir) / ("w_t" + tag + ".csv"));
    dumpBdryField(inst.geom, inst.geom.trace(st.y[k]),
                  fs::path(inst.outdir) / ("ygamma_t" + tag + ".csv"));
  }

  rep.minSeparation = st.minSeparation;
  rep.energyViolations = st.energyViolations;
  rep.pass = rep.maxDrift <= rep.driftTol;
  rep.seconds = sw.seconds();
  return rep;
}

AdjointCheckReport runCheckAdjoint(const Instance& inst, int trials) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const auto uBase = probeControl(inst, 0.3, 3);
  const EvalRecord rec = evaluate(pb, uBase);

  AdjointCheckReport rep;
  CsvWriter csv(fs::path(inst.outdir) / "adjoint_identity.csv",
                {"trial", "lhs", "rhs", "rel_mismatch"});
  Rng rng(inst.seed + 11);
  std::vector<ControlTrajectory> hs;
  for (int t = 0; t < trials; ++t)
    hs.push_back(smoothBoundaryField(inst.geom, inst.tg, rng, 1.0));
  const auto xis = applyDSBatch(inst.geom, inst.tg, inst.pot, rec.state, hs, inst.linOpts);

  for (int t = 0; t < trials; ++t) {
    double lhs = 0.0;
    for (int k = 1; k <= inst.tg.nt; ++k) {
      const Vec rQ = rec.state.y[k] - inst.cost.zQ[k];
      lhs += inst.tg.dt() * inst.cost.bQ * inst.geom.innerBulk(rQ, xis[t].chi[k]);
      const Vec rS = inst.geom.trace(rec.state.y[k]) - inst.cost.zSigma[k];
      lhs += inst.tg.dt() * inst.cost.bSigma *
             inst.geom.innerBdry(rS, inst.geom.trace(xis[t].chi[k]));
    }
    double rhs = 0.0;
    for (int k = 1; k <= inst.tg.nt; ++k)
      rhs += inst.tg.dt() * inst.geom.innerBdry(inst.geom.trace(rec.adjoint.q[k]), hs[t][k]);
    const double mis = relDiff(lhs, rhs);
    rep.mismatches.push_back(mis);
    rep.worst = std::max(rep.worst, mis);
    csv.row({static_cast<double>(t), lhs, rhs, mis});
  }
  rep.pass = rep.worst <= 1e-8;
  rep.seconds = sw.seconds();
  return rep;
}

GradientCheckReport runCheckGradient(const Instance& inst) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const auto uBase = probeControl(inst, 0.3, 3);
  const EvalRecord rec = evaluate(pb, uBase);
  Rng rng(inst.seed + 13);
  const auto h = smoothBoundaryField(inst.geom, inst.tg, rng, 1.0);
  const double directional = innerL2Sigma(inst.geom, inst.tg, rec.gradient, h);

  GradientCheckReport rep;
  CsvWriter csv(fs::path(inst.outdir) / "gradient_check.csv",
                {"eps", "fd", "directional", "rel_error"});
  const std::vector<double> ladder{3e-2, 1e-2, 3e-3, 1e-3};
  std::vector<double> errs;
  for (double e : ladder) {
    const double fd = (evalJ(pb, axpy(uBase, e, h)) - evalJ(pb, axpy(uBase, -e, h))) / (2 * e);
    errs.push_back(std::abs(fd - directional));
    csv.row({e, fd, directional, relDiff(fd, directional)});
  }
  rep.slope = fitSlope(ladder, errs);

  rep.refEps = 1e-4;
  const double fdRef = (evalJ(pb, axpy(uBase, rep.refEps, h)) -
                        evalJ(pb, axpy(uBase, -rep.refEps, h))) /
                       (2 * rep.refEps);
  rep.refError = relDiff(fdRef, directional);
  csv.row({rep.refEps, fdRef, directional, rep.refError});

  rep.pass = rep.refError <= 1e-4 && std::abs(rep.slope - 2.0) <= 0.3;
  rep.seconds = sw.seconds();
  return rep;
}

TaylorCheckReport runCheckTaylor(const Instance& inst, int lipschitzSamples) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const auto uBase = probeControl(inst, 0.3, 3);
  Rng rng(inst.seed + 17);
  const auto h = smoothBoundaryField(inst.geom, inst.tg, rng, 0.5);
  const std::vector<double> eps{1e-1, 3e-2, 1e-2, 3e-3};

  TaylorCheckReport rep;
  CsvWriter csv(fs::path(inst.outdir) / "taylor_orders.csv",
                {"kind", "eps", "remainder", "slope"});
  const TaylorReport t1 = taylorStateFirst(pb, uBase, h, eps);
  for (const auto& r : t1.rows)
    csv.row({std::string("S1"), formatDouble(r.eps), formatDouble(r.remainder),
             formatDouble(t1.slope)});
  const TaylorReport t2 = taylorStateSecond(pb, uBase, h, eps);
  for (const auto& r : t2.rows)
    csv.row({std::string("S2"), formatDouble(r.eps), formatDouble(r.remainder),
             formatDouble(t2.slope)});
  const TaylorReport tj = taylorReducedCost(pb, uBase, h, eps);
  for (const auto& r : tj.rows)
    csv.row({std::string("J"), formatDouble(r.eps), formatDouble(r.remainder),
             formatDouble(tj.slope)});
  rep.slopeS1 = t1.slope;
  rep.slopeS2 = t2.slope;
  rep.slopeJ = tj.slope;

  // Lipschitz ratio probes: control-to-state map, its derivative, its second derivative.
  CsvWriter lcsv(fs::path(inst.outdir) / "lipschitz.csv",
                 {"probe", "sample", "eps", "ratio"});
  Rng lrng(inst.seed + 19);
  const StateTrajectory base = solveState(inst.geom, inst.tg, inst.pot, pb.y0, uBase,
                                          inst.stateOpts);

  LipschitzProbeReport pState{"state", {}, 0, 0, 0, 0, false};
  LipschitzProbeReport pDS{"DS", {}, 0, 0, 0, 0, false};
  LipschitzProbeReport pD2S{"D2S", {}, 0, 0, 0, 0, false};
  std::vector<double> epsUsed;
  for (int s = 0; s < lipschitzSamples; ++s) {
    const double e = 1e-1 * std::pow(10.0, -1.5 * s / std::max(1, lipschitzSamples - 1));
    epsUsed.push_back(e);
    const auto d = smoothBoundaryField(inst.geom, inst.tg, lrng, 1.0);
    const auto hh = smoothBoundaryField(inst.geom, inst.tg, lrng, 1.0);
    const auto kk = smoothBoundaryField(inst.geom, inst.tg, lrng, 1.0);
    const auto u2 = axpy(uBase, e, d);
    const StateTrajectory st2 = solveState(inst.geom, inst.tg, inst.pot, pb.y0, u2,
                                           inst.stateOpts);
    const double du = normL2Sigma(inst.geom, inst.tg, axpy(u2, -1.0, uBase));
    const double nh = normL2Sigma(inst.geom, inst.tg, hh);
    const double nk = normL2Sigma(inst.geom, inst.tg, kk);

    {
      std::vector<Vec> diff(inst.tg.nt + 1);
      for (int k = 0; k <= inst.tg.nt; ++k) diff[k] = st2.y[k] - base.y[k];
      pState.ratios.push_back(trajectoryNorms(inst.geom, inst.tg, diff).y / du);
      lcsv.row({std::string("state"), formatDouble(s), formatDouble(e),
                formatDouble(pState.ratios.back())});
    }
    {
      const auto a = applyDS(inst.geom, inst.tg, inst.pot, base, hh, inst.linOpts);
      const auto b = applyDS(inst.geom, inst.tg, inst.pot, st2, hh, inst.linOpts);
      std::vector<Vec> diff(inst.tg.nt + 1);
      for (int k = 0; k <= inst.tg.nt; ++k) diff[k] = a.chi[k] - b.chi[k];
      pDS.ratios.push_back(trajectoryNorms(inst.geom, inst.tg, diff).y / (du * nh));
      lcsv.row({std::string("DS"), formatDouble(s), formatDouble(e),
                formatDouble(pDS.ratios.back())});
    }
    {
      const auto a = applyD2S(inst.geom, inst.tg, inst.pot, base, hh, kk, inst.linOpts);
      const auto b = applyD2S(inst.geom, inst.tg, inst.pot, st2, hh, kk, inst.linOpts);
      std::vector<Vec> diff(inst.tg.nt + 1);
      for (int k = 0; k <= inst.tg.nt; ++k) diff[k] = a.chi[k] - b.chi[k];
      pD2S.ratios.push_back(trajectoryNorms(inst.geom, inst.tg, diff).y / (du * nh * nk));
      lcsv.row({std::string("D2S"), formatDouble(s), formatDouble(e),
                formatDouble(pD2S.ratios.back())});
    }
  }
  for (auto* p : {&pState, &pDS, &pD2S}) {
    p->median = median(p->ratios);
    p->maxRatio = *std::max_element(p->ratios.begin(), p->ratios.end());
    p->trendSlope = fitSlope(epsUsed, p->ratios);
    for (double r : p->ratios)
      if (r > 2.0 * p->median) ++p->warnings;
    p->bounded = std::isfinite(p->maxRatio);
    rep.lipschitz.push_back(*p);
  }

  rep.pass = std::abs(rep.slopeS1 - 2.0) <= 0.3 && std::abs(rep.slopeS2 - 3.0) <= 0.4 &&
             std::abs(rep.slopeJ - 3.0) <= 0.4 && rep.lipschitz[0].bounded &&
             rep.lipschitz[1].bounded && rep.lipschitz[2].bounded;
  rep.seconds = sw.seconds();
  return rep;
}

HessianCheckReport runCheckHessian(const Instance& inst, int pairs) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const auto uBase = probeControl(inst, 0.3, 3);
  const EvalRecord rec = evaluate(pb, uBase);
  Rng rng(inst.seed + 23);

  HessianCheckReport rep;
  CsvWriter csv(fs::path(inst.outdir) / "hessian.csv",
                {"pair", "form", "symmetry_error", "cross_check_error"});
  for (int p = 0; p < pairs; ++p) {
    const auto h = smoothBoundaryField(inst.geom, inst.tg, rng, 1.0);
    const auto k = smoothBoundaryField(inst.geom, inst.tg, rng, 1.0);
    const double hk = hessianForm(pb, rec, h, k);
    const double kh = hessianForm(pb, rec, k, h);
    const double other = hessianFormViaD2S(pb, rec, h, k);
    const double sym = relDiff(hk, kh);
    const double cross = relDiff(hk, other);
    rep.values.push_back(hk);
    rep.symmetryErrors.push_back(sym);
    rep.crossErrors.push_back(cross);
    csv.row({static_cast<double>(p), hk, sym, cross});
  }
  rep.pass = *std::max_element(rep.symmetryErrors.begin(), rep.symmetryErrors.end()) <= 1e-12 &&
             *std::max_element(rep.crossErrors.begin(), rep.crossErrors.end()) <= 1e-8;
  rep.seconds = sw.seconds();
  return rep;
}

OptimizeReport runOptimize(const Instance& inst) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const OptimizeResult res = optimize(pb, inst.adm, inst.initialControl(), inst.optOpts);

  CsvWriter csv(fs::path(inst.outdir) / "history.csv", {"iter", "J", "residual", "step"});
  for (const auto& row : res.history)
    csv.row({static_cast<double>(row.iter), row.J, row.residual, row.step});

  OptimizeReport rep;
  rep.converged = res.converged;
  rep.iterations = res.iterations;
  rep.residual = res.residual;
  rep.J = res.record.J;
  rep.budgetActive = res.budgetEverActive;
  if (inst.cost.b0 > 0) {
    std::vector<Vec> diff(inst.tg.nt + 1, Vec::Zero(inst.geom.nBdry()));
    for (int k = 1; k <= inst.tg.nt; ++k) {
      const Vec target = (-inst.geom.trace(res.record.adjoint.q[k]) / inst.cost.b0)
                             .cwiseMax(inst.adm.uMin[k])
                             .cwiseMin(inst.adm.uMax[k]);
      diff[k] = res.u[k] - target;
    }
    rep.characterizationError = normL2Sigma(inst.geom, inst.tg, diff);
  }
  rep.pass = rep.converged && !rep.budgetActive;
  rep.seconds = sw.seconds();
  return rep;
}

SSCRunReport runSSC(const Instance& inst) {
  Stopwatch sw;
  writeManifest(inst);
  const Problem pb = inst.problem();
  const OptimizeResult res = optimize(pb, inst.adm, inst.initialControl(), inst.optOpts);
  const SSCReport ssc = sscCheck(pb, inst.adm, res.u, res.record, inst.sscOpts);

  SSCRunReport rep;
  rep.tau = ssc.tau;
  rep.deltaHat = ssc.deltaHat;
  rep.sigmaHat = ssc.sigmaHat;
  rep.directions = static_cast<int>(ssc.quotients.size());
  rep.minIndex = ssc.minIndex;
  rep.emptyCone = ssc.emptyCone;
  if (!ssc.quotients.empty())
    rep.quotientSpread = *std::max_element(ssc.quotients.begin(), ssc.quotients.end()) -
                         *std::min_element(ssc.quotients.begin(), ssc.quotients.end());

  CsvWriter csv(fs::path(inst.outdir) / "ssc_report.csv", {"direction", "quotient"});
  for (std::size_t i = 0; i < ssc.quotients.size(); ++i)
    csv.row({static_cast<double>(i), ssc.quotients[i]});
  CsvWriter gcsv(fs::path(inst.outdir) / "growth.csv", {"dist_X", "dist_Sigma", "delta_J"});
  for (const auto& row : ssc.growth) gcsv.row({row.distX, row.distSigma, row.deltaJ});
  if (!ssc.minDirection.empty()) {
    CsvWriter dcsv(fs::path(inst.outdir) / "ssc_min_direction.csv", {"t", "values..."});
    for (int k = 1; k <= inst.tg.nt; ++k) {
      std::vector<double> row{inst.tg.node(k)};
      for (Eigen::Index i = 0; i < ssc.minDirection[k].size(); ++i)
        row.push_back(ssc.minDirection[k][i]);
      dcsv.row(row);
    }
  }

  rep.pass = !rep.emptyCone && rep.deltaHat > 0 && ssc.growthHolds;
  rep.seconds = sw.seconds();
  return rep;
}

PotentialCheckReport runCheckPotential(const Instance& inst) {
  Stopwatch sw;
  writeManifest(inst);
  PotentialCheckReport rep;
  CsvWriter csv(fs::path(inst.outdir) / "potential_check.csv",
                {"potential", "order", "h", "error", "observed_order"});

  auto probe = [&](const Potential& pot, const std::string& name, std::vector<double>& orders) {
    const bool bounded = std::isfinite(pot.rMinus());
    std::vector<double> rs;
    for (int i = 0; i <= 12; ++i)
      rs.push_back(bounded ? -0.7 + 1.4 * i / 12.0 : -1.5 + 3.0 * i / 12.0);
    const double h1 = 1e-3, h2 = 5e-4;
    for (int order = 1; order <= 4; ++order) {
      double e1 = 0.0, e2 = 0.0, scale = 0.0;
      for (double r : rs) {
        const double exact = pot.derivative(order, r);
        scale = std::max(scale, std::abs(exact));
        const double fd1 =
            (pot.derivative(order - 1, r + h1) - pot.derivative(order - 1, r - h1)) / (2 * h1);
        const double fd2 =
            (pot.derivative(order - 1, r + h2) - pot.derivative(order - 1, r - h2)) / (2 * h2);
        e1 = std::max(e1, std::abs(fd1 - exact));
        e2 = std::max(e2, std::abs(fd2 - exact));
      }
      double observed;
      if (e1 <= 1e-11 * std::max(1.0, scale) && e2 <= 1e-11 * std::max(1.0, scale))
        observed = -1.0;  // exact to rounding (polynomial tails)
      else
        observed = std::log(e1 / e2) / std::log(h1 / h2);
      orders.push_back(observed);
      csv.row({name, std::to_string(order), formatDouble(h1), formatDouble(e1),
               formatDouble(observed)});
    }
  };

  probe(Potential::regular(), "regular", rep.ordersRegular);
  probe(Potential::logarithmic(2.0), "logarithmic", rep.ordersLogarithmic);

  PotentialPair reg(Potential::regular(), Potential::regular());
  PotentialPair log2(Potential::logarithmic(2.0), Potential::logarithmic(2.0));
  rep.a2RegularPass = checkA2(reg).pass;
  rep.a2LogPass = checkA2(log2).pass;

  auto ordersOk = [](const std::vector<double>& orders) {
    for (double o : orders)
      if (o >= 0 && std::abs(o - 2.0) > 0.4) return false;
    return true;
  };
  rep.pass = ordersOk(rep.ordersRegular) && ordersOk(rep.ordersLogarithmic) &&
             rep.a2RegularPass && rep.a2LogPass;
  rep.seconds = sw.seconds();
  return rep;
}

}  // namespace chb
