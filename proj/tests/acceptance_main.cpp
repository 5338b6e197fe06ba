// Acceptance suite: runs every criterion end-to-end on the desk-scale default
// instance (strip2d 64x32, T = 0.5, nt = 50, logarithmic potential c = 2,
// b_Q = 1, b_Sigma = 1, b_0 = 0.1) and prints one pass/fail line each.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>

#include "chb/config.hpp"
#include "chb/drivers.hpp"

using namespace chb;

namespace {

int failures = 0;

void report(int id, const std::string& what, bool pass, const std::string& detail,
            double seconds, double budgetSeconds) {
  const bool inBudget = seconds < budgetSeconds;
  const bool ok = pass && inBudget;
  if (!ok) ++failures;
  std::printf("[%2d] %-28s %s  (%s; %.1f s < %.0f s)\n", id, what.c_str(),
              ok ? "PASS" : "FAIL", detail.c_str(), seconds, budgetSeconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

ConfigMap desk(const std::string& outdir) {
  ConfigMap m = defaultConfig();
  m.set("run.outdir", "acceptance_out/" + outdir);
  return m;
}

}  // namespace

int main() {
  std::printf("acceptance: desk-scale instance strip2d 64x32, T=0.5, nt=50, "
              "logarithmic c=2, b_Q=1, b_Sigma=1, b_0=0.1\n");

  {  // 1. Mass conservation on simulate.
    const Instance inst = buildInstance(desk("simulate"));
    const auto rep = runSimulate(inst);
    report(1, "mass conservation", rep.pass,
           fmt("max drift %.2e <= %.2e", rep.maxDrift, rep.driftTol), rep.seconds, 30);
  }

  {  // 2. Adjoint identity over 5 random directions.
    const Instance inst = buildInstance(desk("adjoint"));
    const auto rep = runCheckAdjoint(inst, 5);
    report(2, "adjoint identity", rep.worst <= 1e-8,
           fmt("worst rel mismatch %.2e <= 1e-8", rep.worst), rep.seconds, 120);
  }

  {  // 3. Gradient vs central finite differences.
    const Instance inst = buildInstance(desk("gradient"));
    const auto rep = runCheckGradient(inst);
    report(3, "gradient consistency",
           rep.refError <= 1e-4 && std::abs(rep.slope - 2.0) <= 0.3,
           fmt("rel err %.2e @ eps=1e-4, slope %.2f", rep.refError, rep.slope), rep.seconds,
           300);
  }

  {  // 4+5+9. Taylor orders for S and J, Lipschitz probes.
    const Instance inst = buildInstance(desk("taylor"));
    const auto rep = runCheckTaylor(inst, 10);
    report(4, "first-order Taylor (S)", std::abs(rep.slopeS1 - 2.0) <= 0.3,
           fmt("slope %.2f in 2.0 +- 0.3", rep.slopeS1), rep.seconds, 600);
    report(5, "second-order Taylor (S, J)",
           std::abs(rep.slopeS2 - 3.0) <= 0.4 && std::abs(rep.slopeJ - 3.0) <= 0.4,
           fmt("slopes S %.2f, J %.2f in 3.0 +- 0.4", rep.slopeS2, rep.slopeJ), 0.0, 600);

    bool bounded = true;
    std::string detail;
    for (const auto& p : rep.lipschitz) {
      bounded = bounded && p.bounded;
      detail += fmt("%s max %.2e (warn %d) ", p.name.c_str(), p.maxRatio, p.warnings);
    }
    report(9, "Lipschitz probes (warn-only)", bounded, detail, 0.0, 600);
  }

  {  // 6. Hessian symmetry and the two evaluation routes.
    const Instance inst = buildInstance(desk("hessian"));
    const auto rep = runCheckHessian(inst, 3);
    double sym = 0, cross = 0;
    for (double v : rep.symmetryErrors) sym = std::max(sym, v);
    for (double v : rep.crossErrors) cross = std::max(cross, v);
    report(6, "hessian form", sym <= 1e-12 && cross <= 1e-8,
           fmt("symmetry %.2e <= 1e-12, cross-route %.2e <= 1e-8", sym, cross), rep.seconds,
           600);
  }

  {  // 7. Projection condition on a solve-then-perturb problem.
    ConfigMap m = desk("optimize");
    m.set("cost.target", "solve-then-perturb");
    m.set("optimizer.init", "truth");
    m.set("optimizer.gtol", "1e-9");
    const Instance inst = buildInstance(m);
    const auto rep = runOptimize(inst);
    report(7, "projection condition",
           rep.converged && rep.residual <= 1e-8 && rep.characterizationError <= 1e-7 &&
               !rep.budgetActive,
           fmt("residual %.2e <= 1e-8, ||u-clamp(-q/b0)|| %.2e <= 1e-7, M0 %s", rep.residual,
               rep.characterizationError, rep.budgetActive ? "ACTIVE" : "inactive"),
           rep.seconds, 900);
  }

  {  // 8. SSC sanity: pure penalty exactly b0, then the tracking instance.
    ConfigMap pure = desk("ssc_pure");
    pure.set("cost.b_Q", "0");
    pure.set("cost.b_Sigma", "0");
    pure.set("optimizer.init", "zero");
    const Instance inst = buildInstance(pure);
    const auto rep = runSSC(inst);
    const double b0 = inst.cost.b0;
    const bool quotientsExact =
        rep.directions > 0 && std::abs(rep.deltaHat - b0) <= 1e-12 * b0 &&
        rep.quotientSpread <= 1e-12 * b0;
    const bool growthOk = rep.sigmaHat >= 0.49 * b0;

    ConfigMap track = desk("ssc_tracking");
    track.set("cost.target", "solve-then-perturb");
    track.set("optimizer.init", "truth");
    const Instance inst2 = buildInstance(track);
    const auto rep2 = runSSC(inst2);
    report(8, "SSC sanity",
           quotientsExact && growthOk && !rep2.emptyCone && rep2.deltaHat > 0,
           fmt("pure: quotients=b0 (spread %.1e), sigma %.3f >= %.3f; tracking: delta %.3e > 0 "
               "(%d dirs)",
               rep.quotientSpread, rep.sigmaHat, 0.49 * b0, rep2.deltaHat, rep2.directions),
           rep.seconds + rep2.seconds, 1200);
  }

  {  // 10. Potential derivative chain.
    const Instance inst = buildInstance(desk("potential"));
    const auto rep = runCheckPotential(inst);
    report(10, "potential derivative chain", rep.pass,
           fmt("A2 regular %s, logarithmic %s", rep.a2RegularPass ? "ok" : "FAIL",
               rep.a2LogPass ? "ok" : "FAIL"),
           rep.seconds, 10);
  }

  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
