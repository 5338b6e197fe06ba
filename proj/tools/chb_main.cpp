#include <CLI11.hpp>

#include <cstdarg>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "chb/config.hpp"
#include "chb/drivers.hpp"
#include "chb/errors.hpp"

namespace {

struct CommonArgs {
  std::string configPath;
  std::vector<std::string> overrides;
  std::string outdir;
};

chb::Instance loadInstance(const CommonArgs& args) {
  chb::ConfigMap map =
      args.configPath.empty() ? chb::defaultConfig() : chb::ConfigMap::parseFile(args.configPath);
  for (const auto& o : args.overrides) map.applyOverride(o);
  if (!args.outdir.empty()) map.set("run.outdir", args.outdir);
  return chb::buildInstance(map, !args.configPath.empty());
}

void addCommon(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.configPath, "config file (key = value sections)");
  cmd->add_option("--set", args.overrides, "override, e.g. --set time.nt=10")->take_all();
  cmd->add_option("-o,--outdir", args.outdir, "artifact directory (overrides run.outdir)");
}

void line(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::vfprintf(stdout, fmt, ap);
  va_end(ap);
  std::fputc('\n', stdout);
}

const char* passFail(bool ok) { return ok ? "PASS" : "FAIL"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary control of the viscous Cahn-Hilliard equation with dynamic "
               "boundary conditions: simulation, derivative checks, optimization"};
  app.require_subcommand(1);

  CommonArgs args;
  int exitCode = 0;

  auto* simulate = app.add_subcommand("simulate", "run the state solver, dump conservation");
  addCommon(simulate, args);
  auto* checkAdj = app.add_subcommand("check-adjoint", "adjoint identity on random directions");
  addCommon(checkAdj, args);
  auto* checkGrad = app.add_subcommand("check-gradient", "reduced gradient vs central FD");
  addCommon(checkGrad, args);
  auto* checkTaylor =
      app.add_subcommand("check-taylor", "Taylor remainders of S and J, Lipschitz probes");
  addCommon(checkTaylor, args);
  auto* checkHess =
      app.add_subcommand("check-hessian", "Hessian symmetry and the two evaluation routes");
  addCommon(checkHess, args);
  auto* opt = app.add_subcommand("optimize", "projected gradient descent on the reduced cost");
  addCommon(opt, args);
  auto* ssc = app.add_subcommand("ssc-check", "critical-cone Rayleigh quotients, growth probe");
  addCommon(ssc, args);
  auto* checkPot = app.add_subcommand("check-potential", "derivative chain of f and f_Gamma");
  addCommon(checkPot, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto rep = chb::runSimulate(loadInstance(args));
      line("simulate: max drift %.3e (tol %.3e), min separation %.3e, %d Newton iters, %.1fs [%s]",
           rep.maxDrift, rep.driftTol, rep.minSeparation, rep.totalNewtonIterations, rep.seconds,
           passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (checkAdj->parsed()) {
      const auto rep = chb::runCheckAdjoint(loadInstance(args));
      line("check-adjoint: worst relative mismatch %.3e over %zu trials, %.1fs [%s]", rep.worst,
           rep.mismatches.size(), rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (checkGrad->parsed()) {
      const auto rep = chb::runCheckGradient(loadInstance(args));
      line("check-gradient: rel error %.3e at eps=%.0e, FD slope %.2f, %.1fs [%s]", rep.refError,
           rep.refEps, rep.slope, rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (checkTaylor->parsed()) {
      const auto rep = chb::runCheckTaylor(loadInstance(args));
      line("check-taylor: slopes S1 %.2f (want 2), S2 %.2f (want 3), J %.2f (want 3), %.1fs [%s]",
           rep.slopeS1, rep.slopeS2, rep.slopeJ, rep.seconds, passFail(rep.pass));
      for (const auto& p : rep.lipschitz)
        line("  lipschitz %-5s: max ratio %.3e, median %.3e, trend %+.2f, warnings %d", p.name.c_str(),
             p.maxRatio, p.median, p.trendSlope, p.warnings);
      exitCode = rep.pass ? 0 : 4;
    } else if (checkHess->parsed()) {
      const auto rep = chb::runCheckHessian(loadInstance(args));
      double sym = 0, cross = 0;
      for (double v : rep.symmetryErrors) sym = std::max(sym, v);
      for (double v : rep.crossErrors) cross = std::max(cross, v);
      line("check-hessian: symmetry %.3e, cross-route %.3e over %zu pairs, %.1fs [%s]", sym, cross,
           rep.values.size(), rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (opt->parsed()) {
      const auto rep = chb::runOptimize(loadInstance(args));
      line("optimize: %s after %d iters, residual %.3e, J %.6e, projection gap %.3e, %.1fs [%s]",
           rep.converged ? "converged" : "stopped", rep.iterations, rep.residual, rep.J,
           rep.characterizationError, rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (ssc->parsed()) {
      const auto rep = chb::runSSC(loadInstance(args));
      line("ssc-check: tau %.3e, delta-hat %.6e over %d directions, sigma-hat %.6e, %.1fs [%s]",
           rep.tau, rep.deltaHat, rep.directions, rep.sigmaHat, rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    } else if (checkPot->parsed()) {
      const auto rep = chb::runCheckPotential(loadInstance(args));
      line("check-potential: A2 regular %s, logarithmic %s, %.2fs [%s]",
           passFail(rep.a2RegularPass), passFail(rep.a2LogPass), rep.seconds, passFail(rep.pass));
      exitCode = rep.pass ? 0 : 4;
    }
  } catch (const chb::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.errorClass());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return exitCode;
}
