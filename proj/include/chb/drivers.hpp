#pragma once

#include <string>
#include <vector>

#include "chb/config.hpp"

namespace chb {

/// Every subcommand returns a report with an overall pass flag and its wall
/// time; artifacts (CSV tables, field dumps, manifest) go to run.outdir.

struct SimulateReport {
  double maxDrift = 0.0;
  double driftTol = 0.0;
  double minSeparation = 0.0;
  int totalNewtonIterations = 0;
  int energyViolations = 0;
  bool pass = false;
  double seconds = 0.0;
};

struct AdjointCheckReport {
  std::vector<double> mismatches;  // relative, one per trial
  double worst = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

struct GradientCheckReport {
  double refEps = 0.0;
  double refError = 0.0;  // relative FD error at refEps
  double slope = 0.0;     // FD-order slope over the eps ladder
  bool pass = false;
  double seconds = 0.0;
};

struct LipschitzProbeReport {
  std::string name;
  std::vector<double> ratios;
  double median = 0.0;
  double maxRatio = 0.0;
  double trendSlope = 0.0;  // log ratio vs log eps; ~0 for Lipschitz behaviour
  int warnings = 0;         // ratios above 2x median (warn-only)
  bool bounded = false;
};

struct TaylorCheckReport {
  double slopeS1 = 0.0;
  double slopeS2 = 0.0;
  double slopeJ = 0.0;
  std::vector<LipschitzProbeReport> lipschitz;
  bool pass = false;
  double seconds = 0.0;
};

struct HessianCheckReport {
  std::vector<double> values;
  std::vector<double> symmetryErrors;  // relative
  std::vector<double> crossErrors;     // relative, vs the D2S route
  bool pass = false;
  double seconds = 0.0;
};

struct OptimizeReport {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double J = 0.0;
  double characterizationError = 0.0;  // ||u - clamp(-qG/b0)||_Sigma
  bool budgetActive = false;
  bool pass = false;
  double seconds = 0.0;
};

struct SSCRunReport {
  double tau = 0.0;
  double deltaHat = 0.0;
  double sigmaHat = 0.0;
  int directions = 0;
  int minIndex = -1;
  bool emptyCone = false;
  double quotientSpread = 0.0;  // max - min quotient (pure-penalty sanity)
  bool pass = false;
  double seconds = 0.0;
};

struct PotentialCheckReport {
  // Observed FD order per derivative order 1..4, for (regular, logarithmic);
  // negative entries mean "exact to rounding".
  std::vector<double> ordersRegular;
  std::vector<double> ordersLogarithmic;
  bool a2RegularPass = false;
  bool a2LogPass = false;
  bool pass = false;
  double seconds = 0.0;
};

SimulateReport runSimulate(const Instance& inst);
AdjointCheckReport runCheckAdjoint(const Instance& inst, int trials = 5);
GradientCheckReport runCheckGradient(const Instance& inst);
TaylorCheckReport runCheckTaylor(const Instance& inst, int lipschitzSamples = 10);
HessianCheckReport runCheckHessian(const Instance& inst, int pairs = 3);
OptimizeReport runOptimize(const Instance& inst);
SSCRunReport runSSC(const Instance& inst);
PotentialCheckReport runCheckPotential(const Instance& inst);

/// Seeded smooth probe control used by the check drivers.
ControlTrajectory probeControl(const Instance& inst, double amplitude, std::uint64_t salt);

void writeManifest(const Instance& inst);

}  // namespace chb
