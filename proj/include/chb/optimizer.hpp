#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chb/random_fields.hpp"
#include "chb/reduced_functional.hpp"

namespace chb {

/// Box bounds plus the temporal-derivative budget ||dt v||_{L2(Sigma)} <= M0.
/// Bounds are boundary trajectories (nodes 0..nt); constant-in-time bounds are
/// the common case and keep the clamp nonexpansive in time.
struct AdmissibleSet {
  std::vector<Vec> uMin;
  std::vector<Vec> uMax;
  double M0 = 1e6;

  static AdmissibleSet constantBounds(const Geometry& geom, const TimeGrid& tg, double lo,
                                      double hi, double M0);
  void validate(const Geometry& geom, const TimeGrid& tg) const;
};

struct ProjectionResult {
  ControlTrajectory u;
  bool clamped = false;       // box clamp changed some value
  bool budgetActive = false;  // M0 rescale engaged (approximate projection)
};

/// Pointwise clamp; if the clamped iterate exceeds the M0 budget its temporal
/// fluctuation about the per-point time mean is rescaled and re-clamped once.
ProjectionResult project(const Geometry& geom, const TimeGrid& tg, const ControlTrajectory& v,
                         const AdmissibleSet& adm);

struct OptimizeOptions {
  double gtol = 1e-8;
  int maxIter = 200;
  double armijoC = 1e-4;
  double armijoShrink = 0.5;
  double initStep = 1.0;
  double maxStep = 1e4;
  bool useBarzilaiBorwein = true;  // spectral first trial step, Armijo-safeguarded
};

struct OptimizeHistoryRow {
  int iter = 0;
  double J = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct OptimizeResult {
  ControlTrajectory u;
  EvalRecord record;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool budgetEverActive = false;
  std::vector<OptimizeHistoryRow> history;
};

/// Projected-gradient descent with Armijo backtracking on the reduced cost.
OptimizeResult optimize(const Problem& pb, const AdmissibleSet& adm,
                        const ControlTrajectory& init, const OptimizeOptions& opts = {});

/// Stationarity residual ||u - project(u - g)||_Sigma.
double stationarityResidual(const Problem& pb, const AdmissibleSet& adm,
                            const ControlTrajectory& u, const std::vector<Vec>& grad);

/// Strongly active set mask: |q_Gamma + b0 u| > tau, nodes 1..nt.
using ActiveMask = std::vector<std::vector<std::uint8_t>>;

ActiveMask buildActiveSet(const Geometry& geom, const TimeGrid& tg,
                          const std::vector<Vec>& gradient, double tau);

struct ConeSample {
  std::vector<ControlTrajectory> directions;
  bool emptyCone = false;
};

/// Smooth random directions folded into the tau-critical cone: zero on the
/// active set, sign-constrained where the bounds are touched, within the M0
/// budget. Activity tolerance is relative to the local bound gap.
ConeSample sampleCriticalCone(const Geometry& geom, const TimeGrid& tg,
                              const ControlTrajectory& uBar, const ActiveMask& mask,
                              const AdmissibleSet& adm, int count, std::uint64_t seed,
                              double activityTolRel = 1e-10);

struct GrowthRow {
  double distX = 0.0;      // ||u - uBar||_X
  double distSigma = 0.0;  // ||u - uBar||_Sigma
  double deltaJ = 0.0;     // J(u) - J(uBar)
};

struct SSCReport {
  double tau = 0.0;
  std::vector<double> quotients;  // D2J[h,h] / ||h||_Sigma^2 per direction
  double deltaHat = 0.0;          // min Rayleigh quotient
  int minIndex = -1;
  bool emptyCone = false;
  std::vector<GrowthRow> growth;
  double sigmaHat = 0.0;  // largest sigma with J(u) >= J(uBar) + sigma ||u-uBar||^2
  bool growthHolds = false;
  ControlTrajectory minDirection;  // direction achieving deltaHat, for inspection
};

struct SSCOptions {
  double tau = -1.0;  // < 0: auto, 0.1 * max |gradient|
  int directions = 64;
  int growthSamples = 12;
  double growthRadiusX = 0.1;  // epsilon-ball in the X-norm
  std::uint64_t seed = 20240901;
  int workers = 1;  // growth-sample parallelism (directions are batched anyway)
};

/// Samples the tau-critical cone, evaluates the Rayleigh quotients of the
/// reduced Hessian, and probes local quadratic growth around uBar.
SSCReport sscCheck(const Problem& pb, const AdmissibleSet& adm, const ControlTrajectory& uBar,
                   const EvalRecord& at, const SSCOptions& opts = {});

}  // namespace chb
