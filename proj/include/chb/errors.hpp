#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace chb {

// Error classes map 1:1 onto CLI exit codes: config 2, solver 3, assertion 4.
enum class ErrorClass { Config = 2, Solver = 3, Assertion = 4 };

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, std::string msg) : std::runtime_error(std::move(msg)), cls_(cls) {}
  [[nodiscard]] ErrorClass errorClass() const { return cls_; }

private:
  ErrorClass cls_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(ErrorClass::Config, "ConfigError: " + msg) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& msg) : Error(ErrorClass::Solver, msg) {}
};

struct AssertionError : Error {
  explicit AssertionError(const std::string& msg) : Error(ErrorClass::Assertion, msg) {}
};

struct MeanNotZero : SolverError {
  explicit MeanNotZero(const std::string& msg) : SolverError("MeanNotZero: " + msg) {}
};

struct SolverDiverged : SolverError {
  explicit SolverDiverged(const std::string& msg) : SolverError("SolverDiverged: " + msg) {}
};

struct LinearSolveFailed : SolverError {
  int step = -1;
  explicit LinearSolveFailed(const std::string& msg, int step_ = -1)
      : SolverError("LinearSolveFailed: " + msg), step(step_) {}
};

struct NewtonDiverged : SolverError {
  int step;
  std::vector<double> residualHistory;
  NewtonDiverged(int step_, std::vector<double> history, const std::string& msg)
      : SolverError("NewtonDiverged: " + msg), step(step_), residualHistory(std::move(history)) {}
};

struct SeparationLost : SolverError {
  int step;
  SeparationLost(int step_, const std::string& msg)
      : SolverError("SeparationLost: " + msg), step(step_) {}
};

struct OutOfDomain : SolverError {
  explicit OutOfDomain(const std::string& msg) : SolverError("OutOfDomain: " + msg) {}
};

struct NonConforming : SolverError {
  explicit NonConforming(const std::string& msg) : SolverError("NonConforming: " + msg) {}
};

struct CompatibilityViolated : SolverError {
  explicit CompatibilityViolated(const std::string& msg)
      : SolverError("CompatibilityViolated: " + msg) {}
};

struct InfeasibleSet : ConfigError {
  explicit InfeasibleSet(const std::string& msg) : ConfigError("InfeasibleSet: " + msg) {}
};

}  // namespace chb
