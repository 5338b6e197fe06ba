#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chb/adjoint.hpp"
#include "chb/optimizer.hpp"
#include "chb/potentials.hpp"

namespace chb {

/// Flat "[section] key = value" configuration store with typed accessors.
/// Missing required keys raise ConfigError naming the dotted key.
class ConfigMap {
public:
  static ConfigMap parseFile(const std::string& path);
  static ConfigMap parseText(const std::string& text);

  void set(const std::string& dottedKey, const std::string& value);
  /// Applies a "section.key=value" override string.
  void applyOverride(const std::string& assignment);

  [[nodiscard]] bool has(const std::string& key) const;
  [[nodiscard]] std::string getString(const std::string& key) const;
  [[nodiscard]] std::string getString(const std::string& key, const std::string& dflt) const;
  [[nodiscard]] double getDouble(const std::string& key) const;
  [[nodiscard]] double getDouble(const std::string& key, double dflt) const;
  [[nodiscard]] int getInt(const std::string& key) const;
  [[nodiscard]] int getInt(const std::string& key, int dflt) const;
  [[nodiscard]] std::uint64_t getSeed(const std::string& key, std::uint64_t dflt) const;

  /// Serialized "[section] key = value" text, keys sorted; a manifest written
  /// this way re-parses to the same map.
  [[nodiscard]] std::string render() const;

private:
  std::map<std::string, std::string> kv_;
};

/// Defaults: the desk-scale strip instance with the logarithmic potential.
ConfigMap defaultConfig();

/// A resolved, solvable instance: grids, potential, initial datum, cost
/// targets, admissible set, solver options. Built once per run.
struct Instance {
  Geometry geom;
  TimeGrid tg;
  PotentialPair pot;
  Vec y0;
  CostSpec cost;
  ControlTrajectory truthControl;  // ground-truth control (solve-then-perturb targets)
  AdmissibleSet adm;

  StateSolveOptions stateOpts;
  LinearSolveOptions linOpts;
  OptimizeOptions optOpts;
  SSCOptions sscOpts;
  std::string optInit;  // zero | truth

  std::uint64_t seed = 0;
  std::string outdir;
  std::vector<double> dumpTimes;
  int threads = 0;

  ConfigMap resolved;  // manifest view

  [[nodiscard]] Problem problem() const;
  [[nodiscard]] ControlTrajectory initialControl() const;
};

/// requireCore: insist that the user map itself provides the [time] block
/// (file-based runs must state the grid; programmatic defaults need not).
Instance buildInstance(const ConfigMap& map, bool requireCore = false);

}  // namespace chb
