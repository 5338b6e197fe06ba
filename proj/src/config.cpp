#include "chb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "chb/csv.hpp"
#include "chb/errors.hpp"
#include "chb/random_fields.hpp"
#include "chb/util.hpp"

namespace chb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace

ConfigMap ConfigMap::parseText(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    map.kv_[section.empty() ? key : section + "." + key] = value;
  }
  return map;
}

ConfigMap ConfigMap::parseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parseText(ss.str());
}

void ConfigMap::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void ConfigMap::applyOverride(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' must be section.key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos)
    throw ConfigError("override key '" + key + "' must be section.key");
  kv_[key] = unquote(trim(assignment.substr(eq + 1)));
}

bool ConfigMap::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string ConfigMap::getString(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string ConfigMap::getString(const std::string& key, const std::string& dflt) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double ConfigMap::getDouble(const std::string& key) const {
  const std::string s = getString(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + s + "' as number");
  }
}

double ConfigMap::getDouble(const std::string& key, double dflt) const {
  return has(key) ? getDouble(key) : dflt;
}

int ConfigMap::getInt(const std::string& key) const {
  const double v = getDouble(key);
  const int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 0)
    throw ConfigError("key '" + key + "': expected integer");
  return i;
}

int ConfigMap::getInt(const std::string& key, int dflt) const {
  return has(key) ? getInt(key) : dflt;
}

std::uint64_t ConfigMap::getSeed(const std::string& key, std::uint64_t dflt) const {
  if (!has(key)) return dflt;
  const std::string s = getString(key);
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': cannot parse '" + s + "' as seed");
  }
}

std::string ConfigMap::render() const {
  std::string currentSection;
  std::ostringstream out;
  for (const auto& [key, value] : kv_) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
    if (section != currentSection) {
      out << "[" << section << "]\n";
      currentSection = section;
    }
    out << name << " = " << value << "\n";
  }
  return out.str();
}

ConfigMap defaultConfig() {
  ConfigMap m;
  m.set("geometry.mode", "strip2d");
  m.set("geometry.nx", "64");
  m.set("geometry.ny", "32");
  m.set("geometry.lx", "1.0");
  m.set("geometry.ly", "0.5");
  m.set("time.T", "0.5");
  m.set("time.nt", "50");
  m.set("potential.kind", "logarithmic");
  m.set("potential.c", "2.0");
  m.set("potential.guard", "1e-9");
  m.set("cost.b_Q", "1.0");
  m.set("cost.b_Sigma", "1.0");
  m.set("cost.b_0", "0.1");
  m.set("cost.b_Omega", "0.0");
  m.set("cost.b_Gamma", "0.0");
  m.set("cost.target", "constant");
  m.set("cost.target_value", "0.1");
  m.set("cost.perturb", "0.01");
  m.set("cost.truth_amplitude", "0.3");
  m.set("admissible.u_min", "-1.0");
  m.set("admissible.u_max", "1.0");
  m.set("admissible.M0", "1e6");
  m.set("state.y0", "cosine");
  m.set("state.y0_mean", "0.0");
  m.set("state.y0_amp", "0.2");
  m.set("solver.newton_tol", "1e-10");
  m.set("solver.newton_max_iter", "30");
  m.set("solver.lin_tol", "1e-10");
  m.set("solver.mean_tol", "1e-12");
  m.set("solver.conservation_tol", "1e-10");
  m.set("optimizer.gtol", "1e-8");
  m.set("optimizer.max_iter", "200");
  m.set("optimizer.armijo_c", "1e-4");
  m.set("optimizer.armijo_shrink", "0.5");
  m.set("optimizer.init_step", "1.0");
  m.set("optimizer.init", "zero");
  m.set("ssc.tau", "auto");
  m.set("ssc.directions", "64");
  m.set("ssc.growth_samples", "12");
  m.set("ssc.growth_radius", "0.1");
  m.set("run.seed", "12345");
  m.set("run.outdir", "out");
  m.set("run.dump_times", "");
  m.set("run.threads", "0");
  return m;
}

namespace {

Geometry makeGeometry(const ConfigMap& m) {
  const std::string mode = m.getString("geometry.mode");
  if (mode == "strip2d")
    return Geometry::strip2d(m.getInt("geometry.nx"), m.getInt("geometry.ny"),
                             m.getDouble("geometry.lx"), m.getDouble("geometry.ly"));
  if (mode == "interval1d")
    return Geometry::interval1d(m.getInt("geometry.nx"), m.getDouble("geometry.lx"));
  throw ConfigError("geometry.mode: unknown value '" + mode + "'");
}

Potential makeSinglePotential(const ConfigMap& m, const std::string& prefix) {
  const auto kind = potentialKindFromString(m.getString(prefix + ".kind"));
  switch (kind) {
    case PotentialKind::Regular:
      return Potential::regular();
    case PotentialKind::Logarithmic:
      return Potential::logarithmic(m.getDouble(prefix + ".c", 2.0));
    case PotentialKind::Polynomial: {
      std::vector<double> coeffs;
      std::istringstream in(m.getString(prefix + ".coeffs"));
      std::string tok;
      while (std::getline(in, tok, ','))
        coeffs.push_back(std::stod(tok));
      return Potential::polynomial(coeffs);
    }
  }
  throw ConfigError(prefix + ".kind: unreachable");
}

PotentialPair makePotential(const ConfigMap& m) {
  Potential f = makeSinglePotential(m, "potential");
  // Boundary potential defaults to f itself (compatibility with eta=1, C=0).
  Potential fG = m.has("potential_gamma.kind") ? makeSinglePotential(m, "potential_gamma") : f;
  PotentialPair pair(std::move(f), std::move(fG), m.getDouble("potential.guard", 1e-9));
  pair.eta = m.getDouble("potential.eta", 1.0);
  pair.compatC = m.getDouble("potential.C", 0.0);
  return pair;
}

Vec makeInitialDatum(const Geometry& geom, const ConfigMap& m) {
  const std::string kind = m.getString("state.y0", "cosine");
  const double mean = m.getDouble("state.y0_mean", 0.0);
  const double amp = m.getDouble("state.y0_amp", 0.2);
  Vec y0(geom.nBulk());
  for (int i = 0; i < geom.nBulk(); ++i) {
    const double x = geom.xCoord(i);
    if (kind == "constant") {
      y0[i] = mean;
    } else if (kind == "cosine") {
      if (geom.mode() == Geometry::Mode::Strip2d) {
        const double y = geom.yCoord(i);
        y0[i] = mean + amp * std::cos(2.0 * M_PI * x / geom.lx()) *
                           std::cos(M_PI * y / geom.ly());
      } else {
        y0[i] = mean + amp * std::cos(M_PI * x / geom.lx());
      }
    } else {
      throw ConfigError("state.y0: unknown value '" + kind + "'");
    }
  }
  return y0;
}

std::vector<double> parseTimes(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!trim(tok).empty()) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

Problem Instance::problem() const {
  Problem pb;
  pb.geom = &geom;
  pb.tg = &tg;
  pb.pot = &pot;
  pb.y0 = y0;
  pb.cost = cost;
  pb.stateOpts = stateOpts;
  pb.linOpts = linOpts;
  return pb;
}

ControlTrajectory Instance::initialControl() const {
  if (optInit == "truth") return truthControl;
  if (optInit == "zero") return zeroControl(geom, tg);
  throw ConfigError("optimizer.init: unknown value '" + optInit + "'");
}

Instance buildInstance(const ConfigMap& map, bool requireCore) {
  if (requireCore)
    for (const char* key : {"time.T", "time.nt"})
      if (!map.has(key)) throw ConfigError("missing required key '" + std::string(key) + "'");

  // Start from defaults so every key is resolved in the manifest; later
  // occurrences win, so the user's map overlays the defaults.
  ConfigMap m = ConfigMap::parseText(defaultConfig().render() + "\n" + map.render());

  Instance inst{
      makeGeometry(m),
      TimeGrid{m.getDouble("time.T"), m.getInt("time.nt")},
      makePotential(m),
      Vec(),
      CostSpec{},
      {},
      AdmissibleSet{},
      StateSolveOptions{},
      LinearSolveOptions{},
      OptimizeOptions{},
      SSCOptions{},
      m.getString("optimizer.init", "zero"),
      m.getSeed("run.seed", 12345),
      m.getString("run.outdir", "out"),
      parseTimes(m.getString("run.dump_times", "")),
      m.getInt("run.threads", 0),
      m};

  if (inst.tg.nt < 1) throw ConfigError("time.nt must be >= 1");
  if (inst.tg.T <= 0) throw ConfigError("time.T must be positive");

  inst.y0 = makeInitialDatum(inst.geom, m);

  inst.stateOpts.newtonTol = m.getDouble("solver.newton_tol", 1e-10);
  inst.stateOpts.newtonMaxIter = m.getInt("solver.newton_max_iter", 30);
  inst.stateOpts.linTol = m.getDouble("solver.lin_tol", 1e-10);
  inst.stateOpts.conservationTol = m.getDouble("solver.conservation_tol", 1e-10);
  inst.linOpts.linTol = inst.stateOpts.linTol;

  inst.optOpts.gtol = m.getDouble("optimizer.gtol", 1e-8);
  inst.optOpts.maxIter = m.getInt("optimizer.max_iter", 200);
  inst.optOpts.armijoC = m.getDouble("optimizer.armijo_c", 1e-4);
  inst.optOpts.armijoShrink = m.getDouble("optimizer.armijo_shrink", 0.5);
  inst.optOpts.initStep = m.getDouble("optimizer.init_step", 1.0);

  const std::string tau = m.getString("ssc.tau", "auto");
  inst.sscOpts.tau = (tau == "auto") ? -1.0 : std::stod(tau);
  inst.sscOpts.directions = m.getInt("ssc.directions", 64);
  inst.sscOpts.growthSamples = m.getInt("ssc.growth_samples", 12);
  inst.sscOpts.growthRadiusX = m.getDouble("ssc.growth_radius", 0.1);
  inst.sscOpts.seed = inst.seed + 7;
  inst.sscOpts.workers = workerCount(inst.threads);

  inst.adm = AdmissibleSet::constantBounds(inst.geom, inst.tg,
                                           m.getDouble("admissible.u_min", -1.0),
                                           m.getDouble("admissible.u_max", 1.0),
                                           m.getDouble("admissible.M0", 1e6));
  inst.adm.validate(inst.geom, inst.tg);

  // Cost weights and targets. Not-all-zero and compatibility are enforced by
  // CostSpec::validate through the adjoint path as well; fail fast here.
  CostSpec cost;
  cost.bQ = m.getDouble("cost.b_Q", 1.0);
  cost.bSigma = m.getDouble("cost.b_Sigma", 1.0);
  cost.b0 = m.getDouble("cost.b_0", 0.1);
  cost.bOmega = m.getDouble("cost.b_Omega", 0.0);
  cost.bGamma = m.getDouble("cost.b_Gamma", 0.0);
  if (cost.bOmega != 0.0 || cost.bGamma != 0.0)
    throw ConfigError("cost.b_Omega and cost.b_Gamma must be zero (final-time tracking "
                      "is outside the compatibility assumption)");
  if (cost.bQ < 0 || cost.bSigma < 0 || cost.b0 < 0)
    throw ConfigError("cost weights must be nonnegative");
  if (cost.bQ == 0 && cost.bSigma == 0 && cost.b0 == 0)
    throw ConfigError("cost weights must not all vanish");

  const int nt = inst.tg.nt;
  cost.zQ.assign(nt + 1, Vec::Zero(inst.geom.nBulk()));
  cost.zSigma.assign(nt + 1, Vec::Zero(inst.geom.nBdry()));
  inst.truthControl = zeroControl(inst.geom, inst.tg);

  const std::string target = m.getString("cost.target", "constant");
  if (target == "constant") {
    const double v = m.getDouble("cost.target_value", 0.1);
    for (int k = 0; k <= nt; ++k) {
      cost.zQ[k].setConstant(v);
      cost.zSigma[k].setConstant(v);
    }
  } else if (target == "sine") {
    const double v = m.getDouble("cost.target_value", 0.1);
    for (int k = 0; k <= nt; ++k) {
      const double tp = std::cos(M_PI * inst.tg.node(k) / inst.tg.T);
      for (int i = 0; i < inst.geom.nBulk(); ++i) {
        const double x = inst.geom.xCoord(i);
        cost.zQ[k][i] = v * tp * std::cos(2.0 * M_PI * x / inst.geom.lx());
      }
      cost.zSigma[k] = inst.geom.trace(cost.zQ[k]);
    }
  } else if (target == "solve-then-perturb") {
    // Ground-truth control -> state -> perturbed tracking targets. Builds
    // problems whose optimum is near a known-good control.
    Rng rng(inst.seed);
    inst.truthControl =
        smoothBoundaryField(inst.geom, inst.tg, rng, m.getDouble("cost.truth_amplitude", 0.3));
    const StateTrajectory truth = solveState(inst.geom, inst.tg, inst.pot, inst.y0,
                                             inst.truthControl, inst.stateOpts);
    const double perturb = m.getDouble("cost.perturb", 0.01);
    const Vec noiseQ = smoothBulkField(inst.geom, rng, 1.0);
    std::vector<Vec> noiseS = smoothBoundaryField(inst.geom, inst.tg, rng, 1.0);
    for (int k = 0; k <= nt; ++k) {
      cost.zQ[k] = truth.y[k] + perturb * noiseQ;
      cost.zSigma[k] = inst.geom.trace(truth.y[k]) + perturb * noiseS[k];
    }
  } else {
    throw ConfigError("cost.target: unknown value '" + target + "'");
  }
  cost.validate(inst.geom, inst.tg);
  inst.cost = std::move(cost);
  return inst;
}

}  // namespace chb
