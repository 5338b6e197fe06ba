#include "chb/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chb/errors.hpp"

namespace chb {

Potential Potential::regular() {
  Potential p;
  p.kind_ = PotentialKind::Regular;
  return p;
}

Potential Potential::logarithmic(double c) {
  if (c <= 0) throw ConfigError("potential.c must be positive");
  Potential p;
  p.kind_ = PotentialKind::Logarithmic;
  p.c_ = c;
  p.rMinus_ = -1.0;
  p.rPlus_ = 1.0;
  return p;
}

Potential Potential::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw ConfigError("potential.coeffs must be nonempty");
  Potential p;
  p.kind_ = PotentialKind::Polynomial;
  p.coeffs_ = std::move(coeffs);
  return p;
}

double Potential::derivative(int order, double r) const {
  switch (kind_) {
    case PotentialKind::Regular:
      // f(r) = (r^2 - 1)^2 / 4
      switch (order) {
        case 0: return 0.25 * (r * r - 1.0) * (r * r - 1.0);
        case 1: return r * r * r - r;
        case 2: return 3.0 * r * r - 1.0;
        case 3: return 6.0 * r;
        case 4: return 6.0;
        default: break;
      }
      break;
    case PotentialKind::Logarithmic: {
      // f(r) = (1+r)ln(1+r) + (1-r)ln(1-r) - c r^2 on (-1, 1)
      const double a = 1.0 + r, b = 1.0 - r;
      switch (order) {
        case 0: return a * std::log(a) + b * std::log(b) - c_ * r * r;
        case 1: return std::log(a) - std::log(b) - 2.0 * c_ * r;
        case 2: return 1.0 / a + 1.0 / b - 2.0 * c_;
        case 3: return -1.0 / (a * a) + 1.0 / (b * b);
        case 4: return 2.0 / (a * a * a) + 2.0 / (b * b * b);
        default: break;
      }
      break;
    }
    case PotentialKind::Polynomial: {
      if (order < 0 || order > 4) break;
      // Horner on the order-th formal derivative.
      const int n = static_cast<int>(coeffs_.size());
      double acc = 0.0;
      for (int i = n - 1; i >= order; --i) {
        double fac = 1.0;
        for (int j = 0; j < order; ++j) fac *= (i - j);
        acc = acc * r + fac * coeffs_[i];
      }
      return acc;
    }
  }
  throw OutOfDomain("potential derivative order " + std::to_string(order) + " unsupported");
}

PotentialPair::PotentialPair(Potential f, Potential fGamma, double guardRel)
    : f_(std::move(f)), fG_(std::move(fGamma)),
      clampCount_(std::make_shared<std::atomic<long>>(0)) {
  rMinus_ = std::max(f_.rMinus(), fG_.rMinus());
  rPlus_ = std::min(f_.rPlus(), fG_.rPlus());
  if (!(rMinus_ < 0.0 && 0.0 < rPlus_))
    throw ConfigError("potential domain must contain 0");
  guard_ = std::isfinite(rPlus_ - rMinus_) ? guardRel * (rPlus_ - rMinus_) : 0.0;
}

double PotentialPair::clamp(double r) const {
  if (!std::isfinite(rMinus_)) return r;
  const double lo = rMinus_ + guard_, hi = rPlus_ - guard_;
  return std::min(std::max(r, lo), hi);
}

double PotentialPair::eval(const Potential& p, int order, double r) const {
  if (order < 0 || order > 4)
    throw OutOfDomain("derivative order must be in 0..4");
  if (!inDomain(r))
    throw OutOfDomain("argument " + std::to_string(r) + " outside [" +
                      std::to_string(rMinus_) + ", " + std::to_string(rPlus_) + "]");
  const double rc = clamp(r);
  if (rc != r) clampCount_->fetch_add(1, std::memory_order_relaxed);
  return p.derivative(order, rc);
}

namespace {

// Graded sample grid on the evaluation domain, clustering at both endpoints.
std::vector<double> sampleGrid(const PotentialPair& pair, int samples) {
  std::vector<double> rs;
  const bool bounded = std::isfinite(pair.rMinus());
  const double lo = bounded ? pair.rMinus() + pair.guard() : -3.0;
  const double hi = bounded ? pair.rPlus() - pair.guard() : 3.0;
  const int uniform = samples / 2;
  for (int i = 0; i < uniform; ++i)
    rs.push_back(lo + (hi - lo) * (i + 0.5) / uniform);
  // Geometric approach to each end.
  const int tail = (samples - uniform) / 2;
  const double range = hi - lo;
  for (int j = 1; j <= tail; ++j) {
    const double d = range * 0.25 * std::pow(10.0, -4.0 * j / tail);
    rs.push_back(lo + d);
    rs.push_back(hi - d);
  }
  std::sort(rs.begin(), rs.end());
  return rs;
}

}  // namespace

A2Report checkA2(const PotentialPair& pair, int samples) {
  if (samples < 100) throw ConfigError("check_A2 requires samples >= 100");
  A2Report rep;
  const auto rs = sampleGrid(pair, samples);

  double minFpp = std::numeric_limits<double>::infinity();
  double minFGpp = std::numeric_limits<double>::infinity();
  double maxGap = -std::numeric_limits<double>::infinity();
  for (double r : rs) {
    minFpp = std::min(minFpp, pair.evalBulk(2, r));
    minFGpp = std::min(minFGpp, pair.evalBdry(2, r));
    maxGap = std::max(maxGap,
                      std::abs(pair.evalBulk(1, r)) - pair.eta * std::abs(pair.evalBdry(1, r)));
  }
  rep.minFpp = minFpp;
  rep.minFGpp = minFGpp;
  rep.maxCompatGap = maxGap;
  rep.fppBoundedBelow = std::isfinite(minFpp);
  rep.fGppBoundedBelow = std::isfinite(minFGpp);
  rep.compatHolds = maxGap <= pair.compatC + 1e-12 * (1.0 + std::abs(pair.compatC));
  rep.zeroAtOrigin = pair.evalBulk(0, 0.0) == 0.0 && pair.evalBdry(0, 0.0) == 0.0;

  if (std::isfinite(pair.rMinus())) {
    // Monotone divergence of f' along a geometric endpoint approach.
    const double range = pair.rPlus() - pair.rMinus();
    bool divPlus = true, divMinus = true;
    double prevP = -std::numeric_limits<double>::infinity();
    double prevM = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 8; ++j) {
      const double d = std::max(pair.guard() * 2.0, range * 1e-2 * std::pow(10.0, -j));
      const double vp = pair.evalBulk(1, pair.rPlus() - d);
      const double vm = pair.evalBulk(1, pair.rMinus() + d);
      divPlus = divPlus && vp >= prevP;
      divMinus = divMinus && vm <= prevM;
      prevP = vp;
      prevM = vm;
    }
    rep.divergesAtEndpoints = divPlus && divMinus && prevP > 1.0 && prevM < -1.0;
  } else {
    rep.divergesAtEndpoints = true;  // vacuous for entire-line potentials
  }

  rep.pass = rep.fppBoundedBelow && rep.fGppBoundedBelow && rep.compatHolds &&
             rep.divergesAtEndpoints;
  std::ostringstream os;
  os << "min f''=" << rep.minFpp << " min fG''=" << rep.minFGpp
     << " max(|f'|-eta|fG'|)=" << rep.maxCompatGap << " f(0)=0:" << rep.zeroAtOrigin;
  rep.detail = os.str();
  return rep;
}

PotentialKind potentialKindFromString(const std::string& s) {
  if (s == "regular") return PotentialKind::Regular;
  if (s == "logarithmic") return PotentialKind::Logarithmic;
  if (s == "custom-polynomial" || s == "polynomial") return PotentialKind::Polynomial;
  throw ConfigError("potential.kind: unknown value '" + s + "'");
}

}  // namespace chb
