#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace chb {

enum class PotentialKind { Regular, Logarithmic, Polynomial };

/// One double-well nonlinearity with derivatives up to order 4 on (rMinus, rPlus).
class Potential {
public:
  static Potential regular();
  static Potential logarithmic(double c);
  /// coeffs[i] multiplies r^i.
  static Potential polynomial(std::vector<double> coeffs);

  [[nodiscard]] PotentialKind kind() const { return kind_; }
  [[nodiscard]] double rMinus() const { return rMinus_; }
  [[nodiscard]] double rPlus() const { return rPlus_; }
  [[nodiscard]] bool boundedDomain() const { return std::isfinite(rMinus_); }

  /// Raw derivative evaluation, no clamping; r must be inside (rMinus, rPlus).
  [[nodiscard]] double derivative(int order, double r) const;

private:
  PotentialKind kind_ = PotentialKind::Regular;
  double c_ = 0.0;
  std::vector<double> coeffs_;
  double rMinus_ = -std::numeric_limits<double>::infinity();
  double rPlus_ = std::numeric_limits<double>::infinity();
};

/// The (f, f_Gamma) pair with guarded evaluation near singular endpoints.
/// Evaluation clamps arguments to [rMinus+guard, rPlus-guard] and counts
/// clamping events; arguments outside the closed domain are a hard error.
class PotentialPair {
public:
  PotentialPair(Potential f, Potential fGamma, double guardRel = 1e-9);

  [[nodiscard]] const Potential& f() const { return f_; }
  [[nodiscard]] const Potential& fGamma() const { return fG_; }
  [[nodiscard]] double rMinus() const { return rMinus_; }
  [[nodiscard]] double rPlus() const { return rPlus_; }
  [[nodiscard]] double guard() const { return guard_; }

  /// Compatibility constants of |f'| <= eta |f_Gamma'| + C.
  double eta = 1.0;
  double compatC = 0.0;

  [[nodiscard]] double evalBulk(int order, double r) const { return eval(f_, order, r); }
  [[nodiscard]] double evalBdry(int order, double r) const { return eval(fG_, order, r); }

  [[nodiscard]] double clamp(double r) const;
  [[nodiscard]] bool inDomain(double r) const { return r >= rMinus_ && r <= rPlus_; }

  [[nodiscard]] long clampCount() const { return clampCount_->load(); }
  void resetClampCount() const { clampCount_->store(0); }

private:
  [[nodiscard]] double eval(const Potential& p, int order, double r) const;

  Potential f_, fG_;
  double rMinus_, rPlus_, guard_;
  std::shared_ptr<std::atomic<long>> clampCount_;
};

struct A2Report {
  double minFpp = 0.0;
  double minFGpp = 0.0;
  double maxCompatGap = 0.0;  // max over samples of |f'| - eta |f_G'| (should be <= C)
  bool fppBoundedBelow = false;
  bool fGppBoundedBelow = false;
  bool compatHolds = false;
  bool zeroAtOrigin = false;        // f(0) = f_G(0) = 0
  bool divergesAtEndpoints = false; // monotone divergence of f' near r-,r+ (bounded domain)
  bool pass = false;
  std::string detail;
};

/// Samples (rMinus, rPlus) on a graded grid clustering at the endpoints and
/// checks the structural assumptions on the pair. samples >= 100.
A2Report checkA2(const PotentialPair& pair, int samples = 400);

PotentialKind potentialKindFromString(const std::string& s);

}  // namespace chb
