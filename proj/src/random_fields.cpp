#include "chb/random_fields.hpp"

#include <cmath>

namespace chb {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<Vec> smoothBoundaryField(const Geometry& geom, const TimeGrid& tg, Rng& rng,
                                     double amplitude, int modes) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const int nG = geom.nBdry();

  std::vector<Vec> out(tg.nt + 1, Vec::Zero(nG));
  double maxAbs = 0.0;
  for (int m = 0; m < modes; ++m) {
    const double a0 = coeff(rng), a1 = coeff(rng);
    const double phx = phase(rng);
    const double pht = phase(rng);
    const int kx = m % 3;            // spatial frequency along Gamma
    const int ktm = 1 + m % 2;       // temporal frequency
    for (int k = 0; k <= tg.nt; ++k) {
      const double t = tg.node(k);
      const double tp = std::cos(kTwoPi * ktm * t / (2.0 * tg.T) + pht);
      for (int g = 0; g < nG; ++g) {
        const bool firstLine = (geom.mode() == Geometry::Mode::Strip2d) ? (g < geom.nx())
                                                                        : (g == 0);
        const double a = firstLine ? a0 : a1;
        const double x = geom.bdryXCoord(g);
        const double sp = (geom.mode() == Geometry::Mode::Strip2d)
                              ? std::cos(kTwoPi * kx * x / geom.lx() + phx)
                              : 1.0;
        out[k][g] += a * sp * tp;
      }
    }
  }
  for (int k = 0; k <= tg.nt; ++k) maxAbs = std::max(maxAbs, out[k].cwiseAbs().maxCoeff());
  if (maxAbs > 0)
    for (auto& v : out) v *= amplitude / maxAbs;
  return out;
}

Vec smoothBulkField(const Geometry& geom, Rng& rng, double amplitude, int modes) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const int n = geom.nBulk();
  Vec out = Vec::Zero(n);
  for (int m = 0; m < modes; ++m) {
    const double a = coeff(rng);
    const double phx = phase(rng);
    const int kx = 1 + m % 3;
    const int ky = m % 2 + 1;
    for (int i = 0; i < n; ++i) {
      const double x = geom.xCoord(i);
      if (geom.mode() == Geometry::Mode::Strip2d) {
        const double y = geom.yCoord(i);
        out[i] += a * std::cos(kTwoPi * kx * x / geom.lx() + phx) *
                  std::cos(ky * M_PI * y / geom.ly());
      } else {
        out[i] += a * std::cos(kx * M_PI * x / geom.lx());
      }
    }
  }
  const double maxAbs = out.cwiseAbs().maxCoeff();
  if (maxAbs > 0) out *= amplitude / maxAbs;
  return out;
}

Vec randomBulkField(const Geometry& geom, Rng& rng, double amplitude) {
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  Vec out(geom.nBulk());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = d(rng);
  return out;
}

Vec randomBdryField(const Geometry& geom, Rng& rng, double amplitude) {
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  Vec out(geom.nBdry());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = d(rng);
  return out;
}

}  // namespace chb
