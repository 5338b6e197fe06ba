#include "chb/geometry.hpp"

#include <cmath>
#include <string>

#include "chb/errors.hpp"

namespace chb {

namespace {

void requireGrid(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

Geometry Geometry::strip2d(int nx, int ny, double lx, double ly) {
  requireGrid(nx >= 3, "geometry.nx: strip2d needs nx >= 3");
  requireGrid(ny >= 2, "geometry.ny: strip2d needs ny >= 2");
  requireGrid(lx > 0 && ly > 0, "geometry.lx/ly must be positive");
  Geometry g;
  g.mode_ = Mode::Strip2d;
  g.nx_ = nx;
  g.ny_ = ny;
  g.lx_ = lx;
  g.ly_ = ly;
  g.hx_ = lx / nx;
  g.hy_ = ly / ny;
  g.buildStrip();
  g.buildNeumannSolver();
  return g;
}

Geometry Geometry::interval1d(int nx, double lx) {
  requireGrid(nx >= 2, "geometry.nx: interval1d needs nx >= 2");
  requireGrid(lx > 0, "geometry.lx must be positive");
  Geometry g;
  g.mode_ = Mode::Interval1d;
  g.nx_ = nx;
  g.ny_ = 0;
  g.lx_ = lx;
  g.ly_ = 0;
  g.hx_ = lx / nx;
  g.hy_ = 0;
  g.buildInterval();
  g.buildNeumannSolver();
  return g;
}

void Geometry::buildStrip() {
  const int n = nx_ * (ny_ + 1);
  auto id = [this](int i, int j) { return j * nx_ + ((i % nx_) + nx_) % nx_; };

  weights_.resize(n);
  for (int j = 0; j <= ny_; ++j) {
    const double theta = (j == 0 || j == ny_) ? 0.5 : 1.0;
    for (int i = 0; i < nx_; ++i) weights_[id(i, j)] = hx_ * hy_ * theta;
  }
  domainMeasure_ = lx_ * ly_;

  bdryIndex_.resize(2 * nx_);
  for (int i = 0; i < nx_; ++i) {
    bdryIndex_[i] = id(i, 0);
    bdryIndex_[nx_ + i] = id(i, ny_);
  }
  bdryWeights_ = Vec::Constant(2 * nx_, hx_);
  bdryMeasure_ = 2.0 * lx_;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(8 * n);
  auto edge = [&trips](int a, int b, double c) {
    trips.emplace_back(a, a, c);
    trips.emplace_back(b, b, c);
    trips.emplace_back(a, b, -c);
    trips.emplace_back(b, a, -c);
  };
  // x-edges (periodic), trapezoid weight in y; y-edges full weight.
  for (int j = 0; j <= ny_; ++j) {
    const double theta = (j == 0 || j == ny_) ? 0.5 : 1.0;
    const double cx = hy_ * theta / hx_;
    for (int i = 0; i < nx_; ++i) edge(id(i, j), id(i + 1, j), cx);
  }
  const double cy = hx_ / hy_;
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) edge(id(i, j), id(i, j + 1), cy);
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(trips.begin(), trips.end());
  stiffness_.makeCompressed();

  // Laplace-Beltrami stiffness: periodic 1-D second-difference form per line.
  std::vector<Eigen::Triplet<double>> gtrips;
  const double cg = 1.0 / hx_;
  for (int line = 0; line < 2; ++line) {
    const int off = line * nx_;
    for (int i = 0; i < nx_; ++i) {
      const int a = off + i, b = off + (i + 1) % nx_;
      gtrips.emplace_back(a, a, cg);
      gtrips.emplace_back(b, b, cg);
      gtrips.emplace_back(a, b, -cg);
      gtrips.emplace_back(b, a, -cg);
    }
  }
  bdryStiffness_.resize(2 * nx_, 2 * nx_);
  bdryStiffness_.setFromTriplets(gtrips.begin(), gtrips.end());
  bdryStiffness_.makeCompressed();
}

void Geometry::buildInterval() {
  const int n = nx_ + 1;
  weights_.resize(n);
  for (int i = 0; i <= nx_; ++i)
    weights_[i] = hx_ * ((i == 0 || i == nx_) ? 0.5 : 1.0);
  domainMeasure_ = lx_;

  bdryIndex_ = {0, nx_};
  bdryWeights_ = Vec::Constant(2, 1.0);
  bdryMeasure_ = 2.0;

  std::vector<Eigen::Triplet<double>> trips;
  const double c = 1.0 / hx_;
  for (int i = 0; i < nx_; ++i) {
    trips.emplace_back(i, i, c);
    trips.emplace_back(i + 1, i + 1, c);
    trips.emplace_back(i, i + 1, -c);
    trips.emplace_back(i + 1, i, -c);
  }
  stiffness_.resize(n, n);
  stiffness_.setFromTriplets(trips.begin(), trips.end());
  stiffness_.makeCompressed();

  bdryStiffness_.resize(2, 2);
  bdryStiffness_.setZero();
  bdryStiffness_.makeCompressed();
}

Vec Geometry::trace(const Vec& bulk) const {
  Vec out(nBdry());
  for (int g = 0; g < nBdry(); ++g) out[g] = bulk[bdryIndex_[g]];
  return out;
}

Vec Geometry::liftBdry(const Vec& bdry) const {
  Vec out = Vec::Zero(nBulk());
  for (int g = 0; g < nBdry(); ++g) out[bdryIndex_[g]] += bdry[g];
  return out;
}

PairField Geometry::makePair(Vec bulk) const {
  PairField p;
  p.bdry = trace(bulk);
  p.bulk = std::move(bulk);
  return p;
}

double Geometry::innerBulk(const Vec& u, const Vec& v) const {
  return u.cwiseProduct(weights_).dot(v);
}

double Geometry::innerBdry(const Vec& u, const Vec& v) const {
  return u.cwiseProduct(bdryWeights_).dot(v);
}

double Geometry::normBulk(const Vec& u) const { return std::sqrt(innerBulk(u, u)); }

double Geometry::normBdry(const Vec& u) const { return std::sqrt(innerBdry(u, u)); }

double Geometry::meanValue(const Vec& v) const {
  return weights_.dot(v) / domainMeasure_;
}

double Geometry::dirichletForm(const Vec& u, const Vec& v) const {
  return u.dot(stiffness_ * v);
}

double Geometry::bdryDirichletForm(const Vec& u, const Vec& v) const {
  return u.dot(bdryStiffness_ * v);
}

Vec Geometry::laplacian(const Vec& v) const {
  Vec out(nBulk());
  if (mode_ == Mode::Strip2d) {
    auto id = [this](int i, int j) { return j * nx_ + ((i % nx_) + nx_) % nx_; };
    for (int j = 0; j <= ny_; ++j)
      for (int i = 0; i < nx_; ++i) {
        const double dxx =
            (v[id(i + 1, j)] - 2.0 * v[id(i, j)] + v[id(i - 1, j)]) / (hx_ * hx_);
        double dyy;
        if (j == 0)
          dyy = (v[id(i, 0)] - 2.0 * v[id(i, 1)] + v[id(i, 2)]) / (hy_ * hy_);
        else if (j == ny_)
          dyy = (v[id(i, ny_)] - 2.0 * v[id(i, ny_ - 1)] + v[id(i, ny_ - 2)]) / (hy_ * hy_);
        else
          dyy = (v[id(i, j + 1)] - 2.0 * v[id(i, j)] + v[id(i, j - 1)]) / (hy_ * hy_);
        out[id(i, j)] = dxx + dyy;
      }
  } else {
    const int n = nx_;
    for (int i = 0; i <= n; ++i) {
      double dxx;
      if (i == 0)
        dxx = (v[0] - 2.0 * v[1] + v[2]) / (hx_ * hx_);
      else if (i == n)
        dxx = (v[n] - 2.0 * v[n - 1] + v[n - 2]) / (hx_ * hx_);
      else
        dxx = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (hx_ * hx_);
      out[i] = dxx;
    }
  }
  return out;
}

Vec Geometry::normalDerivative(const Vec& v) const {
  Vec out(nBdry());
  if (mode_ == Mode::Strip2d) {
    auto id = [this](int i, int j) { return j * nx_ + i; };
    for (int i = 0; i < nx_; ++i) {
      out[i] = (3.0 * v[id(i, 0)] - 4.0 * v[id(i, 1)] + v[id(i, 2)]) / (2.0 * hy_);
      out[nx_ + i] =
          (3.0 * v[id(i, ny_)] - 4.0 * v[id(i, ny_ - 1)] + v[id(i, ny_ - 2)]) / (2.0 * hy_);
    }
  } else {
    const int n = nx_;
    out[0] = (3.0 * v[0] - 4.0 * v[1] + v[2]) / (2.0 * hx_);
    out[1] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * hx_);
  }
  return out;
}

void Geometry::buildNeumannSolver() {
  // Augmented zero-mean system [K, M1; (M1)^T, 0]; the multiplier absorbs
  // the (tiny) mean inconsistency of the datum.
  const int n = nBulk();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(stiffness_.nonZeros() + 2 * n);
  for (int c = 0; c < stiffness_.outerSize(); ++c)
    for (SpMat::InnerIterator it(stiffness_, c); it; ++it)
      trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int i = 0; i < n; ++i) {
    trips.emplace_back(i, n, weights_[i]);
    trips.emplace_back(n, i, weights_[i]);
  }
  SpMat aug(n + 1, n + 1);
  aug.setFromTriplets(trips.begin(), trips.end());
  aug.makeCompressed();
  neumannLU_ = std::make_shared<Eigen::SparseLU<SpMat>>();
  neumannLU_->compute(aug);
  if (neumannLU_->info() != Eigen::Success)
    throw SolverDiverged("neumann_inverse factorization failed");
}

Vec Geometry::neumannInverse(const Vec& vstar, double meanTol, double linTol) const {
  const double nrm = normBulk(vstar);
  const double mean = meanValue(vstar);
  if (std::abs(mean) > meanTol * std::max(1e-30, nrm))
    throw MeanNotZero("neumann_inverse datum has mean " + std::to_string(mean));

  const int n = nBulk();
  Vec rhs(n + 1);
  rhs.head(n) = weights_.cwiseProduct(vstar);
  rhs[n] = 0.0;
  Vec sol = neumannLU_->solve(rhs);
  Vec v = sol.head(n);
  const double resid = (stiffness_ * v - rhs.head(n)).norm();
  if (resid > linTol * std::max(1.0, rhs.head(n).norm()))
    throw SolverDiverged("neumann_inverse residual " + std::to_string(resid));
  return v;
}

double Geometry::dualNorm(const Vec& vstar, double meanTol, double linTol) const {
  Vec v = neumannInverse(vstar, meanTol, linTol);
  return std::sqrt(std::max(0.0, dirichletForm(v, v)));
}

PairNorms Geometry::pairNorms(const PairField& v, double conformTol) const {
  const Vec tr = trace(v.bulk);
  const double mismatch = (tr - v.bdry).cwiseAbs().maxCoeff();
  const double scale = 1.0 + v.bulk.cwiseAbs().maxCoeff();
  if (mismatch > conformTol * scale)
    throw NonConforming("pair trace mismatch " + std::to_string(mismatch));
  PairNorms out;
  const double h2 = innerBulk(v.bulk, v.bulk) + innerBdry(v.bdry, v.bdry);
  out.h = std::sqrt(h2);
  out.v = std::sqrt(h2 + dirichletForm(v.bulk, v.bulk) + bdryDirichletForm(v.bdry, v.bdry));
  return out;
}

double Geometry::xCoord(int bulkIndex) const {
  return (mode_ == Mode::Strip2d) ? hx_ * (bulkIndex % nx_) : hx_ * bulkIndex;
}

double Geometry::yCoord(int bulkIndex) const {
  return (mode_ == Mode::Strip2d) ? hy_ * (bulkIndex / nx_) : 0.0;
}

double Geometry::bdryXCoord(int g) const {
  if (mode_ == Mode::Strip2d) return hx_ * (g % nx_);
  return (g == 0) ? 0.0 : lx_;
}

TrajectoryNorms trajectoryNorms(const Geometry& g, const TimeGrid& tg,
                                const std::vector<Vec>& bulk) {
  TrajectoryNorms out;
  const double dt = tg.dt();
  double l2 = 0.0, dq = 0.0;
  for (int k = 0; k <= tg.nt; ++k) {
    PairField p = g.makePair(bulk[k]);
    PairNorms n = g.pairNorms(p);
    out.linfV = std::max(out.linfV, n.v);
    if (k >= 1) {
      l2 += dt * n.h * n.h;
      const Vec d = (bulk[k] - bulk[k - 1]) / dt;
      PairField dp = g.makePair(d);
      PairNorms dn = g.pairNorms(dp);
      dq += dt * dn.h * dn.h;
    }
  }
  out.l2H = std::sqrt(l2);
  out.h1H = std::sqrt(l2 + dq);
  out.y = out.h1H + out.linfV;
  return out;
}

double innerL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& a,
                    const std::vector<Vec>& b) {
  double s = 0.0;
  for (int k = 1; k <= tg.nt; ++k) s += tg.dt() * g.innerBdry(a[k], b[k]);
  return s;
}

double normL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry) {
  return std::sqrt(innerL2Sigma(g, tg, bdry, bdry));
}

double normDtL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry) {
  double s = 0.0;
  for (int k = 2; k <= tg.nt; ++k) {
    const Vec d = (bdry[k] - bdry[k - 1]) / tg.dt();
    s += tg.dt() * g.innerBdry(d, d);
  }
  return std::sqrt(s);
}

double normX(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry) {
  double linf = 0.0;
  for (int k = 1; k <= tg.nt; ++k)
    linf = std::max(linf, bdry[k].cwiseAbs().maxCoeff());
  const double l2 = normL2Sigma(g, tg, bdry);
  const double dq = normDtL2Sigma(g, tg, bdry);
  return std::sqrt(l2 * l2 + dq * dq) + linf;
}

}  // namespace chb
