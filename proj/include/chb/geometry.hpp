#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace chb {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Uniform time grid on [0, T] with nt steps; node times t_k = k*dt.
struct TimeGrid {
  double T = 1.0;
  int nt = 1;

  [[nodiscard]] double dt() const { return T / nt; }
  [[nodiscard]] double node(int k) const { return k * dt(); }
};

/// A bulk grid function together with its boundary trace, the discrete
/// analogue of (v, v_Gamma). Conforming pairs carry bdry == trace(bulk).
struct PairField {
  Vec bulk;
  Vec bdry;
};

struct PairNorms {
  double h = 0.0;  // sqrt(|v|_H^2 + |v_G|_{H_G}^2)
  double v = 0.0;  // adds the bulk and surface gradient seminorms
};

struct TrajectoryNorms {
  double l2H = 0.0;   // L^2(0,T; H-pair)
  double h1H = 0.0;   // adds difference-quotient part
  double linfV = 0.0; // max over nodes of the V-pair norm
  double y = 0.0;     // h1H + linfV, the H^1(0,T;H) \cap L^inf(0,T;V) composite
};

/// Discrete domain: either an x-periodic strip (Gamma = the two horizontal
/// lines) or an interval (Gamma = the two endpoints). Immutable after
/// construction and shareable across threads; all operations are const.
///
/// Grid layout, strip2d: node (i,j) -> index j*nx + i, i in [0,nx) periodic,
/// j in [0,ny]. interval1d: node i -> index i, i in [0,nx].
class Geometry {
public:
  enum class Mode { Strip2d, Interval1d };

  static Geometry strip2d(int nx, int ny, double lx, double ly);
  static Geometry interval1d(int nx, double lx);

  [[nodiscard]] Mode mode() const { return mode_; }
  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] double lx() const { return lx_; }
  [[nodiscard]] double ly() const { return ly_; }
  [[nodiscard]] double hx() const { return hx_; }
  [[nodiscard]] double hy() const { return hy_; }

  [[nodiscard]] int nBulk() const { return static_cast<int>(weights_.size()); }
  [[nodiscard]] int nBdry() const { return static_cast<int>(bdryWeights_.size()); }

  [[nodiscard]] double domainMeasure() const { return domainMeasure_; }
  [[nodiscard]] double bdryMeasure() const { return bdryMeasure_; }

  /// Quadrature weights (diagonal mass) for Omega- and Gamma-integrals.
  [[nodiscard]] const Vec& weights() const { return weights_; }
  [[nodiscard]] const Vec& bdryWeights() const { return bdryWeights_; }

  /// Stiffness matrices: K for the bulk Dirichlet form, K_Gamma for the
  /// Laplace-Beltrami form on Gamma (zero in interval1d mode).
  [[nodiscard]] const SpMat& stiffness() const { return stiffness_; }
  [[nodiscard]] const SpMat& bdryStiffness() const { return bdryStiffness_; }

  /// Gamma -> bulk index map; trace(v)[g] = v[bdryIndex()[g]].
  [[nodiscard]] const std::vector<int>& bdryIndex() const { return bdryIndex_; }

  [[nodiscard]] Vec trace(const Vec& bulk) const;
  /// Transpose of the trace map: scatter a boundary field into a bulk vector.
  [[nodiscard]] Vec liftBdry(const Vec& bdry) const;
  [[nodiscard]] PairField makePair(Vec bulk) const;

  [[nodiscard]] double innerBulk(const Vec& u, const Vec& v) const;
  [[nodiscard]] double innerBdry(const Vec& u, const Vec& v) const;
  [[nodiscard]] double normBulk(const Vec& u) const;
  [[nodiscard]] double normBdry(const Vec& u) const;

  /// Generalized mean value (1/|Omega|) <v, 1>.
  [[nodiscard]] double meanValue(const Vec& v) const;

  /// Pointwise Laplacian with the one-sided closure at the boundary lines;
  /// together with normalDerivative it satisfies the exact summation-by-parts
  /// identity <-Lap u, v>_Omega = <grad u, grad v>_Omega - <dn u, v>_Gamma.
  [[nodiscard]] Vec laplacian(const Vec& v) const;

  /// Outward normal derivative on Gamma, second-order one-sided stencil.
  [[nodiscard]] Vec normalDerivative(const Vec& v) const;

  /// Dirichlet forms <grad u, grad v>_Omega and <grad_G u, grad_G v>_Gamma.
  [[nodiscard]] double dirichletForm(const Vec& u, const Vec& v) const;
  [[nodiscard]] double bdryDirichletForm(const Vec& u, const Vec& v) const;

  /// Solution operator of the zero-mean Neumann problem -Lap v = v*,
  /// mean(v) = 0. Throws MeanNotZero / SolverDiverged.
  [[nodiscard]] Vec neumannInverse(const Vec& vstar, double meanTol = 1e-12,
                                   double linTol = 1e-10) const;

  /// V*-seminorm sqrt(<grad N v*, grad N v*>) of a zero-mean functional.
  [[nodiscard]] double dualNorm(const Vec& vstar, double meanTol = 1e-12,
                                double linTol = 1e-10) const;

  [[nodiscard]] PairNorms pairNorms(const PairField& v, double conformTol = 1e-12) const;

  /// Node coordinates, for target/initial-field generators.
  [[nodiscard]] double xCoord(int bulkIndex) const;
  [[nodiscard]] double yCoord(int bulkIndex) const;
  [[nodiscard]] double bdryXCoord(int bdryIndexArg) const;

private:
  Geometry() = default;
  void buildStrip();
  void buildInterval();
  void buildNeumannSolver();

  Mode mode_ = Mode::Interval1d;
  int nx_ = 0, ny_ = 0;
  double lx_ = 0, ly_ = 0, hx_ = 0, hy_ = 0;
  double domainMeasure_ = 0, bdryMeasure_ = 0;
  Vec weights_, bdryWeights_;
  SpMat stiffness_, bdryStiffness_;
  std::vector<int> bdryIndex_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> neumannLU_;  // augmented zero-mean system
};

/// Norms of a conforming pair trajectory over [0,T]: nodes 0..nt, quadrature
/// sum_{k=1..nt} dt matching the backward Euler scheme, difference quotients
/// for the H^1 part, node max for the L^inf part.
TrajectoryNorms trajectoryNorms(const Geometry& g, const TimeGrid& tg,
                                const std::vector<Vec>& bulk);

/// L^2(Sigma) norm of a boundary trajectory (nodes 0..nt, node 0 unused).
double normL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry);
double innerL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& a,
                    const std::vector<Vec>& b);

/// L^2(0,T) norm of the time-difference quotient of a boundary trajectory.
double normDtL2Sigma(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry);

/// X-norm: H^1(0,T;L^2(Gamma)) part plus the L^inf(Sigma) part.
double normX(const Geometry& g, const TimeGrid& tg, const std::vector<Vec>& bdry);

}  // namespace chb
