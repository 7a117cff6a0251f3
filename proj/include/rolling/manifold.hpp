#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rolling/numerics.hpp"

namespace rolling {

struct OutOfDomainError : std::runtime_error {
  explicit OutOfDomainError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory left the chart; carries the last in-domain time.
struct DomainExitError : std::runtime_error {
  DomainExitError(const std::string& what, double t)
      : std::runtime_error(what), exit_time(t) {}
  double exit_time;
};

/// Validity region of the single chart each manifold is presented in.
class ChartDomain {
 public:
  enum class Type { Ball, Box };

  static ChartDomain ball(double radius);
  static ChartDomain box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  static ChartDomain centered_box(int n, double half_width);

  Type type() const { return type_; }
  double radius() const { return radius_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  bool contains(const Eigen::VectorXd& x) const;
  void require(const Eigen::VectorXd& x, const std::string& context) const;

 private:
  Type type_ = Type::Ball;
  double radius_ = 0.0;
  Eigen::VectorXd lo_, hi_;
};

/// Curvature tensor at a point, stored as frame-component matrices:
/// comp(i,j) has entry [l][k] equal to the F_l component of R(F_i,F_j)F_k.
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  explicit CurvatureTensor(int n)
      : n_(n), comp_(n * n, Eigen::MatrixXd::Zero(n, n)) {}

  int dim() const { return n_; }
  const Eigen::MatrixXd& operator()(int i, int j) const { return comp_[i * n_ + j]; }
  Eigen::MatrixXd& at(int i, int j) { return comp_[i * n_ + j]; }

  /// Sets comp(i,j) = m and comp(j,i) = -m.
  void set_pair(int i, int j, const Eigen::MatrixXd& m);

  /// R(u, v) as an endomorphism in frame components.
  Eigen::MatrixXd apply(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  /// Sectional curvature of span{u, v}; frame components, so the metric is
  /// the Euclidean one here.
  double sectional(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<Eigen::MatrixXd> comp_;
};

/// First covariant derivative of the curvature tensor: dc(c) is the
/// curvature-shaped tensor (nabla_{F_c} R).
class CurvatureCov1 {
 public:
  CurvatureCov1() = default;
  explicit CurvatureCov1(int n) : n_(n), dc_(n, CurvatureTensor(n)) {}

  int dim() const { return n_; }
  const CurvatureTensor& dc(int c) const { return dc_[c]; }
  CurvatureTensor& at(int c) { return dc_[c]; }

  /// (nabla_z R)(x, y) as an endomorphism in frame components.
  Eigen::MatrixXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z) const;

  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<CurvatureTensor> dc_;
};

/// Second covariant derivative: dc2(c2).dc(c1) = (nabla_{F_c2} nabla R)(.., c1).
class CurvatureCov2 {
 public:
  CurvatureCov2() = default;
  explicit CurvatureCov2(int n) : n_(n), dc2_(n, CurvatureCov1(n)) {}

  int dim() const { return n_; }
  const CurvatureCov1& dc2(int c2) const { return dc2_[c2]; }
  CurvatureCov1& at(int c2) { return dc2_[c2]; }

  Eigen::MatrixXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z1, const Eigen::VectorXd& z2) const;

  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<CurvatureCov1> dc2_;
};

/// Gamma(u) = sum_j u_j Gamma(F_j) for frame-component Christoffel matrices.
Eigen::MatrixXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gammas,
                                  const Eigen::VectorXd& u);

/// Riemannian manifold presented in a single chart. Frame components refer to
/// the deterministic orthonormal frame produced by frame(): Gram-Schmidt of
/// the coordinate basis in index order (realized as the inverse transpose of
/// the Cholesky factor of the metric, which is the same thing).
class Manifold;
using ManifoldPtr = std::shared_ptr<const Manifold>;

class Manifold {
 public:
  virtual ~Manifold() = default;

  int dim() const { return n_; }
  const ChartDomain& domain() const { return domain_; }
  const std::string& describe() const { return name_; }

  bool simply_connected() const { return simply_connected_; }
  std::optional<double> constant_curvature() const { return constant_curvature_; }
  /// Whether the catalog entry declares a complete totally geodesic
  /// submanifold of every dimension 1 <= m < dim through every point.
  bool totally_geodesic_all_dims() const { return tg_all_dims_; }

  void require_inside(const Eigen::VectorXd& x, const std::string& context) const;

  /// Product factors in coordinate order; empty for non-product entries.
  virtual std::vector<ManifoldPtr> factors() const { return {}; }

  /// Metric matrix in chart coordinates.
  virtual Eigen::MatrixXd metric(const Eigen::VectorXd& x) const = 0;

  /// Orthonormal frame; column j holds the chart coordinates of F_j. Upper
  /// triangular with positive diagonal by construction.
  Eigen::MatrixXd frame(const Eigen::VectorXd& x) const;

  /// Frame components of a coordinate vector v at x (solves frame * u = v).
  Eigen::VectorXd to_frame(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;

  /// Christoffel matrices of the frame: gamma[j] has entry [l][i] equal to
  /// g(nabla_{F_j} F_i, F_l); each gamma[j] is antisymmetric.
  virtual std::vector<Eigen::MatrixXd> christoffel_frame(const Eigen::VectorXd& x) const;

  /// Coordinate Christoffel symbols; result[c] has entry [a][b] = Gamma^c_ab.
  virtual std::vector<Eigen::MatrixXd> christoffel_coord(const Eigen::VectorXd& x) const;

  virtual CurvatureTensor curvature(const Eigen::VectorXd& x) const;
  virtual CurvatureCov1 curvature_cov1(const Eigen::VectorXd& x) const;
  virtual CurvatureCov2 curvature_cov2(const Eigen::VectorXd& x) const;

  /// Finite-difference paths, available on every manifold regardless of
  /// closed-form overrides; each side serves as the other's cross-check.
  std::vector<Eigen::MatrixXd> christoffel_frame_fd(const Eigen::VectorXd& x) const;
  std::vector<Eigen::MatrixXd> christoffel_coord_fd(const Eigen::VectorXd& x) const;
  CurvatureTensor curvature_fd(const Eigen::VectorXd& x) const;

 protected:
  Manifold(int n, ChartDomain domain, std::string name)
      : n_(n), domain_(std::move(domain)), name_(std::move(name)) {
    if (n < 1) throw std::invalid_argument("manifold dimension must be >= 1");
  }

  /// True when curvature() is closed form; controls the FD step level used
  /// when differentiating it for covariant derivatives.
  virtual bool curvature_closed_form() const { return false; }

  /// Curvature from the connection form of `gamma_of` (2-form formula), with
  /// the derivative taken by central differences at `level`.
  CurvatureTensor curvature_from_connection(
      const Eigen::VectorXd& x,
      const std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>& gamma_of,
      int level) const;

  bool simply_connected_ = true;
  std::optional<double> constant_curvature_;
  bool tg_all_dims_ = false;

 private:
  int n_;
  ChartDomain domain_;
  std::string name_;
};

ManifoldPtr make_euclidean(int n, double half_width = 50.0);
ManifoldPtr make_sphere(int n, double radius = 1.0, double chart_radius_factor = 8.0);
ManifoldPtr make_hyperbolic(int n, double radius = 1.0, double ball_fraction = 0.995);

enum class WarpKind { Constant, Linear, Exponential };

/// Warped metric dr^2 + f(r)^2 (flat fiber metric) on interval x fiber box.
/// Constant: f = a. Linear: f = a + b r. Exponential: f = a exp(b r).
ManifoldPtr make_warped(int fiber_dim, WarpKind kind, double a, double b,
                        double r_lo, double r_hi, double fiber_half_width = 5.0);

ManifoldPtr make_product(std::vector<ManifoldPtr> factors);

/// Metric supplied as a callback; all geometry is finite-difference based.
ManifoldPtr make_custom_metric(int n,
                               std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric,
                               ChartDomain domain, std::string name,
                               bool simply_connected = true);

/// Built-in generic metric I + amplitude * M(x) with a fixed smooth
/// symmetric perturbation that breaks all curvature symmetry.
ManifoldPtr make_perturbed_euclidean(int n, double amplitude = 0.05,
                                     double half_width = 1.5);

}  // namespace rolling
