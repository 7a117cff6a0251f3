#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace rolling {

/// Central-difference steps per derivative level. Level 1 differentiates
/// closed-form data (metric, frame); higher levels differentiate quantities
/// that are themselves numerical, so the step grows to keep the subtraction
/// noise below the truncation error. Each derivative applies one Richardson
/// extrapolation level on top of the central stencil (O(h^4) truncation).
inline double fd_step(int level, double xnorm) {
  const double base = level <= 1 ? 1e-5 : (level == 2 ? 2.5e-4 : 5e-3);
  return base * (1.0 + xnorm);
}

/// d/dt f(x + t d) at t = 0, central difference with one Richardson level.
template <typename F>
auto directional_derivative(const F& f, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& d, double h)
    -> decltype(f(x)) {
  auto central = [&](double step) {
    return ((f(x + step * d) - f(x - step * d)) * (0.5 / step)).eval();
  };
  const auto d1 = central(h);
  const auto d2 = central(0.5 * h);
  return ((4.0 * d2 - d1) / 3.0).eval();
}

/// Classic RK4 step for y' = rhs(t, y) on flat vectors.
template <typename Rhs>
Eigen::VectorXd rk4_step(const Rhs& rhs, double t, const Eigen::VectorXd& y,
                         double h) {
  const Eigen::VectorXd k1 = rhs(t, y);
  const Eigen::VectorXd k2 = rhs(t + 0.5 * h, y + (0.5 * h) * k1);
  const Eigen::VectorXd k3 = rhs(t + 0.5 * h, y + (0.5 * h) * k2);
  const Eigen::VectorXd k4 = rhs(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Nearest matrix with orthonormal columns (rows if wide) in Frobenius norm.
/// Throws if the input is numerically rank deficient.
Eigen::MatrixXd polar_project(const Eigen::MatrixXd& a, double rank_tol = 1e-9);

/// Orthogonality defect of a partial isometry candidate: ||A^T A - I|| if
/// tall, ||A A^T - I|| if wide (Frobenius).
double isometry_defect(const Eigen::MatrixXd& a);

/// Rank of the row span of `rows` via SVD with a relative singular value
/// threshold. Returns the full singular value spectrum through `sv`.
int svd_rank(const Eigen::MatrixXd& rows, double rel_tol,
             Eigen::VectorXd* sv = nullptr);

/// Orthonormal basis (rows) of the row span of `rows`.
Eigen::MatrixXd row_span_basis(const Eigen::MatrixXd& rows, double rel_tol);

}  // namespace rolling
