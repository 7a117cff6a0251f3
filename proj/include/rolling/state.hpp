#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rolling/manifold.hpp"
#include "rolling/rng.hpp"

namespace rolling {

/// Dimension of the configuration space of relative positions of an
/// n-manifold against an n_hat-manifold: n + n_hat + n*n_hat - N(N+1)/2 with
/// N = min(n, n_hat).
int state_dim(int n, int n_hat);

/// Dimension of the fiber over a pair of contact points:
/// n*n_hat - N(N+1)/2.
int vertical_dim(int n, int n_hat);

/// Contact configuration: points on both manifolds plus the relative-position
/// map A in frame components (n_hat x n, orthonormal columns if n <= n_hat,
/// orthonormal rows otherwise; det +1 when square).
struct RollingState {
  ManifoldPtr m;
  ManifoldPtr m_hat;
  Eigen::VectorXd x;
  Eigen::VectorXd x_hat;
  Eigen::MatrixXd A;

  int n() const { return static_cast<int>(A.cols()); }
  int n_hat() const { return static_cast<int>(A.rows()); }
};

/// Construction tolerance on the partial-isometry defect of a user-supplied A.
inline constexpr double kStateInputTol = 1e-6;
/// Post-construction guarantee on the stored A.
inline constexpr double kStateConstructionTol = 1e-9;

/// Validates points and projects A onto the partial isometries of maximal
/// rank. Rejects rank-deficient A, defects beyond kStateInputTol, and
/// orientation-reversing square A.
RollingState make_state(ManifoldPtr m, ManifoldPtr m_hat, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& A);

/// Defect of the stored relative-position map (0 for a valid state up to
/// kStateConstructionTol).
double state_defect(const RollingState& q);

/// Orthonormal basis (Frobenius) of the vertical space at q: matrices B with
/// A^T B antisymmetric (n <= n_hat) or B A^T antisymmetric (n >= n_hat).
/// Deterministic for a given A.
std::vector<Eigen::MatrixXd> vertical_basis(const RollingState& q);

/// Swaps the roles of the two manifolds: (x, x_hat; A) -> (x_hat, x; A^T).
RollingState transpose_dual(const RollingState& q);

/// Canonical inclusion/projection matrix of shape n_hat x n: identity padded
/// with zero rows (n <= n_hat) or zero columns (n >= n_hat).
Eigen::MatrixXd i_nnhat(int n, int n_hat);

struct KernelProjections {
  Eigen::MatrixXd onto_kernel;      // projector onto ker A (zero if n <= n_hat)
  Eigen::MatrixXd onto_complement;  // projector onto (ker A)^perp = A^T A
};

KernelProjections kernel_projections(const RollingState& q);

/// Tangent vector at q in the canonical splitting: base velocities (frame
/// components on each side) plus a vertical matrix.
struct TangentTriple {
  Eigen::VectorXd u;
  Eigen::VectorXd u_hat;
  Eigen::MatrixXd B;

  TangentTriple() = default;
  TangentTriple(Eigen::VectorXd u_, Eigen::VectorXd u_hat_, Eigen::MatrixXd B_)
      : u(std::move(u_)), u_hat(std::move(u_hat_)), B(std::move(B_)) {}

  static TangentTriple zero(int n, int n_hat) {
    return TangentTriple(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n_hat),
                         Eigen::MatrixXd::Zero(n_hat, n));
  }

  TangentTriple operator+(const TangentTriple& o) const {
    return TangentTriple(u + o.u, u_hat + o.u_hat, B + o.B);
  }
  TangentTriple operator-(const TangentTriple& o) const {
    return TangentTriple(u - o.u, u_hat - o.u_hat, B - o.B);
  }
  TangentTriple operator*(double s) const {
    return TangentTriple(s * u, s * u_hat, s * B);
  }

  double norm() const {
    return std::sqrt(u.squaredNorm() + u_hat.squaredNorm() + B.squaredNorm());
  }
};

/// Coordinates of a triple in the tangent space at q: base components
/// followed by vertical-basis coefficients. The part of B outside the
/// vertical space is dropped; its magnitude is returned via off_vertical.
Eigen::VectorXd triple_coordinates(const TangentTriple& t,
                                   const std::vector<Eigen::MatrixXd>& vbasis,
                                   double* off_vertical = nullptr);

/// Inverse of triple_coordinates.
TangentTriple triple_from_coordinates(const Eigen::VectorXd& coords, int n, int n_hat,
                                      const std::vector<Eigen::MatrixXd>& vbasis);

/// Random relative-position map: polar factor of a Gaussian matrix,
/// orientation-fixed when square.
Eigen::MatrixXd random_isometry(int n, int n_hat, Rng& rng);

/// Random point placement plus a random relative-position map (polar factor
/// of a Gaussian matrix, orientation-fixed when square). Points are sampled
/// uniformly within the given fraction of each chart domain.
RollingState random_state(ManifoldPtr m, ManifoldPtr m_hat, Rng& rng,
                          double domain_fraction = 0.4);

/// Uniform sample within the given fraction of a chart domain.
Eigen::VectorXd random_point(const Manifold& m, Rng& rng, double domain_fraction = 0.4);

}  // namespace rolling
