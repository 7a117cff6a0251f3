#include "rolling/state.hpp"

#include <algorithm>
#include <stdexcept>

#include "rolling/numerics.hpp"

namespace rolling {

int state_dim(int n, int n_hat) {
  const int N = std::min(n, n_hat);
  return n + n_hat + n * n_hat - N * (N + 1) / 2;
}

int vertical_dim(int n, int n_hat) {
  const int N = std::min(n, n_hat);
  return n * n_hat - N * (N + 1) / 2;
}

RollingState make_state(ManifoldPtr m, ManifoldPtr m_hat, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& x_hat, const Eigen::MatrixXd& A) {
  if (!m || !m_hat) throw std::invalid_argument("make_state: null manifold");
  if (x.size() != m->dim() || x_hat.size() != m_hat->dim())
    throw std::invalid_argument("make_state: point dimension mismatch");
  m->require_inside(x, "make_state");
  m_hat->require_inside(x_hat, "make_state");
  if (A.rows() != m_hat->dim() || A.cols() != m->dim())
    throw std::invalid_argument("make_state: A must be n_hat x n");

  const double defect_in = isometry_defect(A);
  if (defect_in > kStateInputTol)
    throw std::invalid_argument("make_state: A is not within tolerance of a partial isometry");

  Eigen::MatrixXd P = polar_project(A);  // throws on rank deficiency
  if (P.rows() == P.cols() && P.determinant() < 0.0)
    throw std::invalid_argument("make_state: square A must preserve orientation");
  if (isometry_defect(P) > kStateConstructionTol)
    throw std::logic_error("make_state: projection failed to reach construction tolerance");

  RollingState q;
  q.m = std::move(m);
  q.m_hat = std::move(m_hat);
  q.x = x;
  q.x_hat = x_hat;
  q.A = std::move(P);
  return q;
}

double state_defect(const RollingState& q) { return isometry_defect(q.A); }

std::vector<Eigen::MatrixXd> vertical_basis(const RollingState& q) {
  const int n = q.n(), nh = q.n_hat();
  const int N = std::min(n, nh);
  const int vdim = vertical_dim(n, nh);
  std::vector<Eigen::MatrixXd> basis;
  if (vdim == 0) return basis;

  // Constraint rows: the symmetric part of A^T B (n <= nh) or B A^T (n >= nh)
  // must vanish. Unknown B is vectorized column-major: B(k, j) at j*nh + k.
  const int eqs = N * (N + 1) / 2;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(eqs, n * nh);
  int row = 0;
  if (n <= nh) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++row)
        for (int k = 0; k < nh; ++k) {
          C(row, j * nh + k) += q.A(k, i);
          C(row, i * nh + k) += q.A(k, j);
        }
  } else {
    for (int p = 0; p < nh; ++p)
      for (int s = p; s < nh; ++s, ++row)
        for (int c = 0; c < n; ++c) {
          C(row, c * nh + p) += q.A(s, c);
          C(row, c * nh + s) += q.A(p, c);
        }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = (sv.size() > 0 ? sv(0) : 0.0) * 1e-10;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  const int null_dim = n * nh - rank;
  if (null_dim != vdim)
    throw std::logic_error("vertical_basis: unexpected null-space dimension");

  const Eigen::MatrixXd& V = svd.matrixV();
  basis.reserve(vdim);
  for (int c = n * nh - vdim; c < n * nh; ++c) {
    Eigen::MatrixXd B(nh, n);
    for (int j = 0; j < n; ++j) B.col(j) = V.block(j * nh, c, nh, 1);
    // Deterministic sign: first entry of largest magnitude positive.
    int best = 0;
    double best_abs = 0.0;
    for (int i = 0; i < n * nh; ++i)
      if (std::abs(V(i, c)) > best_abs + 1e-14) {
        best_abs = std::abs(V(i, c));
        best = i;
      }
    if (V(best, c) < 0.0) B = -B;
    basis.push_back(std::move(B));
  }
  return basis;
}

RollingState transpose_dual(const RollingState& q) {
  RollingState d;
  d.m = q.m_hat;
  d.m_hat = q.m;
  d.x = q.x_hat;
  d.x_hat = q.x;
  d.A = q.A.transpose();
  return d;
}

Eigen::MatrixXd i_nnhat(int n, int n_hat) {
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(n_hat, n);
  const int N = std::min(n, n_hat);
  I.topLeftCorner(N, N).setIdentity();
  return I;
}

KernelProjections kernel_projections(const RollingState& q) {
  const int n = q.n();
  KernelProjections kp;
  kp.onto_complement = q.A.transpose() * q.A;
  kp.onto_kernel = Eigen::MatrixXd::Identity(n, n) - kp.onto_complement;
  return kp;
}

Eigen::VectorXd triple_coordinates(const TangentTriple& t,
                                   const std::vector<Eigen::MatrixXd>& vbasis,
                                   double* off_vertical) {
  const int n = static_cast<int>(t.u.size());
  const int nh = static_cast<int>(t.u_hat.size());
  const int vdim = static_cast<int>(vbasis.size());
  Eigen::VectorXd coords(n + nh + vdim);
  coords.head(n) = t.u;
  coords.segment(n, nh) = t.u_hat;
  Eigen::MatrixXd resid = t.B;
  for (int k = 0; k < vdim; ++k) {
    const double c = (vbasis[k].array() * t.B.array()).sum();
    coords(n + nh + k) = c;
    resid -= c * vbasis[k];
  }
  if (off_vertical) *off_vertical = resid.norm();
  return coords;
}

TangentTriple triple_from_coordinates(const Eigen::VectorXd& coords, int n, int n_hat,
                                      const std::vector<Eigen::MatrixXd>& vbasis) {
  const int vdim = static_cast<int>(vbasis.size());
  if (coords.size() != n + n_hat + vdim)
    throw std::invalid_argument("triple_from_coordinates: size mismatch");
  TangentTriple t = TangentTriple::zero(n, n_hat);
  t.u = coords.head(n);
  t.u_hat = coords.segment(n, n_hat);
  for (int k = 0; k < vdim; ++k) t.B += coords(n + n_hat + k) * vbasis[k];
  return t;
}

Eigen::VectorXd random_point(const Manifold& m, Rng& rng, double domain_fraction) {
  const ChartDomain& dom = m.domain();
  const int n = m.dim();
  Eigen::VectorXd x(n);
  if (dom.type() == ChartDomain::Type::Ball) {
    Eigen::VectorXd dir = rng.unit_vector(n);
    const double r = dom.radius() * domain_fraction * std::pow(rng.uniform01(), 1.0 / n);
    x = r * dir;
  } else {
    for (int i = 0; i < n; ++i) {
      const double c = 0.5 * (dom.lo()(i) + dom.hi()(i));
      const double h = 0.5 * (dom.hi()(i) - dom.lo()(i)) * domain_fraction;
      x(i) = c + rng.uniform(-h, h);
    }
  }
  return x;
}

Eigen::MatrixXd random_isometry(int n, int n_hat, Rng& rng) {
  while (true) {
    Eigen::MatrixXd G = rng.gaussian_matrix(n_hat, n);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    if (svd.singularValues()(std::min(n, n_hat) - 1) < 1e-6) continue;  // nearly singular draw
    Eigen::MatrixXd A = polar_project(G);
    if (A.rows() == A.cols() && A.determinant() < 0.0) {
      // Flip the last column's contribution to restore orientation.
      Eigen::JacobiSVD<Eigen::MatrixXd> s2(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::MatrixXd U = s2.matrixU(), V = s2.matrixV();
      U.col(U.cols() - 1) *= -1.0;
      A = U * V.transpose();
    }
    return A;
  }
}

RollingState random_state(ManifoldPtr m, ManifoldPtr m_hat, Rng& rng, double domain_fraction) {
  Eigen::VectorXd x = random_point(*m, rng, domain_fraction);
  Eigen::VectorXd xh = random_point(*m_hat, rng, domain_fraction);
  const Eigen::MatrixXd A = random_isometry(m->dim(), m_hat->dim(), rng);
  return make_state(std::move(m), std::move(m_hat), x, xh, A);
}

}  // namespace rolling
