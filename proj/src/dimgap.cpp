#include "rolling/dimgap.hpp"

#include <Eigen/SVD>
#include <stdexcept>
#include <string>

#include "rolling/manifold.hpp"

namespace rolling {

namespace {

ManifoldPtr line_factor() {
  static const ManifoldPtr line = make_euclidean(1);
  return line;
}

bool is_line(const ManifoldPtr& f) {
  return f && f->dim() == 1 && f->constant_curvature() && *f->constant_curvature() == 0.0;
}

/// Recovers the manifold left after peeling the line factor off a product.
ManifoldPtr peel_line(const ManifoldPtr& prod, const char* who) {
  const std::vector<ManifoldPtr> fs = prod->factors();
  if (fs.size() < 2 || !is_line(fs.front()))
    throw std::invalid_argument(std::string(who) +
                                ": manifold is not a product with a leading line factor");
  if (fs.size() == 2) return fs[1];
  return make_product({fs.begin() + 1, fs.end()});
}

void fix_sign(Eigen::VectorXd& v) {
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
}

/// Validating constructor that keeps the matrix bit-for-bit: the lift and
/// projection pair must compose to the identity exactly, so no polar
/// re-projection is applied. Inputs built from valid states stay within the
/// construction tolerance by design.
RollingState checked(ManifoldPtr m, ManifoldPtr m_hat, Eigen::VectorXd x,
                     Eigen::VectorXd x_hat, Eigen::MatrixXd a, const char* who) {
  RollingState q{std::move(m), std::move(m_hat), std::move(x), std::move(x_hat),
                 std::move(a)};
  q.m->require_inside(q.x, who);
  q.m_hat->require_inside(q.x_hat, who);
  if (state_defect(q) > kStateInputTol)
    throw std::invalid_argument(std::string(who) + ": map is not a partial isometry");
  if (q.n() == q.n_hat() && q.A.determinant() < 0.0)
    throw std::invalid_argument(std::string(who) + ": orientation-reversing square map");
  return q;
}

}  // namespace

Eigen::VectorXd kernel_direction(const RollingState& q) {
  if (q.n() != q.n_hat() + 1)
    throw std::invalid_argument("kernel_direction: needs dim M = dim M_hat + 1");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.A, Eigen::ComputeFullV);
  Eigen::VectorXd k = svd.matrixV().col(q.n() - 1);
  fix_sign(k);
  return k;
}

RollingState lift_target(const RollingState& q, double a) {
  const int n = q.n(), nh = q.n_hat();
  if (n != nh + 1 && n != nh)
    throw std::invalid_argument("lift_target: needs dim M_hat in {dim M - 1, dim M}");

  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(nh + 1, n);
  a1.bottomRows(nh) = q.A;
  if (n == nh + 1) {
    const Eigen::VectorXd k = kernel_direction(q);
    a1.row(0) = k.transpose();
    if (a1.determinant() < 0.0) a1.row(0) = -k.transpose();
  }

  Eigen::VectorXd xh1(nh + 1);
  xh1 << a, q.x_hat;
  return checked(q.m, make_product({line_factor(), q.m_hat}), q.x, xh1, a1,
                 "lift_target");
}

RollingState project_target(const RollingState& q1) {
  const ManifoldPtr base = peel_line(q1.m_hat, "project_target");
  return checked(q1.m, base, q1.x, q1.x_hat.tail(q1.n_hat() - 1),
                 q1.A.bottomRows(q1.n_hat() - 1), "project_target");
}

RollingState lift_source(const RollingState& q, double a) {
  const int n = q.n(), nh = q.n_hat();
  if (n != nh - 1)
    throw std::invalid_argument("lift_source: needs dim M = dim M_hat - 1");

  // Unit normal of the image: the left-singular direction with zero singular
  // value, signed so the lifted square map preserves orientation.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.A, Eigen::ComputeFullU);
  Eigen::VectorXd nu = svd.matrixU().col(nh - 1);

  Eigen::MatrixXd a1(nh, n + 1);
  a1.col(0) = nu;
  a1.rightCols(n) = q.A;
  if (a1.determinant() < 0.0) a1.col(0) = -nu;

  Eigen::VectorXd x1(n + 1);
  x1 << a, q.x;
  return checked(make_product({line_factor(), q.m}), q.m_hat, x1, q.x_hat, a1,
                 "lift_source");
}

RollingState project_source(const RollingState& q1) {
  const ManifoldPtr base = peel_line(q1.m, "project_source");
  return checked(base, q1.m_hat, q1.x.tail(q1.n() - 1), q1.x_hat,
                 q1.A.rightCols(q1.n() - 1), "project_source");
}

}  // namespace rolling
