#include "rolling/numerics.hpp"

#include <Eigen/SVD>

namespace rolling {

Eigen::MatrixXd polar_project(const Eigen::MatrixXd& a, double rank_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= rank_tol * s(0) || s(0) == 0.0) {
    throw std::invalid_argument("polar_project: matrix is numerically rank deficient");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

double isometry_defect(const Eigen::MatrixXd& a) {
  if (a.rows() >= a.cols()) {
    const int q = static_cast<int>(a.cols());
    return (a.transpose() * a - Eigen::MatrixXd::Identity(q, q)).norm();
  }
  const int p = static_cast<int>(a.rows());
  return (a * a.transpose() - Eigen::MatrixXd::Identity(p, p)).norm();
}

int svd_rank(const Eigen::MatrixXd& rows, double rel_tol, Eigen::VectorXd* sv) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    if (sv != nullptr) *sv = Eigen::VectorXd();
    return 0;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  const Eigen::VectorXd s = svd.singularValues();
  if (sv != nullptr) *sv = s;
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

Eigen::MatrixXd row_span_basis(const Eigen::MatrixXd& rows, double rel_tol) {
  if (rows.rows() == 0 || rows.cols() == 0) return Eigen::MatrixXd(0, rows.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return Eigen::MatrixXd(0, rows.cols());
  int rank = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return svd.matrixV().leftCols(rank).transpose();
}

}  // namespace rolling
