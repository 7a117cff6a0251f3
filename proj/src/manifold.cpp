#include "rolling/manifold.hpp"

#include <cmath>
#include <sstream>

namespace rolling {

namespace {

std::string vec_to_string(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << "]";
  return os.str();
}

// Flattens a list of n x n matrices into one n x (n*count) block row so the
// generic directional-derivative helper can act on it.
Eigen::MatrixXd stack_blocks(const std::vector<Eigen::MatrixXd>& blocks) {
  const int n = static_cast<int>(blocks.front().rows());
  Eigen::MatrixXd out(n, n * static_cast<int>(blocks.size()));
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    out.middleCols(static_cast<int>(j) * n, n) = blocks[j];
  }
  return out;
}

Eigen::MatrixXd stack_curvature(const CurvatureTensor& r) {
  const int n = r.dim();
  Eigen::MatrixXd out(n, n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.middleCols((i * n + j) * n, n) = r(i, j);
  return out;
}

Eigen::MatrixXd stack_cov1(const CurvatureCov1& c) {
  const int n = c.dim();
  Eigen::MatrixXd out(n, n * n * n * n);
  for (int d = 0; d < n; ++d)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out.middleCols(((d * n + i) * n + j) * n, n) = c.dc(d)(i, j);
  return out;
}

Eigen::MatrixXd antisym(const Eigen::MatrixXd& m) {
  return 0.5 * (m - m.transpose());
}

}  // namespace

// ---------------------------------------------------------------------------
// ChartDomain

ChartDomain ChartDomain::ball(double radius) {
  if (radius <= 0.0) throw std::invalid_argument("chart ball radius must be positive");
  ChartDomain d;
  d.type_ = Type::Ball;
  d.radius_ = radius;
  return d;
}

ChartDomain ChartDomain::box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size() || lo.size() == 0) {
    throw std::invalid_argument("chart box bounds must have matching nonzero sizes");
  }
  for (int i = 0; i < lo.size(); ++i) {
    if (!(lo(i) < hi(i))) throw std::invalid_argument("chart box must have lo < hi");
  }
  ChartDomain d;
  d.type_ = Type::Box;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

ChartDomain ChartDomain::centered_box(int n, double half_width) {
  return box(Eigen::VectorXd::Constant(n, -half_width),
             Eigen::VectorXd::Constant(n, half_width));
}

bool ChartDomain::contains(const Eigen::VectorXd& x) const {
  if (type_ == Type::Ball) return x.norm() < radius_;
  if (x.size() != lo_.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (x(i) <= lo_(i) || x(i) >= hi_(i)) return false;
  }
  return true;
}

void ChartDomain::require(const Eigen::VectorXd& x, const std::string& context) const {
  if (!contains(x)) {
    throw OutOfDomainError(context + ": point " + vec_to_string(x) +
                           " is outside the chart domain");
  }
}

// ---------------------------------------------------------------------------
// Curvature containers

void CurvatureTensor::set_pair(int i, int j, const Eigen::MatrixXd& m) {
  comp_[i * n_ + j] = m;
  comp_[j * n_ + i] = -m;
}

Eigen::MatrixXd CurvatureTensor::apply(const Eigen::VectorXd& u,
                                       const Eigen::VectorXd& v) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    if (u(i) == 0.0) continue;
    for (int j = 0; j < n_; ++j) {
      if (v(j) == 0.0) continue;
      out.noalias() += u(i) * v(j) * comp_[i * n_ + j];
    }
  }
  return out;
}

double CurvatureTensor::sectional(const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) const {
  const double gram = u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2);
  if (gram <= 1e-14) {
    throw std::invalid_argument("sectional: vectors are linearly dependent");
  }
  return u.dot(apply(u, v) * v) / gram;
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (const auto& c : comp_) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

Eigen::MatrixXd CurvatureCov1::apply(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& z) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (int c = 0; c < n_; ++c) {
    if (z(c) == 0.0) continue;
    out.noalias() += z(c) * dc_[c].apply(x, y);
  }
  return out;
}

double CurvatureCov1::max_abs() const {
  double m = 0.0;
  for (const auto& t : dc_) m = std::max(m, t.max_abs());
  return m;
}

Eigen::MatrixXd CurvatureCov2::apply(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& z1,
                                     const Eigen::VectorXd& z2) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  for (int c = 0; c < n_; ++c) {
    if (z2(c) == 0.0) continue;
    out.noalias() += z2(c) * dc2_[c].apply(x, y, z1);
  }
  return out;
}

double CurvatureCov2::max_abs() const {
  double m = 0.0;
  for (const auto& t : dc2_) m = std::max(m, t.max_abs());
  return m;
}

Eigen::MatrixXd christoffel_apply(const std::vector<Eigen::MatrixXd>& gammas,
                                  const Eigen::VectorXd& u) {
  const int n = static_cast<int>(gammas.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    if (u(j) == 0.0) continue;
    out.noalias() += u(j) * gammas[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifold base

void Manifold::require_inside(const Eigen::VectorXd& x, const std::string& context) const {
  if (x.size() != n_) {
    throw std::invalid_argument(context + ": point dimension " +
                                std::to_string(x.size()) + " does not match " +
                                describe());
  }
  domain_.require(x, context + " on " + describe());
}

Eigen::MatrixXd Manifold::frame(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd g = metric(x);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("frame: metric is not positive definite at " +
                                vec_to_string(x));
  }
  const Eigen::MatrixXd lt = Eigen::MatrixXd(llt.matrixL()).transpose();
  return lt.triangularView<Eigen::Upper>().solve(
      Eigen::MatrixXd::Identity(n_, n_));
}

Eigen::VectorXd Manifold::to_frame(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& v) const {
  const Eigen::MatrixXd f = frame(x);
  return f.triangularView<Eigen::Upper>().solve(v);
}

std::vector<Eigen::MatrixXd> Manifold::christoffel_coord_fd(const Eigen::VectorXd& x) const {
  const double h = fd_step(1, x.norm());
  std::vector<Eigen::MatrixXd> dg(n_);
  for (int a = 0; a < n_; ++a) {
    dg[a] = directional_derivative([this](const Eigen::VectorXd& y) { return metric(y); },
                                   x, Eigen::VectorXd::Unit(n_, a), h);
  }
  const Eigen::MatrixXd ginv = metric(x).inverse();
  std::vector<Eigen::MatrixXd> gamma(n_, Eigen::MatrixXd::Zero(n_, n_));
  for (int c = 0; c < n_; ++c) {
    for (int a = 0; a < n_; ++a) {
      for (int b = 0; b < n_; ++b) {
        double s = 0.0;
        for (int d = 0; d < n_; ++d) {
          s += ginv(c, d) * (dg[a](d, b) + dg[b](d, a) - dg[d](a, b));
        }
        gamma[c](a, b) = 0.5 * s;
      }
    }
  }
  return gamma;
}

std::vector<Eigen::MatrixXd> Manifold::christoffel_frame_fd(const Eigen::VectorXd& x) const {
  const double h = fd_step(1, x.norm());
  const Eigen::MatrixXd f = frame(x);
  const Eigen::MatrixXd g = metric(x);
  const std::vector<Eigen::MatrixXd> gamma_c = christoffel_coord_fd(x);
  std::vector<Eigen::MatrixXd> df(n_);
  for (int a = 0; a < n_; ++a) {
    df[a] = directional_derivative([this](const Eigen::VectorXd& y) { return frame(y); },
                                   x, Eigen::VectorXd::Unit(n_, a), h);
  }
  std::vector<Eigen::MatrixXd> out(n_, Eigen::MatrixXd::Zero(n_, n_));
  for (int j = 0; j < n_; ++j) {
    for (int i = 0; i < n_; ++i) {
      // nabla_{F_j} F_i in chart coordinates.
      Eigen::VectorXd w = Eigen::VectorXd::Zero(n_);
      for (int a = 0; a < n_; ++a) w += f(a, j) * df[a].col(i);
      for (int c = 0; c < n_; ++c) {
        w(c) += f.col(j).dot(gamma_c[c] * f.col(i));
      }
      out[j].col(i) = f.transpose() * (g * w);
    }
    out[j] = antisym(out[j]);
  }
  return out;
}

std::vector<Eigen::MatrixXd> Manifold::christoffel_frame(const Eigen::VectorXd& x) const {
  return christoffel_frame_fd(x);
}

std::vector<Eigen::MatrixXd> Manifold::christoffel_coord(const Eigen::VectorXd& x) const {
  return christoffel_coord_fd(x);
}

CurvatureTensor Manifold::curvature_from_connection(
    const Eigen::VectorXd& x,
    const std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)>& gamma_of,
    int level) const {
  const double h = fd_step(level, x.norm());
  const Eigen::MatrixXd f = frame(x);
  const std::vector<Eigen::MatrixXd> gamma = gamma_of(x);
  auto stacked = [&gamma_of](const Eigen::VectorXd& y) {
    return stack_blocks(gamma_of(y));
  };
  // d_i holds the derivative of every Gamma(F_j) along the frame vector F_i.
  std::vector<Eigen::MatrixXd> d(n_);
  for (int i = 0; i < n_; ++i) {
    d[i] = directional_derivative(stacked, x, f.col(i), h);
  }
  CurvatureTensor r(n_);
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      const Eigen::MatrixXd di_gj = d[i].middleCols(j * n_, n_);
      const Eigen::MatrixXd dj_gi = d[j].middleCols(i * n_, n_);
      const Eigen::VectorXd c_ij = gamma[i].col(j) - gamma[j].col(i);
      Eigen::MatrixXd m = di_gj - dj_gi + gamma[i] * gamma[j] -
                          gamma[j] * gamma[i] - christoffel_apply(gamma, c_ij);
      r.set_pair(i, j, antisym(m));
    }
  }
  return r;
}

CurvatureTensor Manifold::curvature(const Eigen::VectorXd& x) const {
  return curvature_from_connection(
      x, [this](const Eigen::VectorXd& y) { return christoffel_frame(y); }, 2);
}

CurvatureTensor Manifold::curvature_fd(const Eigen::VectorXd& x) const {
  return curvature_from_connection(
      x, [this](const Eigen::VectorXd& y) { return christoffel_frame_fd(y); }, 2);
}

CurvatureCov1 Manifold::curvature_cov1(const Eigen::VectorXd& x) const {
  const int level = curvature_closed_form() ? 2 : 3;
  const double h = fd_step(level, x.norm());
  const Eigen::MatrixXd f = frame(x);
  const std::vector<Eigen::MatrixXd> gamma = christoffel_frame(x);
  const CurvatureTensor r = curvature(x);
  auto stacked = [this](const Eigen::VectorXd& y) { return stack_curvature(curvature(y)); };
  CurvatureCov1 out(n_);
  for (int c = 0; c < n_; ++c) {
    const Eigen::MatrixXd dc = directional_derivative(stacked, x, f.col(c), h);
    const Eigen::MatrixXd& gc = gamma[c];
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        Eigen::MatrixXd m = dc.middleCols((i * n_ + j) * n_, n_);
        m += gc * r(i, j) - r(i, j) * gc;
        for (int k = 0; k < n_; ++k) {
          if (gc(k, i) != 0.0) m -= gc(k, i) * r(k, j);
          if (gc(k, j) != 0.0) m -= gc(k, j) * r(i, k);
        }
        out.at(c).set_pair(i, j, antisym(m));
      }
    }
  }
  return out;
}

CurvatureCov2 Manifold::curvature_cov2(const Eigen::VectorXd& x) const {
  const double h = fd_step(3, x.norm());
  const Eigen::MatrixXd f = frame(x);
  const std::vector<Eigen::MatrixXd> gamma = christoffel_frame(x);
  const CurvatureCov1 c1 = curvature_cov1(x);
  auto stacked = [this](const Eigen::VectorXd& y) { return stack_cov1(curvature_cov1(y)); };
  CurvatureCov2 out(n_);
  for (int c2 = 0; c2 < n_; ++c2) {
    const Eigen::MatrixXd d = directional_derivative(stacked, x, f.col(c2), h);
    const Eigen::MatrixXd& g2 = gamma[c2];
    for (int c1i = 0; c1i < n_; ++c1i) {
      for (int i = 0; i < n_; ++i) {
        for (int j = i + 1; j < n_; ++j) {
          Eigen::MatrixXd m = d.middleCols(((c1i * n_ + i) * n_ + j) * n_, n_);
          m += g2 * c1.dc(c1i)(i, j) - c1.dc(c1i)(i, j) * g2;
          for (int k = 0; k < n_; ++k) {
            if (g2(k, c1i) != 0.0) m -= g2(k, c1i) * c1.dc(k)(i, j);
            if (g2(k, i) != 0.0) m -= g2(k, i) * c1.dc(c1i)(k, j);
            if (g2(k, j) != 0.0) m -= g2(k, j) * c1.dc(c1i)(i, k);
          }
          out.at(c2).at(c1i).set_pair(i, j, antisym(m));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Euclidean space

namespace {

class EuclideanManifold final : public Manifold {
 public:
  EuclideanManifold(int n, double half_width)
      : Manifold(n, ChartDomain::centered_box(n, half_width),
                 "euclidean(" + std::to_string(n) + ")") {
    simply_connected_ = true;
    constant_curvature_ = 0.0;
    tg_all_dims_ = true;
  }

  Eigen::MatrixXd metric(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Identity(dim(), dim());
  }
  std::vector<Eigen::MatrixXd> christoffel_frame(const Eigen::VectorXd&) const override {
    return std::vector<Eigen::MatrixXd>(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
  }
  std::vector<Eigen::MatrixXd> christoffel_coord(const Eigen::VectorXd&) const override {
    return std::vector<Eigen::MatrixXd>(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
  }
  CurvatureTensor curvature(const Eigen::VectorXd&) const override {
    return CurvatureTensor(dim());
  }
  CurvatureCov1 curvature_cov1(const Eigen::VectorXd&) const override {
    return CurvatureCov1(dim());
  }
  CurvatureCov2 curvature_cov2(const Eigen::VectorXd&) const override {
    return CurvatureCov2(dim());
  }

 protected:
  bool curvature_closed_form() const override { return true; }
};

// Constant-curvature space in a conformal chart: the stereographic chart of
// the radius-r sphere (sign +1) or the Poincare ball of curvature -1/r^2
// (sign -1). Conformal factor lambda = 2 r^2 / (r^2 + sign * |x|^2).
class ConstantCurvatureChart final : public Manifold {
 public:
  ConstantCurvatureChart(int n, double radius, double sign, ChartDomain domain,
                         std::string name)
      : Manifold(n, std::move(domain), std::move(name)),
        r2_(radius * radius),
        sign_(sign) {
    if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
    simply_connected_ = sign > 0 ? n >= 2 : true;
    constant_curvature_ = sign / r2_;
    tg_all_dims_ = true;
  }

  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override {
    const double l = lambda(x);
    return (l * l) * Eigen::MatrixXd::Identity(dim(), dim());
  }

  std::vector<Eigen::MatrixXd> christoffel_frame(const Eigen::VectorXd& x) const override {
    const double l = lambda(x);
    const Eigen::VectorXd dphi = grad_phi(x);
    std::vector<Eigen::MatrixXd> out(dim());
    for (int j = 0; j < dim(); ++j) {
      out[j] = (Eigen::VectorXd::Unit(dim(), j) * dphi.transpose() -
                dphi * Eigen::VectorXd::Unit(dim(), j).transpose()) /
               l;
    }
    return out;
  }

  std::vector<Eigen::MatrixXd> christoffel_coord(const Eigen::VectorXd& x) const override {
    const Eigen::VectorXd dphi = grad_phi(x);
    std::vector<Eigen::MatrixXd> out(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
    for (int c = 0; c < dim(); ++c) {
      for (int a = 0; a < dim(); ++a) {
        for (int b = 0; b < dim(); ++b) {
          double v = 0.0;
          if (c == b) v += dphi(a);
          if (c == a) v += dphi(b);
          if (a == b) v -= dphi(c);
          out[c](a, b) = v;
        }
      }
    }
    return out;
  }

  CurvatureTensor curvature(const Eigen::VectorXd&) const override {
    const double k = *constant_curvature();
    CurvatureTensor r(dim());
    for (int i = 0; i < dim(); ++i) {
      for (int j = i + 1; j < dim(); ++j) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
        m(i, j) = k;
        m(j, i) = -k;
        r.set_pair(i, j, m);
      }
    }
    return r;
  }

  CurvatureCov1 curvature_cov1(const Eigen::VectorXd&) const override {
    return CurvatureCov1(dim());
  }
  CurvatureCov2 curvature_cov2(const Eigen::VectorXd&) const override {
    return CurvatureCov2(dim());
  }

 protected:
  bool curvature_closed_form() const override { return true; }

 private:
  double lambda(const Eigen::VectorXd& x) const {
    const double denom = r2_ + sign_ * x.squaredNorm();
    return 2.0 * r2_ / denom;
  }
  Eigen::VectorXd grad_phi(const Eigen::VectorXd& x) const {
    const double denom = r2_ + sign_ * x.squaredNorm();
    return (-2.0 * sign_ / denom) * x;
  }

  double r2_;
  double sign_;
};

class WarpedManifold final : public Manifold {
 public:
  WarpedManifold(int fiber_dim, WarpKind kind, double a, double b, double r_lo,
                 double r_hi, double fiber_half_width)
      : Manifold(fiber_dim + 1,
                 warped_domain(fiber_dim, r_lo, r_hi, fiber_half_width),
                 warped_name(fiber_dim, kind, a, b)),
        kind_(kind),
        a_(a),
        b_(b) {
    if (fiber_dim < 1) throw std::invalid_argument("warped: fiber_dim must be >= 1");
    if (!(r_lo < r_hi)) throw std::invalid_argument("warped: need r_lo < r_hi");
    for (double r : {r_lo, r_hi}) {
      if (warp(r) <= 0.0) {
        throw std::invalid_argument("warped: warping function must stay positive");
      }
    }
    simply_connected_ = true;
    if (kind == WarpKind::Constant) {
      constant_curvature_ = 0.0;
    } else if (kind == WarpKind::Exponential) {
      constant_curvature_ = -b * b;
    }
    // Only constant-curvature warps are declared to carry complete flat
    // slices of every dimension; generic warps make no such claim.
    tg_all_dims_ = constant_curvature_.has_value();
  }

  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override {
    const double f2 = std::pow(warp(x(0)), 2);
    Eigen::VectorXd d = Eigen::VectorXd::Constant(dim(), f2);
    d(0) = 1.0;
    return d.asDiagonal();
  }

  std::vector<Eigen::MatrixXd> christoffel_frame(const Eigen::VectorXd& x) const override {
    const double q = warp_d1(x(0)) / warp(x(0));
    std::vector<Eigen::MatrixXd> out(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
    for (int i = 1; i < dim(); ++i) {
      out[i](i, 0) = q;
      out[i](0, i) = -q;
    }
    return out;
  }

  std::vector<Eigen::MatrixXd> christoffel_coord(const Eigen::VectorXd& x) const override {
    const double f = warp(x(0));
    const double fp = warp_d1(x(0));
    std::vector<Eigen::MatrixXd> out(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
    for (int i = 1; i < dim(); ++i) {
      out[0](i, i) = -f * fp;
      out[i](0, i) = fp / f;
      out[i](i, 0) = fp / f;
    }
    return out;
  }

  CurvatureTensor curvature(const Eigen::VectorXd& x) const override {
    const double f = warp(x(0));
    const double kr = warp_d2(x(0)) / f;        // R(F_i,F_0)F_0 = -kr F_i
    const double kt = std::pow(warp_d1(x(0)) / f, 2);
    CurvatureTensor r(dim());
    for (int i = 1; i < dim(); ++i) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
      m(0, i) = kr;
      m(i, 0) = -kr;
      r.set_pair(i, 0, m);
      for (int j = i + 1; j < dim(); ++j) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim(), dim());
        p(i, j) = -kt;
        p(j, i) = kt;
        r.set_pair(i, j, p);
      }
    }
    return r;
  }

 protected:
  bool curvature_closed_form() const override { return true; }

 private:
  static ChartDomain warped_domain(int fiber_dim, double r_lo, double r_hi,
                                   double w) {
    Eigen::VectorXd lo(fiber_dim + 1), hi(fiber_dim + 1);
    lo(0) = r_lo;
    hi(0) = r_hi;
    lo.tail(fiber_dim).setConstant(-w);
    hi.tail(fiber_dim).setConstant(w);
    return ChartDomain::box(lo, hi);
  }

  static std::string warped_name(int fiber_dim, WarpKind kind, double a, double b) {
    std::ostringstream os;
    os << "warped(";
    switch (kind) {
      case WarpKind::Constant: os << "f=" << a; break;
      case WarpKind::Linear: os << "f=" << a << "+" << b << "r"; break;
      case WarpKind::Exponential: os << "f=" << a << "*exp(" << b << "r)"; break;
    }
    os << ", fiber=" << fiber_dim << ")";
    return os.str();
  }

  double warp(double r) const {
    switch (kind_) {
      case WarpKind::Constant: return a_;
      case WarpKind::Linear: return a_ + b_ * r;
      case WarpKind::Exponential: return a_ * std::exp(b_ * r);
    }
    return a_;
  }
  double warp_d1(double r) const {
    switch (kind_) {
      case WarpKind::Constant: return 0.0;
      case WarpKind::Linear: return b_;
      case WarpKind::Exponential: return a_ * b_ * std::exp(b_ * r);
    }
    return 0.0;
  }
  double warp_d2(double r) const {
    switch (kind_) {
      case WarpKind::Constant: return 0.0;
      case WarpKind::Linear: return 0.0;
      case WarpKind::Exponential: return a_ * b_ * b_ * std::exp(b_ * r);
    }
    return 0.0;
  }

  WarpKind kind_;
  double a_, b_;
};

class ProductManifold final : public Manifold {
 public:
  explicit ProductManifold(std::vector<ManifoldPtr> factors)
      : Manifold(total_dim(factors), product_domain(factors), product_name(factors)),
        factors_(std::move(factors)) {
    int off = 0;
    for (const auto& f : factors_) {
      offsets_.push_back(off);
      off += f->dim();
    }
    simply_connected_ = true;
    bool all_flat = true;
    bool tg = true;
    bool closed = true;
    for (const auto& f : factors_) {
      simply_connected_ = simply_connected_ && f->simply_connected();
      all_flat = all_flat && f->constant_curvature() && *f->constant_curvature() == 0.0;
      tg = tg && (f->totally_geodesic_all_dims() || f->dim() == 1);
      closed = closed && f->constant_curvature().has_value();
    }
    if (all_flat) constant_curvature_ = 0.0;
    tg_all_dims_ = tg;
  }

  std::vector<ManifoldPtr> factors() const override { return factors_; }

  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(dim(), dim());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const int o = offsets_[k], d = factors_[k]->dim();
      g.block(o, o, d, d) = factors_[k]->metric(x.segment(o, d));
    }
    return g;
  }

  std::vector<Eigen::MatrixXd> christoffel_frame(const Eigen::VectorXd& x) const override {
    return embedded_christoffels(x, /*frame_version=*/true);
  }
  std::vector<Eigen::MatrixXd> christoffel_coord(const Eigen::VectorXd& x) const override {
    return embedded_christoffels(x, /*frame_version=*/false);
  }

  CurvatureTensor curvature(const Eigen::VectorXd& x) const override {
    CurvatureTensor r(dim());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const int o = offsets_[k], d = factors_[k]->dim();
      const CurvatureTensor rf = factors_[k]->curvature(x.segment(o, d));
      for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
          Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
          m.block(o, o, d, d) = rf(i, j);
          r.set_pair(o + i, o + j, m);
        }
      }
    }
    return r;
  }

  CurvatureCov1 curvature_cov1(const Eigen::VectorXd& x) const override {
    CurvatureCov1 out(dim());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const int o = offsets_[k], d = factors_[k]->dim();
      const CurvatureCov1 cf = factors_[k]->curvature_cov1(x.segment(o, d));
      for (int c = 0; c < d; ++c) {
        for (int i = 0; i < d; ++i) {
          for (int j = i + 1; j < d; ++j) {
            Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
            m.block(o, o, d, d) = cf.dc(c)(i, j);
            out.at(o + c).set_pair(o + i, o + j, m);
          }
        }
      }
    }
    return out;
  }

  CurvatureCov2 curvature_cov2(const Eigen::VectorXd& x) const override {
    CurvatureCov2 out(dim());
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const int o = offsets_[k], d = factors_[k]->dim();
      const CurvatureCov2 cf = factors_[k]->curvature_cov2(x.segment(o, d));
      for (int c2 = 0; c2 < d; ++c2) {
        for (int c1 = 0; c1 < d; ++c1) {
          for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
              Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
              m.block(o, o, d, d) = cf.dc2(c2).dc(c1)(i, j);
              out.at(o + c2).at(o + c1).set_pair(o + i, o + j, m);
            }
          }
        }
      }
    }
    return out;
  }

 protected:
  bool curvature_closed_form() const override {
    return true;  // factor curvature calls dispatch to the factors themselves
  }

 private:
  static int total_dim(const std::vector<ManifoldPtr>& fs) {
    if (fs.empty()) throw std::invalid_argument("product: needs at least one factor");
    int d = 0;
    for (const auto& f : fs) d += f->dim();
    return d;
  }

  static ChartDomain product_domain(const std::vector<ManifoldPtr>& fs) {
    // Conservative box hull: per-factor balls are boxed by their radius.
    int d = total_dim(fs);
    Eigen::VectorXd lo(d), hi(d);
    int o = 0;
    for (const auto& f : fs) {
      const int k = f->dim();
      if (f->domain().type() == ChartDomain::Type::Box) {
        lo.segment(o, k) = f->domain().lo();
        hi.segment(o, k) = f->domain().hi();
      } else {
        lo.segment(o, k).setConstant(-f->domain().radius() / std::sqrt(double(k)));
        hi.segment(o, k).setConstant(f->domain().radius() / std::sqrt(double(k)));
      }
      o += k;
    }
    return ChartDomain::box(lo, hi);
  }

  static std::string product_name(const std::vector<ManifoldPtr>& fs) {
    std::string s = "product(";
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (i) s += " x ";
      s += fs[i]->describe();
    }
    return s + ")";
  }

  std::vector<Eigen::MatrixXd> embedded_christoffels(const Eigen::VectorXd& x,
                                                     bool frame_version) const {
    std::vector<Eigen::MatrixXd> out(dim(), Eigen::MatrixXd::Zero(dim(), dim()));
    for (std::size_t k = 0; k < factors_.size(); ++k) {
      const int o = offsets_[k], d = factors_[k]->dim();
      const auto part = frame_version
                            ? factors_[k]->christoffel_frame(x.segment(o, d))
                            : factors_[k]->christoffel_coord(x.segment(o, d));
      for (int c = 0; c < d; ++c) out[o + c].block(o, o, d, d) = part[c];
    }
    return out;
  }

  std::vector<ManifoldPtr> factors_;
  std::vector<int> offsets_;
};

class CustomMetricManifold final : public Manifold {
 public:
  CustomMetricManifold(int n, std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> fn,
                       ChartDomain domain, std::string name, bool simply_connected)
      : Manifold(n, std::move(domain), std::move(name)), fn_(std::move(fn)) {
    simply_connected_ = simply_connected;
    tg_all_dims_ = false;
  }

  Eigen::MatrixXd metric(const Eigen::VectorXd& x) const override { return fn_(x); }

 private:
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> fn_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Factories

ManifoldPtr make_euclidean(int n, double half_width) {
  return std::make_shared<EuclideanManifold>(n, half_width);
}

ManifoldPtr make_sphere(int n, double radius, double chart_radius_factor) {
  return std::make_shared<ConstantCurvatureChart>(
      n, radius, +1.0, ChartDomain::ball(chart_radius_factor * radius),
      "sphere(" + std::to_string(n) + ", r=" + std::to_string(radius) + ")");
}

ManifoldPtr make_hyperbolic(int n, double radius, double ball_fraction) {
  if (!(ball_fraction > 0.0 && ball_fraction < 1.0)) {
    throw std::invalid_argument("hyperbolic: ball_fraction must lie in (0,1)");
  }
  return std::make_shared<ConstantCurvatureChart>(
      n, radius, -1.0, ChartDomain::ball(ball_fraction * radius),
      "hyperbolic(" + std::to_string(n) + ", r=" + std::to_string(radius) + ")");
}

ManifoldPtr make_warped(int fiber_dim, WarpKind kind, double a, double b,
                        double r_lo, double r_hi, double fiber_half_width) {
  return std::make_shared<WarpedManifold>(fiber_dim, kind, a, b, r_lo, r_hi,
                                          fiber_half_width);
}

ManifoldPtr make_product(std::vector<ManifoldPtr> factors) {
  return std::make_shared<ProductManifold>(std::move(factors));
}

ManifoldPtr make_custom_metric(int n,
                               std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> metric,
                               ChartDomain domain, std::string name,
                               bool simply_connected) {
  return std::make_shared<CustomMetricManifold>(n, std::move(metric), std::move(domain),
                                                std::move(name), simply_connected);
}

ManifoldPtr make_perturbed_euclidean(int n, double amplitude, double half_width) {
  auto fn = [n, amplitude](const Eigen::VectorXd& x) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        g(a, b) += amplitude * (std::sin(x(a) + 2.0 * x(b) + 0.7 * (a - b)) +
                                std::sin(x(b) + 2.0 * x(a) + 0.7 * (b - a)));
      }
    }
    return g;
  };
  return make_custom_metric(n, fn, ChartDomain::centered_box(n, half_width),
                            "perturbed_euclidean(" + std::to_string(n) + ")",
                            /*simply_connected=*/true);
}

}  // namespace rolling
