#include "rolling/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rolling/numerics.hpp"

namespace rolling {

// ---------------------------------------------------------------------------
// ControlSignal

ControlSignal ControlSignal::constant(const Eigen::VectorXd& u, double duration, Frame f) {
  if (duration <= 0.0) throw std::invalid_argument("control: duration must be > 0");
  return piecewise({0.0, duration}, {u}, f);
}

ControlSignal ControlSignal::piecewise(std::vector<double> breakpoints,
                                       std::vector<Eigen::VectorXd> values, Frame f) {
  if (breakpoints.size() != values.size() + 1 || values.empty())
    throw std::invalid_argument("control: need k+1 breakpoints for k values");
  if (std::abs(breakpoints.front()) > 1e-12)
    throw std::invalid_argument("control: breakpoints must start at 0");
  for (std::size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument("control: breakpoints must be ascending");
  for (const auto& v : values)
    if (v.size() != values[0].size())
      throw std::invalid_argument("control: value dimensions disagree");
  ControlSignal c;
  c.kind_ = Kind::Piecewise;
  c.frame_ = f;
  c.knots_ = std::move(breakpoints);
  c.values_ = std::move(values);
  return c;
}

ControlSignal ControlSignal::sampled(std::vector<double> times,
                                     std::vector<Eigen::VectorXd> values, Frame f) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("control: need matching times/values with >= 2 samples");
  if (std::abs(times.front()) > 1e-12)
    throw std::invalid_argument("control: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("control: times must be ascending");
  for (const auto& v : values)
    if (v.size() != values[0].size())
      throw std::invalid_argument("control: value dimensions disagree");
  ControlSignal c;
  c.kind_ = Kind::Sampled;
  c.frame_ = f;
  c.knots_ = std::move(times);
  c.values_ = std::move(values);
  return c;
}

Eigen::VectorXd ControlSignal::value(double t) const {
  t = std::clamp(t, knots_.front(), knots_.back());
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  int i = static_cast<int>(it - knots_.begin()) - 1;
  if (kind_ == Kind::Piecewise) {
    i = std::clamp(i, 0, static_cast<int>(values_.size()) - 1);
    return values_[i];
  }
  i = std::clamp(i, 0, static_cast<int>(values_.size()) - 2);
  const double s = (t - knots_[i]) / (knots_[i + 1] - knots_[i]);
  return (1.0 - s) * values_[i] + s * values_[i + 1];
}

ControlSignal ControlSignal::scaled(double factor) const {
  ControlSignal c = *this;
  for (auto& v : c.values_) v *= factor;
  return c;
}

ControlSignal ControlSignal::reversed() const {
  ControlSignal c = *this;
  const double T = duration();
  std::vector<double> k(knots_.size());
  for (std::size_t i = 0; i < knots_.size(); ++i) k[i] = T - knots_[knots_.size() - 1 - i];
  k.front() = 0.0;
  c.knots_ = std::move(k);
  c.values_.assign(values_.rbegin(), values_.rend());
  for (auto& v : c.values_) v = -v;
  return c;
}

// ---------------------------------------------------------------------------
// RollingTrajectory

RollingState RollingTrajectory::state_at(std::size_t k) const {
  if (k >= t.size()) throw std::out_of_range("trajectory: sample index out of range");
  return make_state(m, m_hat, x[k], x_hat[k], R[k]);
}

PathSpec RollingTrajectory::base_path() const {
  return PathSpec(t, x, x_dot);
}

PathSpec RollingTrajectory::target_path() const {
  return PathSpec(t, x_hat, x_hat_dot);
}

namespace {

void record_no_slip(RollingTrajectory& traj) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd uhat = traj.m_hat->to_frame(traj.x_hat[k], traj.x_hat_dot[k]);
    worst = std::max(worst, (uhat - traj.R[k] * traj.u[k]).norm());
  }
  traj.max_no_slip_residual = worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// roll

RollingTrajectory roll(const RollingState& q0, const ControlSignal& ctrl, double step) {
  const int n = q0.n(), nh = q0.n_hat();
  if (ctrl.dim() != n) throw std::invalid_argument("roll: control dimension mismatch");
  if (step <= 0.0) throw std::invalid_argument("roll: step must be > 0");
  const Manifold& m = *q0.m;
  const Manifold& mh = *q0.m_hat;
  const bool parallel = ctrl.frame() == ControlSignal::Frame::Parallel;

  const double T = ctrl.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step)));
  const double h = T / steps;

  const int rz = nh * n;
  const int ez = parallel ? n * n : 0;
  Eigen::VectorXd y(n + nh + rz + ez);
  y.head(n) = q0.x;
  y.segment(n, nh) = q0.x_hat;
  Eigen::Map<Eigen::MatrixXd>(y.data() + n + nh, nh, n) = q0.A;
  if (parallel) Eigen::Map<Eigen::MatrixXd>(y.data() + n + nh + rz, n, n).setIdentity();

  auto moving_control = [&](double t, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    const Eigen::VectorXd v = ctrl.value(t);
    if (!parallel) return v;
    return Eigen::Map<const Eigen::MatrixXd>(yy.data() + n + nh + rz, n, n) * v;
  };

  auto rhs = [&](double t, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    const Eigen::VectorXd pos = yy.head(n);
    const Eigen::VectorXd pos_hat = yy.segment(n, nh);
    const Eigen::Map<const Eigen::MatrixXd> r(yy.data() + n + nh, nh, n);
    const Eigen::VectorXd uu = moving_control(t, yy);
    const Eigen::VectorXd uhat = r * uu;
    const Eigen::MatrixXd gam = christoffel_apply(m.christoffel_frame(pos), uu);
    const Eigen::MatrixXd gam_hat = christoffel_apply(mh.christoffel_frame(pos_hat), uhat);
    Eigen::VectorXd dy(yy.size());
    dy.head(n) = m.frame(pos) * uu;
    dy.segment(n, nh) = mh.frame(pos_hat) * uhat;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + n + nh, nh, n) = r * gam - gam_hat * r;
    if (parallel) {
      const Eigen::Map<const Eigen::MatrixXd> e(yy.data() + n + nh + rz, n, n);
      Eigen::Map<Eigen::MatrixXd>(dy.data() + n + nh + rz, n, n) = -gam * e;
    }
    return dy;
  };

  RollingTrajectory traj;
  traj.m = q0.m;
  traj.m_hat = q0.m_hat;
  auto record = [&](double t, const Eigen::VectorXd& yy) {
    const Eigen::VectorXd pos = yy.head(n);
    const Eigen::VectorXd pos_hat = yy.segment(n, nh);
    const Eigen::MatrixXd r = Eigen::Map<const Eigen::MatrixXd>(yy.data() + n + nh, nh, n);
    const Eigen::VectorXd uu = moving_control(t, yy);
    traj.t.push_back(t);
    traj.x.push_back(pos);
    traj.x_hat.push_back(pos_hat);
    traj.R.push_back(r);
    traj.u.push_back(uu);
    traj.x_dot.push_back(m.frame(pos) * uu);
    traj.x_hat_dot.push_back(mh.frame(pos_hat) * (r * uu));
  };
  record(0.0, y);

  for (int k = 0; k < steps; ++k) {
    const double tk = k * h;
    Eigen::VectorXd ynext = rk4_step(rhs, tk, y, h);

    Eigen::Map<Eigen::MatrixXd> r(ynext.data() + n + nh, nh, n);
    traj.max_isometry_drift = std::max(traj.max_isometry_drift, isometry_defect(r));
    r = polar_project(r);
    if (parallel) {
      Eigen::Map<Eigen::MatrixXd> e(ynext.data() + n + nh + rz, n, n);
      traj.max_isometry_drift = std::max(traj.max_isometry_drift, isometry_defect(e));
      e = polar_project(e);
    }

    if (!m.domain().contains(ynext.head(n)) || !mh.domain().contains(ynext.segment(n, nh))) {
      traj.exited = true;
      traj.exit_time = tk;
      break;
    }
    y = ynext;
    const double tn = (k + 1 == steps) ? T : tk + h;
    record(tn, y);
  }

  record_no_slip(traj);
  return traj;
}

// ---------------------------------------------------------------------------
// roll_ns

RollingTrajectory roll_ns(const RollingState& q0, const PathSpec& path,
                          const PathSpec& path_hat, double step) {
  const int n = q0.n(), nh = q0.n_hat();
  if (path.point_dim() != n || path_hat.point_dim() != nh)
    throw std::invalid_argument("roll_ns: path dimensions must match the state");
  if ((path.front() - q0.x).norm() > 1e-9 || (path_hat.front() - q0.x_hat).norm() > 1e-9)
    throw std::invalid_argument("roll_ns: paths must start at the state's contact points");
  if (std::abs(path.duration() - path_hat.duration()) > 1e-9)
    throw std::invalid_argument("roll_ns: paths must share their time interval");
  if (step <= 0.0) throw std::invalid_argument("roll_ns: step must be > 0");
  const Manifold& m = *q0.m;
  const Manifold& mh = *q0.m_hat;

  const double T = path.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step)));
  const double h = T / steps;

  Eigen::VectorXd y(n * n + nh * nh);
  Eigen::Map<Eigen::MatrixXd>(y.data(), n, n).setIdentity();
  Eigen::Map<Eigen::MatrixXd>(y.data() + n * n, nh, nh).setIdentity();

  auto rhs = [&](double t, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    const Eigen::VectorXd pos = path.position(t);
    const Eigen::VectorXd pos_hat = path_hat.position(t);
    const Eigen::VectorXd uu = m.to_frame(pos, path.velocity(t));
    const Eigen::VectorXd uhat = mh.to_frame(pos_hat, path_hat.velocity(t));
    const Eigen::Map<const Eigen::MatrixXd> e(yy.data(), n, n);
    const Eigen::Map<const Eigen::MatrixXd> eh(yy.data() + n * n, nh, nh);
    Eigen::VectorXd dy(yy.size());
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n) =
        -christoffel_apply(m.christoffel_frame(pos), uu) * e;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + n * n, nh, nh) =
        -christoffel_apply(mh.christoffel_frame(pos_hat), uhat) * eh;
    return dy;
  };

  RollingTrajectory traj;
  traj.m = q0.m;
  traj.m_hat = q0.m_hat;
  auto record = [&](double t, const Eigen::VectorXd& yy) {
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(yy.data(), n, n);
    const Eigen::MatrixXd eh = Eigen::Map<const Eigen::MatrixXd>(yy.data() + n * n, nh, nh);
    const Eigen::VectorXd pos = path.position(t);
    const Eigen::VectorXd pos_hat = path_hat.position(t);
    const Eigen::MatrixXd r = eh * q0.A * e.transpose();
    traj.t.push_back(t);
    traj.x.push_back(pos);
    traj.x_hat.push_back(pos_hat);
    traj.R.push_back(r);
    traj.u.push_back(m.to_frame(pos, path.velocity(t)));
    traj.x_dot.push_back(path.velocity(t));
    traj.x_hat_dot.push_back(path_hat.velocity(t));
  };
  record(0.0, y);

  for (int k = 0; k < steps; ++k) {
    const double tk = k * h;
    Eigen::VectorXd ynext = rk4_step(rhs, tk, y, h);
    Eigen::Map<Eigen::MatrixXd> e(ynext.data(), n, n);
    Eigen::Map<Eigen::MatrixXd> eh(ynext.data() + n * n, nh, nh);
    traj.max_isometry_drift =
        std::max({traj.max_isometry_drift, isometry_defect(e), isometry_defect(eh)});
    e = polar_project(e);
    eh = polar_project(eh);

    const double tn = (k + 1 == steps) ? T : tk + h;
    if (!m.domain().contains(path.position(tn)) ||
        !mh.domain().contains(path_hat.position(tn))) {
      traj.exited = true;
      traj.exit_time = tk;
      break;
    }
    y = ynext;
    record(tn, y);
  }

  record_no_slip(traj);
  return traj;
}

RollingTrajectory roll_geodesic(const RollingState& q0, const Eigen::VectorXd& u_frame,
                                double duration, double step) {
  if (u_frame.size() != q0.n()) throw std::invalid_argument("roll_geodesic: control dimension");
  const PathSpec gamma = geodesic_flow(*q0.m, q0.x, u_frame, duration, step);
  const PathSpec gamma_hat = geodesic_flow(*q0.m_hat, q0.x_hat, q0.A * u_frame, duration, step);
  return roll_ns(q0, gamma, gamma_hat, step);
}

// ---------------------------------------------------------------------------
// diagnostics

double no_spin_residual(const RollingTrajectory& traj, double step, int checkpoints) {
  if (traj.size() < 2) return 0.0;
  const int n = static_cast<int>(traj.x[0].size());
  const int nh = static_cast<int>(traj.x_hat[0].size());
  const Manifold& m = *traj.m;
  const Manifold& mh = *traj.m_hat;
  const PathSpec path = traj.base_path();
  const PathSpec path_hat = traj.target_path();
  const Eigen::MatrixXd r0 = traj.R.front();

  Eigen::MatrixXd e = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd eh = Eigen::MatrixXd::Identity(nh, nh);
  Eigen::VectorXd y(n * n + nh * nh);
  Eigen::Map<Eigen::MatrixXd>(y.data(), n, n) = e;
  Eigen::Map<Eigen::MatrixXd>(y.data() + n * n, nh, nh) = eh;

  auto rhs = [&](double t, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    const Eigen::VectorXd pos = path.position(t);
    const Eigen::VectorXd pos_hat = path_hat.position(t);
    const Eigen::VectorXd uu = m.to_frame(pos, path.velocity(t));
    const Eigen::VectorXd uhat = mh.to_frame(pos_hat, path_hat.velocity(t));
    const Eigen::Map<const Eigen::MatrixXd> ee(yy.data(), n, n);
    const Eigen::Map<const Eigen::MatrixXd> eeh(yy.data() + n * n, nh, nh);
    Eigen::VectorXd dy(yy.size());
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n) =
        -christoffel_apply(m.christoffel_frame(pos), uu) * ee;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + n * n, nh, nh) =
        -christoffel_apply(mh.christoffel_frame(pos_hat), uhat) * eeh;
    return dy;
  };

  const std::size_t last = traj.size() - 1;
  checkpoints = std::max(1, std::min<int>(checkpoints, static_cast<int>(last)));
  double worst = 0.0;
  std::size_t done = 0;
  for (int c = 1; c <= checkpoints; ++c) {
    const std::size_t target = last * c / checkpoints;
    // Integrate sample to sample so checkpoint times align exactly.
    for (std::size_t k = done; k < target; ++k) {
      const double t0 = traj.t[k], t1 = traj.t[k + 1];
      const int sub = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step)));
      const double hh = (t1 - t0) / sub;
      for (int s = 0; s < sub; ++s) y = rk4_step(rhs, t0 + s * hh, y, hh);
      Eigen::Map<Eigen::MatrixXd> ye(y.data(), n, n);
      Eigen::Map<Eigen::MatrixXd> yeh(y.data() + n * n, nh, nh);
      ye = polar_project(ye);
      yeh = polar_project(yeh);
    }
    done = target;
    const Eigen::MatrixXd ee = Eigen::Map<const Eigen::MatrixXd>(y.data(), n, n);
    const Eigen::MatrixXd eeh = Eigen::Map<const Eigen::MatrixXd>(y.data() + n * n, nh, nh);
    worst = std::max(worst, (traj.R[target] - eeh * r0 * ee.transpose()).norm());
  }
  return worst;
}

double no_slip_residual(const RollingTrajectory& traj) {
  double worst = 0.0;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Eigen::VectorXd uhat = traj.m_hat->to_frame(traj.x_hat[k], traj.x_hat_dot[k]);
    worst = std::max(worst, (uhat - traj.R[k] * traj.u[k]).norm());
  }
  return worst;
}

RollingTrajectory dual_trajectory(const RollingTrajectory& traj) {
  RollingTrajectory d;
  d.m = traj.m_hat;
  d.m_hat = traj.m;
  d.t = traj.t;
  d.x = traj.x_hat;
  d.x_hat = traj.x;
  d.x_dot = traj.x_hat_dot;
  d.x_hat_dot = traj.x_dot;
  d.R.reserve(traj.R.size());
  d.u.reserve(traj.u.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    d.R.push_back(traj.R[k].transpose());
    d.u.push_back(traj.R[k] * traj.u[k]);
  }
  d.max_isometry_drift = traj.max_isometry_drift;
  d.exited = traj.exited;
  d.exit_time = traj.exit_time;
  record_no_slip(d);
  return d;
}

// ---------------------------------------------------------------------------
// chart isometries

ChartIsometry make_rotation_isometry(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) throw std::invalid_argument("rotation: matrix must be square");
  if ((w.transpose() * w - Eigen::MatrixXd::Identity(w.cols(), w.cols())).norm() > 1e-10)
    throw std::invalid_argument("rotation: matrix must be orthogonal");
  return ChartIsometry{w, Eigen::VectorXd::Zero(w.rows())};
}

ChartIsometry make_translation_isometry(const Eigen::VectorXd& c) {
  return ChartIsometry{Eigen::MatrixXd::Identity(c.size(), c.size()), c};
}

RollingState act_source(const RollingState& q, const ChartIsometry& phi) {
  if (phi.linear.rows() != q.n()) throw std::invalid_argument("act_source: dimension mismatch");
  return make_state(q.m, q.m_hat, phi.apply_inverse(q.x), q.x_hat, q.A * phi.linear);
}

RollingState act_target(const ChartIsometry& phi_hat, const RollingState& q) {
  if (phi_hat.linear.rows() != q.n_hat())
    throw std::invalid_argument("act_target: dimension mismatch");
  return make_state(q.m, q.m_hat, q.x, phi_hat.apply(q.x_hat), phi_hat.linear * q.A);
}

}  // namespace rolling
