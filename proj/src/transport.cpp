#include "rolling/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace rolling {

// ---------------------------------------------------------------------------
// PathSpec

PathSpec::PathSpec(std::vector<double> times, std::vector<Eigen::VectorXd> points,
                   std::vector<Eigen::VectorXd> velocities)
    : times_(std::move(times)),
      points_(std::move(points)),
      velocities_(std::move(velocities)) {
  if (times_.size() != points_.size() || times_.size() < 2) {
    throw std::invalid_argument("path: need matching times/points with >= 2 samples");
  }
  if (!velocities_.empty() && velocities_.size() != times_.size()) {
    throw std::invalid_argument("path: velocity count must match sample count");
  }
  if (std::abs(times_.front()) > 1e-12) {
    throw std::invalid_argument("path: time grid must start at 0");
  }
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) {
      throw std::invalid_argument("path: time grid must be strictly increasing");
    }
  }
}

PathSpec PathSpec::from_function(const std::function<Eigen::VectorXd(double)>& pos,
                                 double duration, int samples) {
  if (samples < 2) throw std::invalid_argument("path: need >= 2 samples");
  std::vector<double> ts(samples);
  std::vector<Eigen::VectorXd> ps(samples);
  for (int i = 0; i < samples; ++i) {
    ts[i] = duration * i / (samples - 1);
    ps[i] = pos(ts[i]);
  }
  return PathSpec(std::move(ts), std::move(ps));
}

PathSpec PathSpec::from_function(const std::function<Eigen::VectorXd(double)>& pos,
                                 const std::function<Eigen::VectorXd(double)>& vel,
                                 double duration, int samples) {
  if (samples < 2) throw std::invalid_argument("path: need >= 2 samples");
  std::vector<double> ts(samples);
  std::vector<Eigen::VectorXd> ps(samples), vs(samples);
  for (int i = 0; i < samples; ++i) {
    ts[i] = duration * i / (samples - 1);
    ps[i] = pos(ts[i]);
    vs[i] = vel(ts[i]);
  }
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

int PathSpec::segment_of(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  int idx = static_cast<int>(it - times_.begin()) - 1;
  idx = std::clamp(idx, 0, static_cast<int>(times_.size()) - 2);
  return idx;
}

Eigen::VectorXd PathSpec::position(double t) const {
  t = std::clamp(t, times_.front(), times_.back());
  const int i = segment_of(t);
  const double dt = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / dt;
  if (!has_velocities()) {
    return (1.0 - s) * points_[i] + s * points_[i + 1];
  }
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * points_[i] + (h10 * dt) * velocities_[i] + h01 * points_[i + 1] +
         (h11 * dt) * velocities_[i + 1];
}

Eigen::VectorXd PathSpec::velocity(double t) const {
  t = std::clamp(t, times_.front(), times_.back());
  const int i = segment_of(t);
  const double dt = times_[i + 1] - times_[i];
  const double s = (t - times_[i]) / dt;
  if (!has_velocities()) {
    return (points_[i + 1] - points_[i]) / dt;
  }
  const double d00 = 6 * s * (s - 1) / dt;
  const double d10 = (1 - s) * (1 - 3 * s);
  const double d01 = -6 * s * (s - 1) / dt;
  const double d11 = s * (3 * s - 2);
  return d00 * points_[i] + d10 * velocities_[i] + d01 * points_[i + 1] +
         d11 * velocities_[i + 1];
}

bool PathSpec::is_closed(double tol) const {
  return (points_.front() - points_.back()).norm() <= tol;
}

PathSpec PathSpec::reversed() const {
  const double T = duration();
  std::vector<double> ts(times_.size());
  std::vector<Eigen::VectorXd> ps(points_.size());
  std::vector<Eigen::VectorXd> vs;
  const std::size_t m = times_.size();
  for (std::size_t i = 0; i < m; ++i) {
    ts[i] = T - times_[m - 1 - i];
    ps[i] = points_[m - 1 - i];
  }
  if (has_velocities()) {
    vs.resize(m);
    for (std::size_t i = 0; i < m; ++i) vs[i] = -velocities_[m - 1 - i];
  }
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

// ---------------------------------------------------------------------------
// Geodesics

PathSpec geodesic_flow(const Manifold& m, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& v_frame, double duration,
                       double step) {
  if (duration <= 0.0) throw std::invalid_argument("geodesic_flow: duration must be > 0");
  if (step <= 0.0) throw std::invalid_argument("geodesic_flow: step must be > 0");
  m.require_inside(x, "geodesic_flow start");
  const int n = m.dim();

  auto rhs = [&m, n](double, const Eigen::VectorXd& y) {
    const Eigen::VectorXd pos = y.head(n);
    const Eigen::VectorXd vel = y.tail(n);
    const auto gamma = m.christoffel_coord(pos);
    Eigen::VectorXd acc(n);
    for (int c = 0; c < n; ++c) acc(c) = -vel.dot(gamma[c] * vel);
    Eigen::VectorXd dy(2 * n);
    dy << vel, acc;
    return dy;
  };

  const int steps = std::max(1, static_cast<int>(std::ceil(duration / step)));
  const double h = duration / steps;

  Eigen::VectorXd y(2 * n);
  y << x, m.frame(x) * v_frame;

  std::vector<double> ts;
  std::vector<Eigen::VectorXd> ps, vs;
  ts.reserve(steps + 1);
  ps.reserve(steps + 1);
  vs.reserve(steps + 1);
  ts.push_back(0.0);
  ps.push_back(y.head(n));
  vs.push_back(y.tail(n));

  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    y = rk4_step(rhs, t, y, h);
    const Eigen::VectorXd pos = y.head(n);
    if (!m.domain().contains(pos)) {
      throw DomainExitError("geodesic_flow: left the chart of " + m.describe() +
                               " at t=" + std::to_string(t + h),
                           t + h);
    }
    ts.push_back(t + h);
    ps.push_back(pos);
    vs.push_back(y.tail(n));
  }
  ts.back() = duration;
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

// ---------------------------------------------------------------------------
// Parallel transport

TransportOutcome frame_transport(const Manifold& m, const PathSpec& path,
                                 double step) {
  if (path.empty()) throw std::invalid_argument("frame_transport: empty path");
  const int n = m.dim();
  if (path.point_dim() != n) {
    throw std::invalid_argument("frame_transport: path dimension mismatch");
  }
  const double T = path.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step)));
  const double h = T / steps;

  auto rhs = [&m, &path, n](double t, const Eigen::VectorXd& e_flat) {
    const Eigen::VectorXd pos = path.position(t);
    const Eigen::VectorXd u = m.to_frame(pos, path.velocity(t));
    const Eigen::MatrixXd g = christoffel_apply(m.christoffel_frame(pos), u);
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(e_flat.data(), n, n);
    const Eigen::MatrixXd de = -g * e;
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(de.data(), n * n));
  };

  Eigen::MatrixXd e0 = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(e0.data(), n * n);
  for (int k = 0; k < steps; ++k) {
    y = rk4_step(rhs, k * h, y, h);
  }
  Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(y.data(), n, n);
  TransportOutcome out;
  out.orthogonality_drift = isometry_defect(e);
  out.transport = polar_project(e);
  return out;
}

Eigen::VectorXd parallel_transport(const Manifold& m, const PathSpec& path,
                                   const Eigen::VectorXd& v_frame, double step) {
  return frame_transport(m, path, step).transport * v_frame;
}

double rotation_angle(const Eigen::MatrixXd& r) {
  if (r.rows() != 2 || r.cols() != 2) {
    throw std::invalid_argument("rotation_angle: need a 2x2 matrix");
  }
  return std::atan2(r(1, 0), r(0, 0));
}

// ---------------------------------------------------------------------------
// Development

PathSpec develop(const Manifold& m, const PathSpec& path, double step) {
  if (path.empty()) throw std::invalid_argument("develop: empty path");
  const int n = m.dim();
  const double T = path.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step)));
  const double h = T / steps;

  // State: [vec(E), Lambda]; E transports frame components from start to the
  // current point, Lambda accumulates the pulled-back velocity.
  auto rhs = [&m, &path, n](double t, const Eigen::VectorXd& y) {
    const Eigen::VectorXd pos = path.position(t);
    const Eigen::VectorXd u = m.to_frame(pos, path.velocity(t));
    const Eigen::MatrixXd g = christoffel_apply(m.christoffel_frame(pos), u);
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(y.data(), n, n);
    const Eigen::MatrixXd de = -g * e;
    Eigen::VectorXd dy(n * n + n);
    dy.head(n * n) = Eigen::Map<const Eigen::VectorXd>(de.data(), n * n);
    dy.tail(n) = e.transpose() * u;
    return dy;
  };

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n * n + n);
  Eigen::Map<Eigen::MatrixXd>(y.data(), n, n).setIdentity();

  std::vector<double> ts{0.0};
  std::vector<Eigen::VectorXd> ps{Eigen::VectorXd::Zero(n)};
  std::vector<Eigen::VectorXd> vs{rhs(0.0, y).tail(n)};
  for (int k = 0; k < steps; ++k) {
    y = rk4_step(rhs, k * h, y, h);
    const double t = (k + 1) * h;
    ts.push_back(t);
    ps.push_back(y.tail(n));
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(y.data(), n, n);
    const Eigen::VectorXd pos = path.position(t);
    vs.push_back(e.transpose() * m.to_frame(pos, path.velocity(t)));
  }
  ts.back() = T;
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

PathSpec antidevelop(const Manifold& m, const Eigen::VectorXd& x0,
                     const PathSpec& flat_curve, double step) {
  if (flat_curve.empty()) throw std::invalid_argument("antidevelop: empty curve");
  const int n = m.dim();
  m.require_inside(x0, "antidevelop start");
  const double T = flat_curve.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / step)));
  const double h = T / steps;

  // State: [x, vec(E)].
  auto rhs = [&m, &flat_curve, n](double t, const Eigen::VectorXd& y) {
    const Eigen::VectorXd pos = y.head(n);
    const Eigen::MatrixXd e = Eigen::Map<const Eigen::MatrixXd>(y.data() + n, n, n);
    const Eigen::VectorXd u = e * flat_curve.velocity(t);
    const Eigen::MatrixXd g = christoffel_apply(m.christoffel_frame(pos), u);
    const Eigen::MatrixXd de = -g * e;
    Eigen::VectorXd dy(n + n * n);
    dy.head(n) = m.frame(pos) * u;
    dy.tail(n * n) = Eigen::Map<const Eigen::VectorXd>(de.data(), n * n);
    return dy;
  };

  Eigen::VectorXd y(n + n * n);
  y.head(n) = x0;
  Eigen::Map<Eigen::MatrixXd>(y.data() + n, n, n).setIdentity();

  std::vector<double> ts{0.0};
  std::vector<Eigen::VectorXd> ps{x0};
  std::vector<Eigen::VectorXd> vs{rhs(0.0, y).head(n)};
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    y = rk4_step(rhs, t, y, h);
    const Eigen::VectorXd pos = y.head(n);
    if (!m.domain().contains(pos)) {
      throw DomainExitError("antidevelop: left the chart of " + m.describe() +
                               " at t=" + std::to_string(t + h),
                           t + h);
    }
    ts.push_back(t + h);
    ps.push_back(pos);
    vs.push_back(rhs(t + h, y).head(n));
  }
  ts.back() = T;
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

// ---------------------------------------------------------------------------
// Canonical spherical loop

PathSpec make_sphere_octant_loop(double radius, int samples_per_edge) {
  if (radius <= 0.0) throw std::invalid_argument("octant loop: radius must be > 0");
  if (samples_per_edge < 8) throw std::invalid_argument("octant loop: too few samples");
  const double r = radius;

  // Vertices on the embedded sphere; the chart projects from the pole
  // (0,..,0,r), so the loop avoids it.
  const Eigen::Vector3d va(r, 0, 0), vb(0, r, 0), vc(0, 0, -r);

  auto chart = [r](const Eigen::Vector3d& X) -> Eigen::Vector2d {
    return Eigen::Vector2d(X(0), X(1)) * (r / (r - X(2)));
  };
  auto chart_vel = [r](const Eigen::Vector3d& X, const Eigen::Vector3d& dX) -> Eigen::Vector2d {
    const double w = r - X(2);
    return Eigen::Vector2d(dX(0), dX(1)) * (r / w) +
           Eigen::Vector2d(X(0), X(1)) * (r * dX(2) / (w * w));
  };

  std::vector<double> ts;
  std::vector<Eigen::VectorXd> ps, vs;
  const double quarter = 0.5 * M_PI;  // arc angle of each edge
  double t0 = 0.0;
  const std::array<std::pair<Eigen::Vector3d, Eigen::Vector3d>, 3> edges = {
      std::make_pair(va, vb), std::make_pair(vb, vc), std::make_pair(vc, va)};
  for (int e = 0; e < 3; ++e) {
    const Eigen::Vector3d p = edges[e].first / r;
    const Eigen::Vector3d q = edges[e].second / r;
    for (int i = (e == 0 ? 0 : 1); i <= samples_per_edge; ++i) {
      const double s = quarter * i / samples_per_edge;
      const Eigen::Vector3d X = r * (std::cos(s) * p + std::sin(s) * q);
      const Eigen::Vector3d dX = r * (-std::sin(s) * p + std::cos(s) * q);
      ts.push_back(t0 + s);
      ps.push_back(chart(X));
      vs.push_back(chart_vel(X, dX));
    }
    t0 += quarter;
  }
  return PathSpec(std::move(ts), std::move(ps), std::move(vs));
}

}  // namespace rolling
