#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "rolling/manifold.hpp"

namespace rolling {

/// Sampled curve in chart coordinates. With velocities present, evaluation is
/// piecewise cubic Hermite; otherwise piecewise linear. Times must be
/// strictly increasing and start at 0.
class PathSpec {
 public:
  PathSpec() = default;
  PathSpec(std::vector<double> times, std::vector<Eigen::VectorXd> points,
           std::vector<Eigen::VectorXd> velocities = {});

  static PathSpec from_function(const std::function<Eigen::VectorXd(double)>& pos,
                                double duration, int samples);
  static PathSpec from_function(const std::function<Eigen::VectorXd(double)>& pos,
                                const std::function<Eigen::VectorXd(double)>& vel,
                                double duration, int samples);

  bool empty() const { return times_.empty(); }
  int point_dim() const { return times_.empty() ? 0 : static_cast<int>(points_[0].size()); }
  double duration() const { return times_.empty() ? 0.0 : times_.back(); }
  std::size_t sample_count() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Eigen::VectorXd>& points() const { return points_; }
  const std::vector<Eigen::VectorXd>& velocities() const { return velocities_; }
  bool has_velocities() const { return !velocities_.empty(); }

  Eigen::VectorXd position(double t) const;
  Eigen::VectorXd velocity(double t) const;

  const Eigen::VectorXd& front() const { return points_.front(); }
  const Eigen::VectorXd& back() const { return points_.back(); }

  bool is_closed(double tol = 1e-9) const;
  PathSpec reversed() const;

 private:
  int segment_of(double t) const;

  std::vector<double> times_;
  std::vector<Eigen::VectorXd> points_;
  std::vector<Eigen::VectorXd> velocities_;
};

/// Geodesic through x with initial velocity given in frame components.
/// Integrates the coordinate geodesic equation with fixed-step RK4 and
/// records every step. Throws DomainExitError if the chart is left.
PathSpec geodesic_flow(const Manifold& m, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& v_frame, double duration,
                       double step = 1e-3);

struct TransportOutcome {
  /// Matrix of the parallel transport from the initial to the final point of
  /// the path, in frame components (orthogonal up to integration error,
  /// re-projected; the raw defect is reported separately).
  Eigen::MatrixXd transport;
  double orthogonality_drift = 0.0;
};

/// Parallel transport of the whole frame along a sampled path.
TransportOutcome frame_transport(const Manifold& m, const PathSpec& path,
                                 double step = 1e-3);

/// Parallel transport of one vector (frame components in, frame components out).
Eigen::VectorXd parallel_transport(const Manifold& m, const PathSpec& path,
                                   const Eigen::VectorXd& v_frame,
                                   double step = 1e-3);

/// Rotation angle of an SO(2) matrix (atan2 of the first column).
double rotation_angle(const Eigen::MatrixXd& r);

/// Development of a curve into the initial tangent space: the flat curve with
/// derivative equal to the parallel pullback of the curve's velocity. Output
/// lives in R^n (frame components at the start point) and starts at 0.
PathSpec develop(const Manifold& m, const PathSpec& path, double step = 1e-3);

/// Inverse of develop: reconstructs the curve on the manifold whose
/// development is the given flat curve, starting at x0.
PathSpec antidevelop(const Manifold& m, const Eigen::VectorXd& x0,
                     const PathSpec& flat_curve, double step = 1e-3);

/// Closed spherical triangle with three right angles (quarter arcs of great
/// circles through the chart center and along the equator) for the
/// stereographic sphere chart of the given radius. Encloses area pi r^2 / 2,
/// so loop transport rotates by pi/2. Starts and ends at chart point (r, 0).
PathSpec make_sphere_octant_loop(double radius, int samples_per_edge = 1200);

}  // namespace rolling
