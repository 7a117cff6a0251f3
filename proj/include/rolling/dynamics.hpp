#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rolling/state.hpp"
#include "rolling/transport.hpp"

namespace rolling {

/// Control signal u(t) in R^n, given in frame components on the rolling
/// manifold. Two reference conventions:
///   Moving:   u(t) are components in the frame at the current point, so a
///             constant u generally curves with the chart.
///   Parallel: u(t) are components in the frame parallel-transported along
///             the trajectory itself; a constant u then drives a geodesic
///             (straight development).
class ControlSignal {
 public:
  enum class Frame { Moving, Parallel };

  static ControlSignal constant(const Eigen::VectorXd& u, double duration,
                                Frame f = Frame::Moving);
  /// Piecewise constant: breakpoints are ascending from 0, one value per
  /// interval.
  static ControlSignal piecewise(std::vector<double> breakpoints,
                                 std::vector<Eigen::VectorXd> values,
                                 Frame f = Frame::Moving);
  /// Sampled with linear interpolation between samples.
  static ControlSignal sampled(std::vector<double> times,
                               std::vector<Eigen::VectorXd> values,
                               Frame f = Frame::Moving);

  double duration() const { return knots_.back(); }
  int dim() const { return values_.empty() ? 0 : static_cast<int>(values_[0].size()); }
  Frame frame() const { return frame_; }

  Eigen::VectorXd value(double t) const;

  ControlSignal scaled(double factor) const;  // scales the values, not time
  ControlSignal reversed() const;             // time-reversed and negated

 private:
  enum class Kind { Piecewise, Sampled };
  Kind kind_ = Kind::Piecewise;
  Frame frame_ = Frame::Moving;
  std::vector<double> knots_;
  std::vector<Eigen::VectorXd> values_;
};

/// Result of integrating the rolling kinematics. All samples share the index:
/// R[k] is the frame matrix of the relative-position map at time t[k], u[k]
/// the realized control in moving-frame components, and the dots are chart
/// velocities.
struct RollingTrajectory {
  ManifoldPtr m;
  ManifoldPtr m_hat;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> x_hat;
  std::vector<Eigen::MatrixXd> R;
  std::vector<Eigen::VectorXd> u;
  std::vector<Eigen::VectorXd> x_dot;
  std::vector<Eigen::VectorXd> x_hat_dot;

  /// Largest per-step orthogonality defect of R before re-projection.
  double max_isometry_drift = 0.0;
  /// Residual of the contact-velocity constraint evaluated on the stored
  /// samples (consistency of the recorded data, not an independent check).
  double max_no_slip_residual = 0.0;
  /// True when the integration left a chart; the trajectory is clipped to the
  /// last valid sample and exit_time is set.
  bool exited = false;
  double exit_time = 0.0;

  std::size_t size() const { return t.size(); }
  RollingState state_at(std::size_t k) const;
  RollingState final_state() const { return state_at(t.size() - 1); }

  PathSpec base_path() const;
  PathSpec target_path() const;
};

/// Integrates the rolling kinematics from q0 under the given control:
/// both contact points move with matched velocities and the relative-position
/// map is transported without twisting. Fixed-step RK4 with per-step
/// re-projection of R. On chart exit the trajectory is clipped and flagged
/// rather than thrown away.
RollingTrajectory roll(const RollingState& q0, const ControlSignal& ctrl,
                       double step = 1e-3);

/// Kinematics of twist-free contact along two prescribed curves: the
/// relative-position map is the composition of the parallel transports along
/// both curves. No matching of contact velocities is imposed; the stored
/// no-slip residual measures how far the pair is from a rolling pair.
RollingTrajectory roll_ns(const RollingState& q0, const PathSpec& path,
                          const PathSpec& path_hat, double step = 1e-3);

/// Closed-form rolling along a geodesic: both contact curves are geodesics
/// and the relative-position map is transported along them. Equals roll()
/// with a constant parallel-frame control.
RollingTrajectory roll_geodesic(const RollingState& q0, const Eigen::VectorXd& u_frame,
                                double duration, double step = 1e-3);

/// Independent check of the twist-free property of a rolled trajectory:
/// re-derives the relative-position map from parallel transports along the
/// two recorded contact curves (finer independent integration) and returns
/// the largest discrepancy over evenly spaced checkpoints.
double no_spin_residual(const RollingTrajectory& traj, double step = 2.5e-4,
                        int checkpoints = 8);

/// Largest deviation of the recorded contact velocities from the
/// no-slip relation, measured in frame components at checkpoints.
double no_slip_residual(const RollingTrajectory& traj);

/// The same motion seen from the other manifold: swaps the roles of the two
/// sides; the dual control is the image of the original one under the
/// relative-position map.
RollingTrajectory dual_trajectory(const RollingTrajectory& traj);

/// Affine chart self-map x -> W x + c, used as an isometry of the catalog
/// charts (any W orthogonal, c arbitrary for the flat chart; c = 0 and W
/// orthogonal for the round and conformal ball charts). The frame matrix of
/// its differential is W itself for all of these.
struct ChartIsometry {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Eigen::VectorXd apply(const Eigen::VectorXd& p) const { return linear * p + offset; }
  Eigen::VectorXd apply_inverse(const Eigen::VectorXd& p) const {
    return linear.transpose() * (p - offset);
  }
};

ChartIsometry make_rotation_isometry(const Eigen::MatrixXd& w);
ChartIsometry make_translation_isometry(const Eigen::VectorXd& c);

/// Right action on the rolling side: moves the contact point by the inverse
/// and composes the relative-position map with the differential.
RollingState act_source(const RollingState& q, const ChartIsometry& phi);

/// Left action on the fixed side.
RollingState act_target(const ChartIsometry& phi_hat, const RollingState& q);

}  // namespace rolling
