#pragma once

#include <Eigen/Dense>

#include "rolling/state.hpp"

namespace rolling {

/// Constructions bridging rolling problems whose dimensions differ by one:
/// either the target is augmented with a flat line factor (roll M on R x M_hat)
/// or the source is (roll R x M on M_hat). Lifts embed the original state
/// space into the augmented one; projections invert them exactly.

enum class GapSide { target_augmented, source_augmented };

struct GapConfig {
  GapSide side = GapSide::target_augmented;
  double offset = 0.0;  // initial coordinate on the added line factor
};

/// Embeds q into Q(M, R x M_hat). Requires dim M_hat in {n-1, n}. For the
/// one-lower target the kernel direction of the relative-position map is sent
/// to the line factor, with the sign fixed so the square lifted map has
/// determinant +1; for equal dimensions the kernel is trivial and the line
/// row is zero.
RollingState lift_target(const RollingState& q, double a);

/// Drops the line-factor row. Inverse of lift_target on its image; defined on
/// any state of Q(M, R x M_hat) whose dropped row leaves an isometry (always
/// the case when dim M = dim(R x M_hat)).
RollingState project_target(const RollingState& q1);

/// Embeds q into Q(R x M, M_hat). Requires dim M = dim M_hat - 1. The line
/// direction is sent to the unit normal of the image of the relative-position
/// map, signed so the square lifted map has determinant +1.
RollingState lift_source(const RollingState& q, double a);

/// Drops the line-factor column. Inverse of lift_source on its image; defined
/// on all of Q(R x M, M_hat).
RollingState project_source(const RollingState& q1);

/// Unit kernel direction of the relative-position map at q (frame
/// components), for pairs with dim M = dim M_hat + 1. Sign convention: first
/// component of magnitude above 1e-12 is positive.
Eigen::VectorXd kernel_direction(const RollingState& q);

}  // namespace rolling
