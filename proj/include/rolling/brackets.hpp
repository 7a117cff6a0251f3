#pragma once

#include <Eigen/Dense>

#include "rolling/dynamics.hpp"
#include "rolling/state.hpp"

namespace rolling {

/// Curvature mismatch seen by the contact map: the difference between the
/// curvature operator of the rolling manifold pushed through the map and the
/// curvature operator of the fixed manifold pulled back. Arguments are frame
/// vectors at the contact points; the result is vertical at q.
Eigen::MatrixXd rolling_curvature(const RollingState& q, const Eigen::VectorXd& x_dir,
                                  const Eigen::VectorXd& y_dir);

/// Covariant derivative of the curvature mismatch along a contact direction
/// (both sides move together through the map, the map itself is transported).
Eigen::MatrixXd rolling_curvature_cov1(const RollingState& q, const Eigen::VectorXd& x_dir,
                                       const Eigen::VectorXd& y_dir,
                                       const Eigen::VectorXd& z_dir);

/// Second covariant derivative, same convention.
Eigen::MatrixXd rolling_curvature_cov2(const RollingState& q, const Eigen::VectorXd& x_dir,
                                       const Eigen::VectorXd& y_dir,
                                       const Eigen::VectorXd& z1_dir,
                                       const Eigen::VectorXd& z2_dir);

/// Largest curvature-mismatch entry over a deterministic sample of states and
/// argument pairs; zero exactly when the two manifolds curve identically
/// through every contact map.
double rolling_curvature_scan(ManifoldPtr m, ManifoldPtr m_hat, unsigned seed, int states,
                              int pairs_per_state = 4);

/// Bracket of two rolling lifts whose directions have constant frame
/// components. Splits into the lift of the field bracket plus a vertical
/// curvature-mismatch part.
TangentTriple bracket_lift_lift(const RollingState& q, const Eigen::VectorXd& x_dir,
                                const Eigen::VectorXd& y_dir);

/// Bracket of a rolling lift with a vertical curvature-mismatch field whose
/// arguments are extended parallel at the contact point (their covariant
/// derivatives vanish there).
TangentTriple bracket_lift_vertical(const RollingState& q, const Eigen::VectorXd& z_dir,
                                    const Eigen::VectorXd& x_dir,
                                    const Eigen::VectorXd& y_dir);

/// Bracket of two vertical curvature-mismatch fields; the arguments are fixed
/// frame vectors, so no extension convention enters.
TangentTriple bracket_vertical_vertical(const RollingState& q, const Eigen::VectorXd& x_dir,
                                        const Eigen::VectorXd& y_dir,
                                        const Eigen::VectorXd& z_dir,
                                        const Eigen::VectorXd& w_dir);

/// A concretely flowable vector field on the configuration space, for the
/// finite-flow cross-check of the analytic brackets and for reachability
/// probes.
struct GeneratorField {
  enum class Kind {
    RollLift,  // rolling lift of a frame-constant direction on the base
    VertRol,   // vertical curvature-mismatch direction for an argument pair
    LrNu,      // value of [lift, vertical mismatch]: moves the target contact
               // point and the fiber, never the base point
  };
  Kind kind = Kind::RollLift;
  Eigen::VectorXd z;        // RollLift / LrNu lift direction (frame components)
  Eigen::VectorXd xa, ya;   // VertRol / LrNu argument pair
  /// VertRol only: during commutator legs the arguments ride along the base
  /// motion by parallel transport (the parallel-at-point extension); when
  /// false they keep their frame components (the frame-constant extension).
  bool transported = true;
};

GeneratorField roll_lift(const Eigen::VectorXd& z);
GeneratorField vert_rol(const Eigen::VectorXd& x_dir, const Eigen::VectorXd& y_dir,
                        bool transported = true);
/// Frame-constant extension of the lift-vertical bracket value. At every
/// state its value is a combination of bracket values there, so brackets
/// against it stay inside the generated span.
GeneratorField lr_nu_field(const Eigen::VectorXd& z_dir, const Eigen::VectorXd& x_dir,
                           const Eigen::VectorXd& y_dir);

/// Field value at a state.
TangentTriple eval_field(const RollingState& q, const GeneratorField& f);

/// Time-h flow of a field (exact semantics used by the commutator legs).
RollingState flow_field(const RollingState& q, const GeneratorField& f, double time,
                        double step);

/// The connecting tangent from a to b divided by `scale`: base displacements
/// in frame components at a, and the covariant fiber displacement obtained by
/// pulling the map at b back along the connecting segments.
TangentTriple triple_between(const RollingState& a, const RollingState& b, double scale);

/// Finite-flow commutator of two generator fields: runs the four-leg
/// commutator loop at parameters h and h/2 and extrapolates. Agrees with the
/// analytic brackets to second order in h.
TangentTriple flow_bracket(const RollingState& q, const GeneratorField& v,
                           const GeneratorField& w, double h = 1e-3);

}  // namespace rolling
