#include "rolling/brackets.hpp"

#include <cmath>
#include <stdexcept>

#include "rolling/numerics.hpp"
#include "rolling/rng.hpp"

namespace rolling {

namespace {

void check_dirs(const RollingState& q, std::initializer_list<const Eigen::VectorXd*> dirs) {
  for (const auto* d : dirs)
    if (d->size() != q.n())
      throw std::invalid_argument("bracket: direction dimension must match the rolling side");
}

}  // namespace

Eigen::MatrixXd rolling_curvature(const RollingState& q, const Eigen::VectorXd& x_dir,
                                  const Eigen::VectorXd& y_dir) {
  check_dirs(q, {&x_dir, &y_dir});
  const CurvatureTensor R = q.m->curvature(q.x);
  const CurvatureTensor Rh = q.m_hat->curvature(q.x_hat);
  return q.A * R.apply(x_dir, y_dir) - Rh.apply(q.A * x_dir, q.A * y_dir) * q.A;
}

Eigen::MatrixXd rolling_curvature_cov1(const RollingState& q, const Eigen::VectorXd& x_dir,
                                       const Eigen::VectorXd& y_dir,
                                       const Eigen::VectorXd& z_dir) {
  check_dirs(q, {&x_dir, &y_dir, &z_dir});
  const CurvatureCov1 d = q.m->curvature_cov1(q.x);
  const CurvatureCov1 dh = q.m_hat->curvature_cov1(q.x_hat);
  return q.A * d.apply(x_dir, y_dir, z_dir) -
         dh.apply(q.A * x_dir, q.A * y_dir, q.A * z_dir) * q.A;
}

Eigen::MatrixXd rolling_curvature_cov2(const RollingState& q, const Eigen::VectorXd& x_dir,
                                       const Eigen::VectorXd& y_dir,
                                       const Eigen::VectorXd& z1_dir,
                                       const Eigen::VectorXd& z2_dir) {
  check_dirs(q, {&x_dir, &y_dir, &z1_dir, &z2_dir});
  const CurvatureCov2 d = q.m->curvature_cov2(q.x);
  const CurvatureCov2 dh = q.m_hat->curvature_cov2(q.x_hat);
  return q.A * d.apply(x_dir, y_dir, z1_dir, z2_dir) -
         dh.apply(q.A * x_dir, q.A * y_dir, q.A * z1_dir, q.A * z2_dir) * q.A;
}

double rolling_curvature_scan(ManifoldPtr m, ManifoldPtr m_hat, unsigned seed, int states,
                              int pairs_per_state) {
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < states; ++s) {
    const RollingState q = random_state(m, m_hat, rng);
    for (int p = 0; p < pairs_per_state; ++p) {
      const Eigen::VectorXd x = rng.unit_vector(q.n());
      const Eigen::VectorXd y = rng.unit_vector(q.n());
      worst = std::max(worst, rolling_curvature(q, x, y).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// analytic brackets

TangentTriple bracket_lift_lift(const RollingState& q, const Eigen::VectorXd& x_dir,
                                const Eigen::VectorXd& y_dir) {
  check_dirs(q, {&x_dir, &y_dir});
  const auto gam = q.m->christoffel_frame(q.x);
  const Eigen::VectorXd w =
      christoffel_apply(gam, x_dir) * y_dir - christoffel_apply(gam, y_dir) * x_dir;
  return TangentTriple(w, q.A * w, rolling_curvature(q, x_dir, y_dir));
}

TangentTriple bracket_lift_vertical(const RollingState& q, const Eigen::VectorXd& z_dir,
                                    const Eigen::VectorXd& x_dir,
                                    const Eigen::VectorXd& y_dir) {
  check_dirs(q, {&z_dir, &x_dir, &y_dir});
  const Eigen::MatrixXd rol = rolling_curvature(q, x_dir, y_dir);
  return TangentTriple(Eigen::VectorXd::Zero(q.n()), -(rol * z_dir),
                       rolling_curvature_cov1(q, x_dir, y_dir, z_dir));
}

TangentTriple bracket_vertical_vertical(const RollingState& q, const Eigen::VectorXd& x_dir,
                                        const Eigen::VectorXd& y_dir,
                                        const Eigen::VectorXd& z_dir,
                                        const Eigen::VectorXd& w_dir) {
  check_dirs(q, {&x_dir, &y_dir, &z_dir, &w_dir});
  const CurvatureTensor R = q.m->curvature(q.x);
  const CurvatureTensor Rh = q.m_hat->curvature(q.x_hat);
  const Eigen::MatrixXd& A = q.A;

  const Eigen::MatrixXd rxy = R.apply(x_dir, y_dir);
  const Eigen::MatrixXd rzw = R.apply(z_dir, w_dir);
  const Eigen::MatrixXd rh_xy = Rh.apply(A * x_dir, A * y_dir);
  const Eigen::MatrixXd rh_zw = Rh.apply(A * z_dir, A * w_dir);
  const Eigen::MatrixXd rol_xy = A * rxy - rh_xy * A;
  const Eigen::MatrixXd rol_zw = A * rzw - rh_zw * A;

  Eigen::MatrixXd b = A * (rxy * rzw - rzw * rxy) - (rh_xy * rh_zw - rh_zw * rh_xy) * A;
  b -= Rh.apply(rol_xy * z_dir, A * w_dir) * A;
  b -= Rh.apply(A * z_dir, rol_xy * w_dir) * A;
  b += Rh.apply(rol_zw * x_dir, A * y_dir) * A;
  b += Rh.apply(A * x_dir, rol_zw * y_dir) * A;
  return TangentTriple(Eigen::VectorXd::Zero(q.n()), Eigen::VectorXd::Zero(q.n_hat()), b);
}

// ---------------------------------------------------------------------------
// flowable fields and the finite-flow commutator

GeneratorField roll_lift(const Eigen::VectorXd& z) {
  GeneratorField f;
  f.kind = GeneratorField::Kind::RollLift;
  f.z = z;
  return f;
}

GeneratorField vert_rol(const Eigen::VectorXd& x_dir, const Eigen::VectorXd& y_dir,
                        bool transported) {
  GeneratorField f;
  f.kind = GeneratorField::Kind::VertRol;
  f.xa = x_dir;
  f.ya = y_dir;
  f.transported = transported;
  return f;
}

GeneratorField lr_nu_field(const Eigen::VectorXd& z_dir, const Eigen::VectorXd& x_dir,
                           const Eigen::VectorXd& y_dir) {
  GeneratorField f;
  f.kind = GeneratorField::Kind::LrNu;
  f.z = z_dir;
  f.xa = x_dir;
  f.ya = y_dir;
  f.transported = false;
  return f;
}

TangentTriple eval_field(const RollingState& q, const GeneratorField& f) {
  if (f.kind == GeneratorField::Kind::RollLift) {
    return TangentTriple(f.z, q.A * f.z, Eigen::MatrixXd::Zero(q.n_hat(), q.n()));
  }
  if (f.kind == GeneratorField::Kind::LrNu) {
    return TangentTriple(Eigen::VectorXd::Zero(q.n()),
                         -(rolling_curvature(q, f.xa, f.ya) * f.z),
                         rolling_curvature_cov1(q, f.xa, f.ya, f.z));
  }
  return TangentTriple(Eigen::VectorXd::Zero(q.n()), Eigen::VectorXd::Zero(q.n_hat()),
                       rolling_curvature(q, f.xa, f.ya));
}

namespace {

/// Flows the fiber equation dA/dt = A R(x_dir,y_dir) - R_hat(A x_dir, A y_dir) A
/// at frozen contact points.
RollingState vertical_flow(const RollingState& q, const Eigen::VectorXd& x_dir,
                           const Eigen::VectorXd& y_dir, double time, double step) {
  const int n = q.n(), nh = q.n_hat();
  const CurvatureTensor R = q.m->curvature(q.x);
  const CurvatureTensor Rh = q.m_hat->curvature(q.x_hat);
  const Eigen::MatrixXd rxy = R.apply(x_dir, y_dir);

  auto rhs = [&](double, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    const Eigen::Map<const Eigen::MatrixXd> a(yy.data(), nh, n);
    const Eigen::MatrixXd da = a * rxy - Rh.apply(a * x_dir, a * y_dir) * a;
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(da.data(), nh * n));
  };

  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(time) / step)));
  const double h = time / steps;
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(q.A.data(), nh * n);
  for (int k = 0; k < steps; ++k) y = rk4_step(rhs, k * h, y, h);
  const Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(y.data(), nh, n);
  return make_state(q.m, q.m_hat, q.x, q.x_hat, a);
}

Eigen::MatrixXd segment_transport(const Manifold& m, const Eigen::VectorXd& a,
                                  const Eigen::VectorXd& b) {
  if ((b - a).norm() < 1e-15) return Eigen::MatrixXd::Identity(m.dim(), m.dim());
  const PathSpec seg({0.0, 1.0}, {a, b});
  return frame_transport(m, seg, 0.5).transport;
}

/// Flows a field with no base-point motion: the target point follows the
/// field's target component and the map follows the fiber component, both
/// read off the field at the current state.
RollingState target_fiber_flow(const RollingState& q, const GeneratorField& f, double time,
                               double step) {
  const int n = q.n(), nh = q.n_hat();
  auto rhs = [&](double, const Eigen::VectorXd& yy) -> Eigen::VectorXd {
    RollingState cur;
    cur.m = q.m;
    cur.m_hat = q.m_hat;
    cur.x = q.x;
    cur.x_hat = yy.head(nh);
    cur.A = Eigen::Map<const Eigen::MatrixXd>(yy.data() + nh, nh, n);
    const TangentTriple val = eval_field(cur, f);
    const Eigen::MatrixXd da =
        -christoffel_apply(q.m_hat->christoffel_frame(cur.x_hat), val.u_hat) * cur.A + val.B;
    Eigen::VectorXd dy(nh + nh * n);
    dy.head(nh) = q.m_hat->frame(cur.x_hat) * val.u_hat;
    dy.tail(nh * n) = Eigen::Map<const Eigen::VectorXd>(da.data(), nh * n);
    return dy;
  };

  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(time) / step)));
  const double h = time / steps;
  Eigen::VectorXd y(nh + nh * n);
  y.head(nh) = q.x_hat;
  y.tail(nh * n) = Eigen::Map<const Eigen::VectorXd>(q.A.data(), nh * n);
  for (int k = 0; k < steps; ++k) y = rk4_step(rhs, k * h, y, h);
  const Eigen::MatrixXd a = Eigen::Map<const Eigen::MatrixXd>(y.data() + nh, nh, n);
  return make_state(q.m, q.m_hat, q.x, y.head(nh), a);
}

}  // namespace

RollingState flow_field(const RollingState& q, const GeneratorField& f, double time,
                        double step) {
  if (f.kind == GeneratorField::Kind::VertRol) {
    return vertical_flow(q, f.xa, f.ya, time, step);
  }
  if (f.kind == GeneratorField::Kind::LrNu) {
    return target_fiber_flow(q, f, time, step);
  }
  const Eigen::VectorXd dir = time >= 0.0 ? f.z : Eigen::VectorXd(-f.z);
  const auto traj = roll(q, ControlSignal::constant(dir, std::abs(time)), step);
  if (traj.exited) throw DomainExitError("flow_field: left the chart", traj.exit_time);
  return traj.final_state();
}

TangentTriple triple_between(const RollingState& a, const RollingState& b, double scale) {
  const Eigen::VectorXd u = a.m->to_frame(a.x, b.x - a.x) / scale;
  const Eigen::VectorXd uh = a.m_hat->to_frame(a.x_hat, b.x_hat - a.x_hat) / scale;
  const Eigen::MatrixXd e = segment_transport(*a.m, a.x, b.x);
  const Eigen::MatrixXd eh = segment_transport(*a.m_hat, a.x_hat, b.x_hat);
  const Eigen::MatrixXd bmat = (eh.transpose() * b.A * e - a.A) / scale;
  return TangentTriple(u, uh, bmat);
}

TangentTriple flow_bracket(const RollingState& q, const GeneratorField& v,
                           const GeneratorField& w, double h) {
  if (h <= 0.0) throw std::invalid_argument("flow_bracket: h must be > 0");

  auto loop_once = [&](double hh) -> TangentTriple {
    GeneratorField fv = v, fw = w;
    RollingState cur = q;
    const double leg_step = hh / 8.0;

    auto run_leg = [&](GeneratorField& mover, GeneratorField& rider, double dt) {
      if (mover.kind == GeneratorField::Kind::RollLift) {
        const Eigen::VectorXd dir = dt >= 0.0 ? mover.z : Eigen::VectorXd(-mover.z);
        const auto traj = roll(cur, ControlSignal::constant(dir, std::abs(dt)), leg_step);
        if (traj.exited) throw DomainExitError("flow_bracket: left the chart", traj.exit_time);
        // The rider's argument pair follows the base motion by transport when
        // its extension says so.
        if (rider.kind == GeneratorField::Kind::VertRol && rider.transported) {
          const PathSpec base = traj.base_path();
          rider.xa = parallel_transport(*cur.m, base, rider.xa, leg_step);
          rider.ya = parallel_transport(*cur.m, base, rider.ya, leg_step);
        }
        cur = traj.final_state();
      } else if (mover.kind == GeneratorField::Kind::VertRol) {
        cur = vertical_flow(cur, mover.xa, mover.ya, dt, leg_step);
      } else {
        cur = target_fiber_flow(cur, mover, dt, leg_step);
      }
    };

    run_leg(fv, fw, hh);
    run_leg(fw, fv, hh);
    run_leg(fv, fw, -hh);
    run_leg(fw, fv, -hh);
    return triple_between(q, cur, hh * hh);
  };

  const TangentTriple d1 = loop_once(h);
  const TangentTriple d2 = loop_once(0.5 * h);
  return d2 * 2.0 - d1;
}

}  // namespace rolling
