#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rolling/controllability.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/manifold.hpp"
#include "rolling/rng.hpp"
#include "rolling/state.hpp"
#include "rolling/transport.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace rolling;

namespace {

/// Closed square loop in chart coordinates: center -> +d1 -> +d2 -> -d1 -> -d2.
PathSpec chart_square_loop(const VectorXd& start, const VectorXd& d1, const VectorXd& d2,
                           int samples_per_side = 400) {
  std::vector<double> times;
  std::vector<VectorXd> pts;
  const VectorXd corners[5] = {start, start + d1, start + d1 + d2, start + d2, start};
  for (int side = 0; side < 4; ++side)
    for (int k = 0; k < samples_per_side; ++k) {
      const double s = static_cast<double>(k) / samples_per_side;
      times.push_back(0.25 * (side + s));
      pts.push_back(corners[side] + s * (corners[side + 1] - corners[side]));
    }
  times.push_back(1.0);
  pts.push_back(start);
  return PathSpec(times, pts);
}

PathSpec constant_path(const VectorXd& p) {
  return PathSpec({0.0, 1.0}, {p, p});
}

MatrixXd skew_part(const MatrixXd& e) { return 0.5 * (e - e.transpose()); }

/// Frobenius residual of a matrix against the span of a basis list.
double off_span(const std::vector<MatrixXd>& basis, MatrixXd c) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) {
      const double dot = (b.array() * c.array()).sum() / b.squaredNorm();
      c -= dot * b;
    }
  return c.norm();
}

}  // namespace

TEST_CASE("holonomy algebra dimensions across the catalog") {
  const VectorXd z2 = VectorXd::Zero(2), z3 = VectorXd::Zero(3);
  CHECK(holonomy_algebra(make_euclidean(2), z2, 200, 1).dim() == 0);
  CHECK(holonomy_algebra(make_euclidean(3), z3, 200, 2).dim() == 0);
  CHECK(holonomy_algebra(make_sphere(2, 1.0), z2, 200, 3).dim() == 1);
  CHECK(holonomy_algebra(make_sphere(3, 1.0), z3, 200, 4).dim() == 3);
  CHECK(holonomy_algebra(make_hyperbolic(2, 1.0), z2, 200, 5).dim() == 1);
  CHECK(holonomy_algebra(make_product({make_sphere(2, 1.0), make_euclidean(1)}), z3, 200, 6)
            .dim() == 1);
}

TEST_CASE("holonomy sampling is stable and the algebra is well formed") {
  for (auto [m, x] : {std::pair<ManifoldPtr, VectorXd>{make_sphere(3, 1.0), VectorXd::Zero(3)},
                      {make_product({make_sphere(2, 1.0), make_euclidean(1)}),
                       VectorXd::Zero(3)}}) {
    const HolonomyAlgebra h200 = holonomy_algebra(m, x, 200, 12);
    const HolonomyAlgebra h400 = holonomy_algebra(m, x, 400, 13);
    CHECK(h200.dim() == h400.dim());
    CHECK(h200.samples_used + h200.samples_skipped == 200);
    CHECK(h200.provenance.size() == h200.basis.size());

    for (std::size_t i = 0; i < h200.basis.size(); ++i) {
      const MatrixXd& b = h200.basis[i];
      CHECK((b + b.transpose()).norm() < 1e-12);  // antisymmetric
      CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-9));
      for (std::size_t j = i + 1; j < h200.basis.size(); ++j)
        CHECK(std::abs((b.array() * h200.basis[j].array()).sum()) < 1e-9);
      // closed under commutators within its own span
      for (std::size_t j = 0; j < h200.basis.size(); ++j) {
        const MatrixXd c = b * h200.basis[j] - h200.basis[j] * b;
        CHECK(off_span(h200.basis, c) < 1e-6);
      }
    }
  }

  // Deterministic for a fixed seed.
  const HolonomyAlgebra a = holonomy_algebra(make_sphere(3, 1.0), VectorXd::Zero(3), 50, 77);
  const HolonomyAlgebra b = holonomy_algebra(make_sphere(3, 1.0), VectorXd::Zero(3), 50, 77);
  REQUIRE(a.dim() == b.dim());
  for (int i = 0; i < a.dim(); ++i) CHECK((a.basis[i] - b.basis[i]).norm() == 0.0);
}

TEST_CASE("explicit loop transports agree with the computed algebras") {
  // Flat: every loop transport is the identity.
  {
    ManifoldPtr e = make_euclidean(2);
    const PathSpec loop = chart_square_loop(VectorXd::Zero(2), VectorXd::Unit(2, 0) * 0.7,
                                            VectorXd::Unit(2, 1) * 0.7);
    const MatrixXd el = frame_transport(*e, loop).transport;
    CHECK(skew_part(el).norm() < 1e-9);
  }
  // Sphere: the right-angled triangle loop turns vectors by a quarter turn,
  // and its rotation generator spans the one-dimensional algebra.
  {
    ManifoldPtr s = make_sphere(2, 1.0);
    const PathSpec loop = make_sphere_octant_loop(1.0);
    const MatrixXd el = frame_transport(*s, loop).transport;
    const MatrixXd k = skew_part(el);
    REQUIRE(k.norm() > 1e-1);
    const HolonomyAlgebra h = holonomy_algebra(s, loop.front(), 100, 21);
    REQUIRE(h.dim() == 1);
    CHECK(off_span(h.basis, k) < 1e-6);
  }
  // Product: loops confined to the curved factor produce block rotations
  // with a zero flat block, matching the computed generators.
  {
    ManifoldPtr p = make_product({make_sphere(2, 1.0), make_euclidean(1)});
    VectorXd d1 = VectorXd::Zero(3), d2 = VectorXd::Zero(3);
    d1(0) = 0.4;
    d2(1) = 0.4;
    const PathSpec loop = chart_square_loop(VectorXd::Zero(3), d1, d2);
    const MatrixXd el = frame_transport(*p, loop).transport;
    const MatrixXd k = skew_part(el);
    REQUIRE(k.norm() > 1e-3);
    CHECK(std::abs(k(0, 2)) + std::abs(k(1, 2)) + std::abs(k(2, 0)) + std::abs(k(2, 1)) <
          1e-9);
    const HolonomyAlgebra h = holonomy_algebra(p, VectorXd::Zero(3), 100, 22);
    REQUIRE(h.dim() == 1);
    CHECK(off_span(h.basis, k) < 1e-6);
    CHECK(h.basis[0].col(2).norm() < 1e-9);
    CHECK(h.basis[0].row(2).norm() < 1e-9);
  }
}

TEST_CASE("fiber tangent dimensions for the no-spin system") {
  // Trivial algebras give no fiber motion.
  {
    ManifoldPtr e2 = make_euclidean(2), e3 = make_euclidean(3);
    const HolonomyAlgebra h = holonomy_algebra(e2, VectorXd::Zero(2), 50, 31);
    const HolonomyAlgebra hh = holonomy_algebra(e3, VectorXd::Zero(3), 50, 32);
    const RollingState q = make_state(e2, e3, VectorXd::Zero(2), VectorXd::Zero(3),
                                      i_nnhat(2, 3));
    CHECK(ns_fiber_tangent_dim(q, h, hh) == 0);
  }
  // Hand-checked spans: so(3) pushed through the canonical inclusion fills
  // the whole vertical space of the (2,3) pair; two copies of so(2) against
  // a rotation fill the one vertical direction of the (2,2) pair.
  {
    ManifoldPtr s2 = make_sphere(2, 1.0), s3 = make_sphere(3, 1.0);
    const HolonomyAlgebra h = holonomy_algebra(s2, VectorXd::Zero(2), 100, 33);
    const HolonomyAlgebra hh = holonomy_algebra(s3, VectorXd::Zero(3), 100, 34);
    REQUIRE(h.dim() == 1);
    REQUIRE(hh.dim() == 3);
    const RollingState q = make_state(s2, s3, VectorXd::Zero(2), VectorXd::Zero(3),
                                      i_nnhat(2, 3));
    CHECK(ns_fiber_tangent_dim(q, h, hh) == 3);
    CHECK(ns_fiber_tangent_dim(q, h, hh) == vertical_dim(2, 3));

    // Every generated direction is genuinely vertical at q.
    const auto vbasis = vertical_basis(q);
    for (const auto& khat : hh.basis) CHECK(off_span(vbasis, khat * q.A) < 1e-9);
    for (const auto& k : h.basis) CHECK(off_span(vbasis, q.A * k) < 1e-9);
  }
  {
    ManifoldPtr s2 = make_sphere(2, 1.0);
    const HolonomyAlgebra h = holonomy_algebra(s2, VectorXd::Zero(2), 100, 35);
    const RollingState q = make_state(s2, s2, VectorXd::Zero(2), VectorXd::Zero(2),
                                      MatrixXd::Identity(2, 2));
    CHECK(ns_fiber_tangent_dim(q, h, h) == 1);
    CHECK(vertical_dim(2, 2) == 1);
  }
}

TEST_CASE("no-spin controllability verdicts") {
  {
    const NsVerdict v = ns_controllable(make_euclidean(2), make_euclidean(3), 100, 41);
    REQUIRE(v.decided);
    CHECK_FALSE(v.controllable);
    CHECK(v.fiber_dim_identity == 0);
    CHECK(v.vertical_dimension == 3);
  }
  {
    const NsVerdict v = ns_controllable(make_sphere(2, 1.0), make_sphere(3, 1.0), 150, 42);
    REQUIRE(v.decided);
    CHECK(v.controllable);
    CHECK(v.fiber_dim_identity == 3);
    for (int d : v.probe_dims) CHECK(d == 3);
  }
  {
    const NsVerdict v = ns_controllable(make_sphere(2, 1.0), make_sphere(2, 1.0), 150, 43);
    REQUIRE(v.decided);
    CHECK(v.controllable);
    CHECK(v.fiber_dim_identity == 1);
    for (int d : v.probe_dims) CHECK(d == 1);
  }
  {
    // A flat metric declared non simply connected: the verdict is withheld,
    // the probes still run.
    auto flat = [](const VectorXd& x) { return MatrixXd::Identity(x.size(), x.size()); };
    ManifoldPtr m = make_custom_metric(2, flat, ChartDomain::centered_box(2, 3.0),
                                       "flat-band", false);
    const NsVerdict v = ns_controllable(m, make_euclidean(2), 30, 44);
    CHECK_FALSE(v.decided);
    CHECK(v.probe_dims.size() == 10);
    CHECK(!v.note.empty());
  }
}

TEST_CASE("fiber chords produced by loop pairs stay in the predicted span") {
  ManifoldPtr s2 = make_sphere(2, 1.0), s3 = make_sphere(3, 1.0);
  const VectorXd x0 = VectorXd::Zero(2), xh0 = VectorXd::Zero(3);
  const HolonomyAlgebra h = holonomy_algebra(s2, x0, 100, 51);
  const HolonomyAlgebra hh = holonomy_algebra(s3, xh0, 100, 52);
  const RollingState q0 = make_state(s2, s3, x0, xh0, i_nnhat(2, 3));

  std::vector<MatrixXd> span_basis;
  for (const auto& khat : hh.basis) span_basis.push_back(khat * q0.A);
  for (const auto& k : h.basis) span_basis.push_back(q0.A * k);

  const double side = 0.01;
  const PathSpec src_loop = chart_square_loop(x0, VectorXd::Unit(2, 0) * side,
                                              VectorXd::Unit(2, 1) * side);
  VectorXd t1 = VectorXd::Zero(3), t2 = VectorXd::Zero(3);
  t1(0) = side;
  t2(2) = side;
  const PathSpec tgt_loop = chart_square_loop(xh0, t1, t2);

  const MatrixXd chord_src =
      roll_ns(q0, src_loop, constant_path(xh0)).final_state().A - q0.A;
  const MatrixXd chord_tgt =
      roll_ns(q0, constant_path(x0), tgt_loop).final_state().A - q0.A;
  const MatrixXd chord_both = roll_ns(q0, src_loop, tgt_loop).final_state().A - q0.A;

  for (const MatrixXd& chord : {chord_src, chord_tgt, chord_both}) {
    REQUIRE(chord.norm() > 1e-4);  // the loops actually move the fiber
    CHECK(off_span(span_basis, chord) < 1e-6);
  }
}

TEST_CASE("bracket span ranks: ball on table reaches everything by depth 3") {
  Rng rng(61);
  const RollingState q = random_state(make_sphere(2, 1.0), make_euclidean(2), rng, 0.3);
  const LieSpanReport rep = larc(q, 4);
  REQUIRE(rep.rank_per_depth.size() == 4);
  CHECK(rep.rank_per_depth[0] == 2);
  CHECK(rep.rank_per_depth[1] == 3);
  CHECK(rep.rank_per_depth[2] == 5);
  CHECK(rep.rank_per_depth[3] == 5);
  CHECK(rep.rank() == state_dim(2, 2));
  CHECK(rep.verdict == SpanVerdict::full_rank);
  CHECK(rep.oracle_failed == 0);
  CHECK(static_cast<int>(rep.basis.size()) == rep.rank());

  const CodimReport c = codim_report(rep);
  CHECK(c.codim == 0);
  CHECK(c.within_bound);
}

TEST_CASE("bracket span ranks: equal spheres stay at the lift rank") {
  Rng rng(62);
  const RollingState q = random_state(make_sphere(2, 1.0), make_sphere(2, 1.0), rng, 0.3);
  const LieSpanReport rep = larc(q, 4);
  for (int r : rep.rank_per_depth) CHECK(r == 2);
  CHECK(rep.verdict == SpanVerdict::rank_deficient);

  const CodimReport c = codim_report(rep);
  CHECK(c.codim == 3);
  CHECK(c.bound == 1);
  CHECK_FALSE(c.within_bound);
  CHECK(!c.note.empty());
}

TEST_CASE("bracket span ranks: flat sheet in a round space stays deficient") {
  Rng rng(63);
  const RollingState q = random_state(make_euclidean(2), make_sphere(3, 1.0), rng, 0.3);
  const LieSpanReport rep = larc(q, 4);
  CHECK(rep.rank() < state_dim(2, 3));
  CHECK(rep.verdict == SpanVerdict::rank_deficient);
  CHECK(rep.rank_per_depth.front() == 2);
  // ranks never decrease and never exceed the space dimension
  for (std::size_t i = 1; i < rep.rank_per_depth.size(); ++i)
    CHECK(rep.rank_per_depth[i] >= rep.rank_per_depth[i - 1]);
  CHECK(rep.rank() <= state_dim(2, 3));
}

TEST_CASE("bracket span ranks: generic bumpy solid on a sphere fills the space") {
  Rng rng(64);
  const RollingState q =
      random_state(make_perturbed_euclidean(3, 0.05), make_sphere(2, 1.0), rng, 0.3);
  const LieSpanReport rep = larc(q, 3);
  CHECK(rep.rank() == state_dim(3, 2));
  CHECK(rep.verdict == SpanVerdict::full_rank);
  CHECK(rep.oracle_failed == 0);

  const CodimReport c = codim_report(rep);
  CHECK(c.codim == 0);
}

TEST_CASE("bracket span rank is invariant under chart isometries") {
  Rng rng(65);
  const RollingState q = random_state(make_euclidean(2), make_sphere(3, 1.0), rng, 0.3);
  const int base_rank = larc(q, 3).rank();

  const double ang = 0.7;
  MatrixXd w(3, 3);
  w << std::cos(ang), -std::sin(ang), 0.0, std::sin(ang), std::cos(ang), 0.0, 0.0, 0.0, 1.0;
  const ChartIsometry iso = make_rotation_isometry(w);
  const RollingState q2 = act_target(iso, q);
  CHECK(larc(q2, 3).rank() == base_rank);

  const ChartIsometry shift = make_translation_isometry(VectorXd::Constant(2, 0.4));
  const RollingState q3 = act_source(q, shift);
  CHECK(larc(q3, 3).rank() == base_rank);
}

TEST_CASE("involutivity detection") {
  CHECK(involutivity_check(make_sphere(2, 1.0), make_sphere(2, 1.0), 8));
  CHECK(involutivity_check(make_euclidean(2), make_euclidean(3), 8));
  CHECK_FALSE(involutivity_check(make_sphere(2, 1.0), make_sphere(2, 2.0), 8));
  // Same curvature but different dimensions: the forward mismatch vanishes,
  // the transposed one does not.
  CHECK_FALSE(involutivity_check(make_sphere(2, 1.0), make_sphere(3, 1.0), 8));
}

TEST_CASE("totally geodesic trap verdicts") {
  CHECK(totally_geodesic_obstruction(make_euclidean(2), make_sphere(3, 1.0)) ==
        ObstructionVerdict::not_controllable);
  CHECK(totally_geodesic_obstruction(make_euclidean(2), make_euclidean(3)) ==
        ObstructionVerdict::not_controllable);
  CHECK(totally_geodesic_obstruction(
            make_sphere(2, 1.0),
            make_warped(2, WarpKind::Linear, 1.0, 0.3, -1.0, 1.0)) ==
        ObstructionVerdict::inconclusive);
  CHECK_THROWS_AS(totally_geodesic_obstruction(make_sphere(3, 1.0), make_sphere(2, 1.0)),
                  std::invalid_argument);
}
