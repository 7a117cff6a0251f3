#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rolling/brackets.hpp"
#include "rolling/manifold.hpp"
#include "rolling/state.hpp"

namespace rolling {

/// Lie algebra of the parallel-transport rotations at a base point, generated
/// by curvature endomorphisms pulled back along geodesic rays and closed
/// under commutators. The basis is orthonormal in the Frobenius inner
/// product; provenance records what produced each element.
struct HolonomyAlgebra {
  Eigen::VectorXd x;
  std::vector<Eigen::MatrixXd> basis;
  std::vector<std::string> provenance;
  int samples_used = 0;
  int samples_skipped = 0;

  int dim() const { return static_cast<int>(basis.size()); }
};

HolonomyAlgebra holonomy_algebra(ManifoldPtr m, const Eigen::VectorXd& x, int n_samples,
                                 unsigned seed);

/// Dimension of span{k_hat A - A k} over the two algebras; a subspace of the
/// vertical space at q.
int ns_fiber_tangent_dim(const RollingState& q, const HolonomyAlgebra& h,
                         const HolonomyAlgebra& h_hat, double rank_rel_tol = 1e-7);

struct NsVerdict {
  bool decided = false;       // both sides declared simply connected
  bool controllable = false;  // meaningful only when decided
  int fiber_dim_identity = 0;
  int vertical_dimension = 0;
  HolonomyAlgebra h;
  HolonomyAlgebra h_hat;
  std::vector<int> probe_dims;  // fiber dims at random maps over the same points
  std::string note;
};

/// Decides controllability of the no-spin system: the fiber directions the
/// two holonomy algebras generate at the canonical map must fill the vertical
/// space. Random-map probes are reported alongside as a consistency check;
/// they never affect the verdict.
NsVerdict ns_controllable(ManifoldPtr m, ManifoldPtr m_hat, int n_samples = 200,
                          unsigned seed = 9001, int n_probes = 10);

struct LarcOptions {
  double rank_rel_tol = 1e-7;   // singular-value cutoff relative to the largest
  double oracle_step = 1e-3;    // commutator loop parameter
  double trust_tol = 1e-3;      // min off-span component for flow-oracle vectors
  double check_tol = 1e-4;      // analytic-vs-flow agreement bound
  double check_fraction = 0.1;  // fraction of analytic insertions cross-checked
  unsigned seed = 24601;        // drives the cross-check sampling
};

enum class SpanVerdict { full_rank, rank_deficient };

struct LieSpanReport {
  RollingState q;
  int depth = 0;
  std::vector<int> rank_per_depth;
  std::vector<int> generators_per_depth;
  std::vector<TangentTriple> basis;  // orthonormal basis of the achieved span
  Eigen::VectorXd singular_values;
  SpanVerdict verdict = SpanVerdict::rank_deficient;
  double rank_tol = 1e-7;
  int oracle_checked = 0;   // analytic values cross-checked against the flow
  int oracle_failed = 0;    // cross-checks that disagreed (value then excluded)
  int oracle_rejected = 0;  // flow-only vectors below the trust threshold

  int rank() const { return rank_per_depth.empty() ? 0 : rank_per_depth.back(); }
};

/// Iterated-bracket span of the rolling distribution at q up to the given
/// nesting depth (1..4). Depths 2 and 3 use the closed bracket formulas;
/// depth 4 adds closed vertical-vertical brackets and finite-flow commutators
/// for the pairs with no closed form.
LieSpanReport larc(const RollingState& q, int depth, const LarcOptions& opts = {});

/// True when the curvature mismatch vanishes over a deterministic sample of
/// states; when the rolling side is smaller the transposed problem is sampled
/// too, since a mismatch can hide in the unreached directions.
bool involutivity_check(ManifoldPtr m, ManifoldPtr m_hat, int n_states);

enum class ObstructionVerdict { not_controllable, inconclusive };

/// Trap diagnosis for a smaller manifold rolling on a larger one: a declared
/// complete totally geodesic submanifold of every intermediate dimension on
/// the fixed side confines the contact point and blocks complete
/// controllability.
ObstructionVerdict totally_geodesic_obstruction(ManifoldPtr m, ManifoldPtr m_hat);

struct CodimReport {
  int dim_q = 0;
  int rank = 0;
  int codim = 0;
  int bound = 0;  // |n_hat - n| + 1
  bool within_bound = false;
  std::string note;
};

/// Codimension of the achieved span against the dimension-gap bound
/// |n_hat - n| + 1. Informational: the bound's hypothesis is not verified.
CodimReport codim_report(const LieSpanReport& r);

/// Center of a chart domain (the origin for balls).
Eigen::VectorXd domain_center(const Manifold& m);

}  // namespace rolling
