#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rolling/controllability.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/manifold.hpp"
#include "rolling/state.hpp"

namespace rolling {

using Json = nlohmann::json;

/// Raised on any schema violation in a configuration document. The CLI maps
/// it to its configuration-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// Compact serialization with object keys in sorted order; the hashing input.
std::string canonical_json(const Json& j);

/// 16-hex-digit FNV-1a hash of the canonical serialization.
std::string config_hash_hex(const Json& config);

// Eigen <-> JSON. Vectors are arrays, matrices arrays of row arrays.
Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);
Eigen::VectorXd vector_from_json(const Json& j, const char* what);
Eigen::MatrixXd matrix_from_json(const Json& j, const char* what);

/// Manifold description:
///   {"kind":"euclidean","dim":n, ["half_width":w]}
///   {"kind":"sphere","dim":n, ["radius":r, "chart_radius_factor":f]}
///   {"kind":"hyperbolic","dim":n, ["radius":r, "ball_fraction":f]}
///   {"kind":"perturbed_euclidean","dim":n, ["amplitude":a, "half_width":w]}
///   {"kind":"warped","fiber_dim":k,"warp":"constant|linear|exponential",
///    "a":..,"b":..,"r_lo":..,"r_hi":.., ["fiber_half_width":w]}
///   {"kind":"product","factors":[ <manifold>, ... ]}
/// Unknown kinds or keys are rejected.
ManifoldPtr manifold_from_json(const Json& spec);

/// State description: explicit {"x":[..],"x_hat":[..],"A":[[..],..]} or
/// seeded {"random":{"seed":s, ["domain_fraction":f]}}.
RollingState state_from_json(const Json& spec, ManifoldPtr m, ManifoldPtr m_hat);

/// Control description:
///   {"type":"constant","u":[..],"duration":T}
///   {"type":"piecewise","breakpoints":[..],"values":[[..],..]}
///   {"type":"sampled","times":[..],"values":[[..],..]}
///   {"type":"preset","name":"sphere_octant_triangle"}
/// plus optional "frame":"moving"|"parallel" (default moving). The preset
/// drives the source point around the right-angled spherical triangle loop
/// and requires a 2-sphere source.
ControlSignal control_from_json(const Json& spec, const Manifold& m);

Json state_to_json(const RollingState& q);
Json to_json(const HolonomyAlgebra& h);
Json to_json(const NsVerdict& v);
Json to_json(const LieSpanReport& r);
Json to_json(const CodimReport& c);

/// Report scaffold shared by every command: tool_version, command, and the
/// hash of the originating configuration. Reports carry no timestamps so
/// reruns are byte-identical.
Json report_skeleton(const std::string& command, const Json& config);

/// Writes via a temporary file in the same directory plus an atomic rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

/// Two-space-indented dump with a trailing newline, written atomically.
void write_json_file(const std::filesystem::path& path, const Json& j);

Json json_from_file(const std::filesystem::path& path);

/// Plot-ready table: t, x, x_hat, row-major A, realized control, chart
/// velocities. Full round-trip precision.
void write_trajectory_csv(const std::filesystem::path& path, const RollingTrajectory& tr);

}  // namespace rolling
