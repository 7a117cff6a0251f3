#include "rolling/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rolling/rng.hpp"
#include "rolling/transport.hpp"

namespace rolling {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

/// Strict-schema helper: every present key must be known.
void check_keys(const Json& obj, const char* what, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(std::string(what) + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      fail(std::string(what) + ": unknown key \"" + item.key() + "\"");
}

double num_or(const Json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(std::string(key) + ": expected a number");
  return obj[key].get<double>();
}

int int_field(const Json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_number_integer())
    fail(std::string(key) + ": required integer field");
  return obj[key].get<int>();
}

std::string str_field(const Json& obj, const char* key) {
  if (!obj.contains(key) || !obj[key].is_string())
    fail(std::string(key) + ": required string field");
  return obj[key].get<std::string>();
}

ControlSignal::Frame frame_of(const Json& spec) {
  const std::string f =
      spec.contains("frame") ? str_field(spec, "frame") : std::string("moving");
  if (f == "moving") return ControlSignal::Frame::Moving;
  if (f == "parallel") return ControlSignal::Frame::Parallel;
  fail("frame: expected \"moving\" or \"parallel\"");
}

std::vector<Eigen::VectorXd> vector_list(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(std::string(what) + ": expected a nonempty array");
  std::vector<Eigen::VectorXd> out;
  for (const auto& row : j) out.push_back(vector_from_json(row, what));
  return out;
}

std::vector<double> double_list(const Json& j, const char* what) {
  if (!j.is_array()) fail(std::string(what) + ": expected an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(std::string(what) + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string canonical_json(const Json& j) { return j.dump(); }

std::string config_hash_hex(const Json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(canonical_json(config)));
  return std::string(buf);
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(to_json(Eigen::VectorXd(m.row(i))));
  return rows;
}

Eigen::VectorXd vector_from_json(const Json& j, const char* what) {
  if (!j.is_array() || j.empty()) fail(std::string(what) + ": expected a nonempty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(std::string(what) + ": expected numbers");
    v(static_cast<int>(i)) = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const char* what) {
  const auto rows = vector_list(j, what);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) fail(std::string(what) + ": ragged rows");
    m.row(static_cast<int>(i)) = rows[i];
  }
  return m;
}

ManifoldPtr manifold_from_json(const Json& spec) {
  if (!spec.is_object()) fail("manifold: expected an object");
  const std::string kind = str_field(spec, "kind");
  if (kind == "euclidean") {
    check_keys(spec, "euclidean", {"kind", "dim", "half_width"});
    return make_euclidean(int_field(spec, "dim"), num_or(spec, "half_width", 50.0));
  }
  if (kind == "sphere") {
    check_keys(spec, "sphere", {"kind", "dim", "radius", "chart_radius_factor"});
    return make_sphere(int_field(spec, "dim"), num_or(spec, "radius", 1.0),
                       num_or(spec, "chart_radius_factor", 8.0));
  }
  if (kind == "hyperbolic") {
    check_keys(spec, "hyperbolic", {"kind", "dim", "radius", "ball_fraction"});
    return make_hyperbolic(int_field(spec, "dim"), num_or(spec, "radius", 1.0),
                           num_or(spec, "ball_fraction", 0.995));
  }
  if (kind == "perturbed_euclidean") {
    check_keys(spec, "perturbed_euclidean", {"kind", "dim", "amplitude", "half_width"});
    return make_perturbed_euclidean(int_field(spec, "dim"), num_or(spec, "amplitude", 0.05),
                                    num_or(spec, "half_width", 1.5));
  }
  if (kind == "warped") {
    check_keys(spec, "warped",
               {"kind", "fiber_dim", "warp", "a", "b", "r_lo", "r_hi", "fiber_half_width"});
    const std::string w = str_field(spec, "warp");
    WarpKind wk;
    if (w == "constant")
      wk = WarpKind::Constant;
    else if (w == "linear")
      wk = WarpKind::Linear;
    else if (w == "exponential")
      wk = WarpKind::Exponential;
    else
      fail("warp: expected constant|linear|exponential");
    if (!spec.contains("a") || !spec.contains("b") || !spec.contains("r_lo") ||
        !spec.contains("r_hi"))
      fail("warped: a, b, r_lo, r_hi are required");
    return make_warped(int_field(spec, "fiber_dim"), wk, num_or(spec, "a", 0.0),
                       num_or(spec, "b", 0.0), num_or(spec, "r_lo", 0.0),
                       num_or(spec, "r_hi", 0.0), num_or(spec, "fiber_half_width", 5.0));
  }
  if (kind == "product") {
    check_keys(spec, "product", {"kind", "factors"});
    if (!spec.contains("factors") || !spec["factors"].is_array() || spec["factors"].size() < 2)
      fail("product: needs an array of at least two factors");
    std::vector<ManifoldPtr> fs;
    for (const auto& f : spec["factors"]) fs.push_back(manifold_from_json(f));
    return make_product(std::move(fs));
  }
  fail("manifold kind \"" + kind + "\" is not recognized");
}

RollingState state_from_json(const Json& spec, ManifoldPtr m, ManifoldPtr m_hat) {
  if (!spec.is_object()) fail("state: expected an object");
  if (spec.contains("random")) {
    check_keys(spec, "state", {"random"});
    const Json& r = spec["random"];
    check_keys(r, "state.random", {"seed", "domain_fraction"});
    if (!r.contains("seed")) fail("state.random: seed is required");
    Rng rng(static_cast<std::uint64_t>(r["seed"].get<std::int64_t>()));
    return random_state(std::move(m), std::move(m_hat), rng,
                        num_or(r, "domain_fraction", 0.4));
  }
  check_keys(spec, "state", {"x", "x_hat", "A"});
  if (!spec.contains("x") || !spec.contains("x_hat") || !spec.contains("A"))
    fail("state: x, x_hat, A are required (or use \"random\")");
  try {
    return make_state(std::move(m), std::move(m_hat), vector_from_json(spec["x"], "state.x"),
                      vector_from_json(spec["x_hat"], "state.x_hat"),
                      matrix_from_json(spec["A"], "state.A"));
  } catch (const std::invalid_argument& e) {
    fail(std::string("state: ") + e.what());
  }
}

ControlSignal control_from_json(const Json& spec, const Manifold& m) {
  if (!spec.is_object()) fail("control: expected an object");
  const std::string type = str_field(spec, "type");
  if (type == "constant") {
    check_keys(spec, "control", {"type", "u", "duration", "frame"});
    if (!spec.contains("u") || !spec.contains("duration"))
      fail("control: constant needs u and duration");
    return ControlSignal::constant(vector_from_json(spec["u"], "control.u"),
                                   spec["duration"].get<double>(), frame_of(spec));
  }
  if (type == "piecewise") {
    check_keys(spec, "control", {"type", "breakpoints", "values", "frame"});
    if (!spec.contains("breakpoints") || !spec.contains("values"))
      fail("control: piecewise needs breakpoints and values");
    return ControlSignal::piecewise(double_list(spec["breakpoints"], "control.breakpoints"),
                                    vector_list(spec["values"], "control.values"),
                                    frame_of(spec));
  }
  if (type == "sampled") {
    check_keys(spec, "control", {"type", "times", "values", "frame"});
    if (!spec.contains("times") || !spec.contains("values"))
      fail("control: sampled needs times and values");
    return ControlSignal::sampled(double_list(spec["times"], "control.times"),
                                  vector_list(spec["values"], "control.values"),
                                  frame_of(spec));
  }
  if (type == "preset") {
    check_keys(spec, "control", {"type", "name"});
    const std::string name = str_field(spec, "name");
    if (name == "sphere_octant_triangle") {
      const auto k = m.constant_curvature();
      if (m.dim() != 2 || !k || *k <= 0.0)
        fail("control preset sphere_octant_triangle: source must be a 2-sphere");
      const double radius = 1.0 / std::sqrt(*k);
      const PathSpec loop = make_sphere_octant_loop(radius);
      std::vector<double> ts;
      std::vector<Eigen::VectorXd> us;
      // Dense enough that interpolating across the three velocity corners
      // does not visibly break the loop closure of the integrated path.
      const int samples = 24000;
      for (int i = 0; i <= samples; ++i) {
        const double t = loop.duration() * i / samples;
        ts.push_back(t);
        us.push_back(m.to_frame(loop.position(t), loop.velocity(t)));
      }
      return ControlSignal::sampled(std::move(ts), std::move(us));
    }
    fail("control preset \"" + name + "\" is not recognized");
  }
  fail("control type \"" + type + "\" is not recognized");
}

Json state_to_json(const RollingState& q) {
  return Json{{"x", to_json(q.x)},
              {"x_hat", to_json(q.x_hat)},
              {"A", to_json(q.A)},
              {"m", q.m->describe()},
              {"m_hat", q.m_hat->describe()}};
}

Json to_json(const HolonomyAlgebra& h) {
  Json basis = Json::array();
  for (const auto& b : h.basis) basis.push_back(to_json(b));
  Json prov = Json::array();
  for (const auto& p : h.provenance) prov.push_back(p);
  return Json{{"x", to_json(h.x)},           {"dim", h.dim()},
              {"basis", std::move(basis)},   {"provenance", std::move(prov)},
              {"samples_used", h.samples_used}, {"samples_skipped", h.samples_skipped}};
}

Json to_json(const NsVerdict& v) {
  return Json{{"decided", v.decided},
              {"controllable", v.controllable},
              {"fiber_dim_identity", v.fiber_dim_identity},
              {"vertical_dimension", v.vertical_dimension},
              {"holonomy_dim", v.h.dim()},
              {"holonomy_dim_target", v.h_hat.dim()},
              {"probe_dims", v.probe_dims},
              {"note", v.note}};
}

Json to_json(const LieSpanReport& r) {
  Json sv = Json::array();
  for (const double s : r.singular_values) sv.push_back(s);
  return Json{{"state", state_to_json(r.q)},
              {"depth", r.depth},
              {"rank", r.rank()},
              {"rank_per_depth", r.rank_per_depth},
              {"generators_per_depth", r.generators_per_depth},
              {"verdict", r.verdict == SpanVerdict::full_rank ? "full_rank" : "rank_deficient"},
              {"state_space_dim", state_dim(r.q.n(), r.q.n_hat())},
              {"singular_values", std::move(sv)},
              {"rank_tolerance", r.rank_tol},
              {"oracle_checked", r.oracle_checked},
              {"oracle_failed", r.oracle_failed},
              {"oracle_rejected", r.oracle_rejected}};
}

Json to_json(const CodimReport& c) {
  return Json{{"state_space_dim", c.dim_q}, {"rank", c.rank},
              {"codim", c.codim},           {"gap_bound", c.bound},
              {"within_bound", c.within_bound}, {"note", c.note}};
}

Json report_skeleton(const std::string& command, const Json& config) {
  return Json{{"tool_version", kToolVersion},
              {"command", command},
              {"config_hash", config_hash_hex(config)}};
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_file(const std::filesystem::path& path, const Json& j) {
  write_text_atomic(path, j.dump(2) + "\n");
}

Json json_from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(path.string() + ": " + e.what());
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const RollingTrajectory& tr) {
  const int n = tr.m ? tr.m->dim() : (tr.x.empty() ? 0 : static_cast<int>(tr.x[0].size()));
  const int nh =
      tr.m_hat ? tr.m_hat->dim() : (tr.x_hat.empty() ? 0 : static_cast<int>(tr.x_hat[0].size()));
  std::ostringstream out;
  out << "t";
  for (int i = 0; i < n; ++i) out << ",x" << i;
  for (int i = 0; i < nh; ++i) out << ",xhat" << i;
  for (int i = 0; i < nh; ++i)
    for (int j = 0; j < n; ++j) out << ",A" << i << j;
  for (int i = 0; i < n; ++i) out << ",u" << i;
  for (int i = 0; i < n; ++i) out << ",xdot" << i;
  for (int i = 0; i < nh; ++i) out << ",xhatdot" << i;
  out << "\n";
  char buf[32];
  const auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (std::size_t k = 0; k < tr.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", tr.t[k]);
    out << buf;
    for (int i = 0; i < n; ++i) put(tr.x[k](i));
    for (int i = 0; i < nh; ++i) put(tr.x_hat[k](i));
    for (int i = 0; i < nh; ++i)
      for (int j = 0; j < n; ++j) put(tr.R[k](i, j));
    for (int i = 0; i < n; ++i) put(tr.u[k](i));
    for (int i = 0; i < n; ++i) put(tr.x_dot[k](i));
    for (int i = 0; i < nh; ++i) put(tr.x_hat_dot[k](i));
    out << "\n";
  }
  write_text_atomic(path, out.str());
}

}  // namespace rolling
