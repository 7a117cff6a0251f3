#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "rolling/dynamics.hpp"
#include "rolling/io.hpp"
#include "rolling/manifold.hpp"
#include "rolling/state.hpp"

using namespace rolling;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("io_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("hashing is canonical and matches the published constants") {
  // Reference values of the 64-bit FNV-1a function on standard inputs.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);

  const Json a = Json::parse(R"({"b": 1, "a": [1.5, 2]})");
  const Json b = Json::parse(R"({"a": [1.5, 2], "b": 1})");
  CHECK(canonical_json(a) == canonical_json(b));
  CHECK(config_hash_hex(a) == config_hash_hex(b));
  CHECK(config_hash_hex(a).size() == 16);

  Json c = a;
  c["b"] = 2;
  CHECK(config_hash_hex(c) != config_hash_hex(a));
}

TEST_CASE("vector and matrix json round trips") {
  Eigen::VectorXd v(3);
  v << 0.25, -1.0, 3.5;
  CHECK(vector_from_json(to_json(v), "t") == v);

  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  CHECK(matrix_from_json(to_json(m), "t") == m);

  CHECK_THROWS_AS(vector_from_json(Json::parse("[1, \"x\"]"), "t"), ConfigError);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2], [3]]"), "t"), ConfigError);
}

TEST_CASE("manifold parsing covers the catalog and rejects bad specs") {
  const auto sph = manifold_from_json(Json::parse(R"({"kind": "sphere", "dim": 2, "radius": 2.0})"));
  CHECK(sph->dim() == 2);
  REQUIRE(sph->constant_curvature().has_value());
  CHECK(*sph->constant_curvature() == doctest::Approx(0.25));

  const auto eu = manifold_from_json(Json::parse(R"({"kind": "euclidean", "dim": 3})"));
  CHECK(eu->dim() == 3);
  CHECK(*eu->constant_curvature() == 0.0);

  const auto hyp =
      manifold_from_json(Json::parse(R"({"kind": "hyperbolic", "dim": 2, "radius": 1.0})"));
  CHECK(*hyp->constant_curvature() == doctest::Approx(-1.0));

  const auto pert = manifold_from_json(
      Json::parse(R"({"kind": "perturbed_euclidean", "dim": 3, "amplitude": 0.05})"));
  CHECK(pert->dim() == 3);
  CHECK_FALSE(pert->constant_curvature().has_value());

  const auto warped = manifold_from_json(Json::parse(
      R"({"kind": "warped", "fiber_dim": 2, "warp": "exponential", "a": 1.0, "b": 0.5,
          "r_lo": -1.0, "r_hi": 1.0})"));
  CHECK(warped->dim() == 3);

  const auto prod = manifold_from_json(Json::parse(
      R"({"kind": "product", "factors": [{"kind": "sphere", "dim": 2}, {"kind": "euclidean", "dim": 1}]})"));
  CHECK(prod->dim() == 3);
  CHECK(prod->factors().size() == 2);

  CHECK_THROWS_AS(manifold_from_json(Json::parse(R"({"kind": "torus", "dim": 2})")), ConfigError);
  CHECK_THROWS_AS(manifold_from_json(Json::parse(R"({"kind": "sphere"})")), ConfigError);
  CHECK_THROWS_AS(manifold_from_json(Json::parse(R"({"kind": "sphere", "dim": 2, "rad": 1.0})")),
                  ConfigError);
}

TEST_CASE("state parsing: explicit values, seeded random, validation") {
  const auto m = make_sphere(2);
  const auto mh = make_euclidean(2);

  const Json explicit_spec = Json::parse(
      R"({"x": [0.1, -0.2], "x_hat": [0.0, 0.3], "A": [[0.0, -1.0], [1.0, 0.0]]})");
  const RollingState q = state_from_json(explicit_spec, m, mh);
  CHECK(q.x(0) == 0.1);
  CHECK(q.A(0, 1) == -1.0);

  // A far from any isometry must be rejected.
  const Json bad = Json::parse(R"({"x": [0.1, -0.2], "x_hat": [0.0, 0.3], "A": [[2.0, 0.0], [0.0, 1.0]]})");
  CHECK_THROWS_AS(state_from_json(bad, m, mh), ConfigError);

  const Json rnd = Json::parse(R"({"random": {"seed": 11, "domain_fraction": 0.3}})");
  const RollingState r1 = state_from_json(rnd, m, mh);
  const RollingState r2 = state_from_json(rnd, m, mh);
  CHECK(r1.x == r2.x);
  CHECK(r1.x_hat == r2.x_hat);
  CHECK(r1.A == r2.A);
  CHECK(state_defect(r1) <= 1e-12);

  CHECK_THROWS_AS(state_from_json(Json::parse(R"({"x": [0.1, -0.2]})"), m, mh), ConfigError);
}

TEST_CASE("control parsing: the three explicit types and the octant preset") {
  const auto m = make_sphere(2);

  const Json cj = Json::parse(
      R"({"type": "constant", "u": [0.6, 0.3], "duration": 1.5, "frame": "parallel"})");
  const ControlSignal c = control_from_json(cj, *m);
  CHECK(c.duration() == 1.5);
  CHECK(c.frame() == ControlSignal::Frame::Parallel);
  CHECK(c.value(0.7)(0) == 0.6);

  const Json pj = Json::parse(
      R"({"type": "piecewise", "breakpoints": [0.0, 0.5, 1.0], "values": [[1.0, 0.0], [0.0, 1.0]]})");
  const ControlSignal p = control_from_json(pj, *m);
  CHECK(p.value(0.25)(0) == 1.0);
  CHECK(p.value(0.75)(1) == 1.0);

  const Json oj = Json::parse(R"({"type": "preset", "name": "sphere_octant_triangle"})");
  const ControlSignal oct = control_from_json(oj, *m);
  // Three quarter-circle edges on the unit sphere.
  CHECK(oct.duration() == doctest::Approx(1.5 * M_PI).epsilon(1e-9));
  CHECK(oct.value(0.1).norm() == doctest::Approx(1.0).epsilon(1e-3));

  const auto flat = make_euclidean(2);
  CHECK_THROWS_AS(control_from_json(oj, *flat), ConfigError);
  CHECK_THROWS_AS(control_from_json(Json::parse(R"({"type": "sinusoid"})"), *m), ConfigError);
}

TEST_CASE("report skeleton pins version and config hash, no clock fields") {
  const Json cfg = Json::parse(R"({"seed": 1, "manifold": {"kind": "euclidean", "dim": 2}})");
  const Json r1 = report_skeleton("roll", cfg);
  const Json r2 = report_skeleton("roll", cfg);
  CHECK(r1 == r2);
  CHECK(r1.at("command") == "roll");
  CHECK(r1.at("tool_version") == kToolVersion);
  CHECK(r1.at("config_hash") == config_hash_hex(cfg));
  for (const auto& [key, value] : r1.items()) {
    (void)value;
    CHECK(key.find("time") == std::string::npos);
    CHECK(key.find("date") == std::string::npos);
  }
}

TEST_CASE("json and csv files round trip through disk") {
  TempDir tmp;

  const Json j = Json::parse(R"({"a": [1.0, 2.5], "b": "text"})");
  write_json_file(tmp.path / "x.json", j);
  CHECK(json_from_file(tmp.path / "x.json") == j);

  std::ifstream in(tmp.path / "x.json", std::ios::binary);
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(raw.back() == '\n');

  const auto m = make_sphere(2);
  const auto mh = make_euclidean(2);
  Eigen::VectorXd x0(2), xh0(2);
  x0 << 0.1, -0.2;
  xh0 << 0.0, 0.0;
  const RollingState q0{m, mh, x0, xh0, Eigen::MatrixXd::Identity(2, 2)};
  const auto tr = roll(q0, ControlSignal::constant(Eigen::Vector2d(0.5, 0.2), 0.05), 1e-3);
  write_trajectory_csv(tmp.path / "t.csv", tr);

  std::ifstream csv(tmp.path / "t.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header.substr(0, 2) == "t,");
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  CHECK(rows == tr.size());

  CHECK_THROWS(json_from_file(tmp.path / "missing.json"));
}
