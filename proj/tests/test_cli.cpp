// Drives the rollctl binary end to end: exit codes, report contents, and
// byte-level reproducibility. The binary path and the config directory come
// from ROLLCTL_BIN and ROLLCTL_CONFIGS in the environment.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "rolling/io.hpp"

using rolling::Json;
namespace fs = std::filesystem;

namespace {

std::string env_or_die(const char* name) {
  const char* v = std::getenv(name);
  REQUIRE_MESSAGE(v != nullptr, name << " must be set");
  return v;
}

struct Workspace {
  fs::path root;
  Workspace() {
    root = fs::temp_directory_path() / ("cli_test_" + std::to_string(::getpid()));
    fs::create_directories(root);
  }
  ~Workspace() { fs::remove_all(root); }
};

int run(const std::string& args) {
  const std::string cmd = env_or_die("ROLLCTL_BIN") + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

fs::path config(const std::string& name) {
  return fs::path(env_or_die("ROLLCTL_CONFIGS")) / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), p.string() << " should exist");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Json load(const fs::path& p) { return Json::parse(slurp(p)); }

}  // namespace

TEST_CASE("roll writes a report and trajectory, and flags chart exits") {
  Workspace ws;
  const fs::path out = ws.root / "roll";
  CHECK(run("roll --config " + config("roll_sphere_on_plane.json").string() + " --out " +
            out.string()) == 0);

  const Json rep = load(out / "roll_report.json");
  CHECK(rep.at("command") == "roll");
  CHECK(rep.at("tool_version") == rolling::kToolVersion);
  CHECK(rep.at("config_hash").get<std::string>().size() == 16);
  CHECK(rep.at("diagnostics").at("max_isometry_drift").get<double>() <= 1e-6);
  CHECK(rep.at("diagnostics").at("max_no_slip_residual").get<double>() <= 1e-6);
  CHECK_FALSE(rep.at("diagnostics").at("exited").get<bool>());
  CHECK(fs::exists(out / "trajectory.csv"));

  // A control that runs off the chart is a computational failure, not a
  // configuration one.
  const Json cfg = load(config("roll_sphere_on_plane.json"));
  Json runaway = cfg;
  runaway["control"] = Json{{"type", "constant"},
                            {"u", Json::array({40.0, 0.0})},
                            {"duration", 1.0},
                            {"frame", "moving"}};
  rolling::write_json_file(ws.root / "runaway.json", runaway);
  CHECK(run("roll --config " + (ws.root / "runaway.json").string() + " --out " +
            (ws.root / "ra").string()) == 1);
}

TEST_CASE("octant roll reports the right-angle fiber rotation") {
  Workspace ws;
  const fs::path out = ws.root / "oct";
  CHECK(run("roll --config " + config("roll_octant.json").string() + " --out " + out.string()) ==
        0);
  const Json rep = load(out / "roll_report.json");
  const double angle = rep.at("holonomy_angle").get<double>();
  CHECK(std::abs(std::abs(angle) - M_PI / 2) <= 1e-3);
}

TEST_CASE("holonomy and ns-check report the catalog dimensions") {
  Workspace ws;

  const fs::path h1 = ws.root / "h1";
  CHECK(run("holonomy --config " + config("holonomy_sphere31.json").string() + " --out " +
            h1.string()) == 0);
  CHECK(load(h1 / "holonomy_report.json").at("algebra").at("basis").size() == 3);

  const fs::path n1 = ws.root / "n1";
  CHECK(run("ns-check --config " + config("ns_flat_2_on_3.json").string() + " --out " +
            n1.string()) == 0);
  const Json v1 = load(n1 / "ns_check_report.json").at("verdict");
  CHECK(v1.at("decided").get<bool>());
  CHECK_FALSE(v1.at("controllable").get<bool>());

  const fs::path n2 = ws.root / "n2";
  CHECK(run("ns-check --config " + config("ns_sphere2_on_sphere3.json").string() + " --out " +
            n2.string()) == 0);
  const Json v2 = load(n2 / "ns_check_report.json").at("verdict");
  CHECK(v2.at("decided").get<bool>());
  CHECK(v2.at("controllable").get<bool>());
  CHECK(v2.at("fiber_dim_identity") == v2.at("vertical_dimension"));
}

TEST_CASE("larc verdicts and the expect gate") {
  Workspace ws;

  const fs::path l1 = ws.root / "l1";
  CHECK(run("larc --config " + config("larc_sphere_on_plane.json").string() + " --out " +
            l1.string()) == 0);
  const Json s1 = load(l1 / "larc_report.json").at("span");
  CHECK(s1.at("rank") == 5);
  CHECK(s1.at("verdict") == "full_rank");

  const fs::path l2 = ws.root / "l2";
  CHECK(run("larc --config " + config("larc_equal_spheres.json").string() + " --out " +
            l2.string()) == 0);
  CHECK(load(l2 / "larc_report.json").at("span").at("rank") == 2);

  // The expect field turns a verdict mismatch into exit code 1.
  Json lying = load(config("larc_equal_spheres.json"));
  lying["expect"] = "full_rank";
  rolling::write_json_file(ws.root / "lying.json", lying);
  CHECK(run("larc --config " + (ws.root / "lying.json").string() + " --out " +
            (ws.root / "l3").string()) == 1);
}

TEST_CASE("dimgap commutation passes on both sides") {
  Workspace ws;
  const fs::path g1 = ws.root / "g1";
  CHECK(run("dimgap --config " + config("dimgap_target_sphere3_on_sphere2.json").string() +
            " --out " + g1.string()) == 0);
  const Json r1 = load(g1 / "dimgap_report.json");
  CHECK(r1.at("pass").get<bool>());
  CHECK(r1.at("sup_projection_mismatch").get<double>() <= 1e-6);

  const fs::path g2 = ws.root / "g2";
  CHECK(run("dimgap --config " + config("dimgap_source_sphere2_on_flat3.json").string() +
            " --out " + g2.string()) == 0);
  const Json r2 = load(g2 / "dimgap_report.json");
  CHECK(r2.at("pass").get<bool>());
  CHECK(r2.at("sup_embedding_departure").get<double>() <= 1e-6);
}

TEST_CASE("batch report runs every experiment and summarizes exit codes") {
  Workspace ws;
  const fs::path out = ws.root / "batch";
  CHECK(run("report --config " + config("batch_smoke.json").string() + " --out " +
            out.string()) == 0);
  const Json sum = load(out / "summary.json");
  REQUIRE(sum.at("runs").size() == 3);
  for (const auto& r : sum.at("runs")) CHECK(r.at("exit_code") == 0);
  CHECK(fs::exists(out / "run_0" / "holonomy_report.json"));
  CHECK(fs::exists(out / "run_1" / "rol_scan_report.json"));
  CHECK(fs::exists(out / "run_2" / "ns_check_report.json"));
}

TEST_CASE("config errors exit with code 2 and never write a report") {
  Workspace ws;

  rolling::write_text_atomic(ws.root / "broken.json", "{ not json");
  CHECK(run("roll --config " + (ws.root / "broken.json").string() + " --out " +
            (ws.root / "b1").string()) == 2);

  rolling::write_json_file(ws.root / "badkey.json",
                           Json::parse(R"({"manifold": {"kind": "sphere", "dim": 2, "radios": 1}})"));
  CHECK(run("holonomy --config " + (ws.root / "badkey.json").string() + " --out " +
            (ws.root / "b2").string()) == 2);
  CHECK_FALSE(fs::exists(ws.root / "b2" / "holonomy_report.json"));

  CHECK(run("holonomy --config " + (ws.root / "nope.json").string() + " --out " +
            (ws.root / "b3").string()) == 2);
  CHECK(run("--config x.json") == 2);  // no subcommand
}

TEST_CASE("seed override changes the hash, reruns are byte-identical") {
  Workspace ws;
  const std::string cfg = config("holonomy_sphere21.json").string();

  const fs::path a = ws.root / "a", b = ws.root / "b", c = ws.root / "c";
  CHECK(run("holonomy --config " + cfg + " --out " + a.string()) == 0);
  CHECK(run("holonomy --config " + cfg + " --out " + b.string()) == 0);
  CHECK(slurp(a / "holonomy_report.json") == slurp(b / "holonomy_report.json"));

  CHECK(run("holonomy --config " + cfg + " --seed 123 --out " + c.string()) == 0);
  const Json ra = load(a / "holonomy_report.json");
  const Json rc = load(c / "holonomy_report.json");
  CHECK(ra.at("config_hash") != rc.at("config_hash"));
  CHECK(rc.at("seed") == 123);

  // Trajectories too: the roll command must reproduce every byte.
  const fs::path ta = ws.root / "ta", tb = ws.root / "tb";
  const std::string rollcfg = config("roll_geodesic.json").string();
  CHECK(run("roll --config " + rollcfg + " --out " + ta.string()) == 0);
  CHECK(run("roll --config " + rollcfg + " --out " + tb.string()) == 0);
  CHECK(slurp(ta / "trajectory.csv") == slurp(tb / "trajectory.csv"));
  CHECK(slurp(ta / "roll_report.json") == slurp(tb / "roll_report.json"));
}
