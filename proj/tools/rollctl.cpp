// Command-line front end: runs rolling experiments from JSON configuration
// files and writes deterministic JSON/CSV reports.
//
// Exit codes: 0 success, 1 computational failure (chart exit, a check the
// config asserts), 2 configuration or usage error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rolling/brackets.hpp"
#include "rolling/controllability.hpp"
#include "rolling/dimgap.hpp"
#include "rolling/dynamics.hpp"
#include "rolling/io.hpp"
#include "rolling/manifold.hpp"
#include "rolling/rng.hpp"
#include "rolling/state.hpp"
#include "rolling/transport.hpp"

namespace fs = std::filesystem;
using rolling::Json;

namespace {

constexpr int kOk = 0, kComputeError = 1, kConfigError = 2;

struct CliOverrides {
  std::optional<std::int64_t> seed;
  std::optional<double> step;
  std::optional<int> depth;
};

struct Common {
  Json config;
  fs::path out_dir;
};

/// Applies --seed/--step/--depth on top of the file values, so the effective
/// configuration (the one hashed into the report) reflects what actually ran.
Json effective_config(Json config, const CliOverrides& ov) {
  if (ov.seed) config["seed"] = *ov.seed;
  if (ov.step) config["step"] = *ov.step;
  if (ov.depth) config["depth"] = *ov.depth;
  return config;
}

void require_keys(const Json& obj, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (!obj.contains(k)) throw rolling::ConfigError(std::string("config: missing \"") + k + "\"");
}

rolling::ManifoldPtr manifold_field(const Json& cfg, const char* key) {
  require_keys(cfg, {key});
  return rolling::manifold_from_json(cfg.at(key));
}

std::uint64_t seed_field(const Json& cfg) {
  if (!cfg.contains("seed") || !cfg["seed"].is_number_integer())
    throw rolling::ConfigError("config: integer \"seed\" is required");
  return static_cast<std::uint64_t>(cfg["seed"].get<std::int64_t>());
}

double step_field(const Json& cfg) {
  const double s = cfg.contains("step") ? cfg["step"].get<double>() : 1e-3;
  if (!(s > 0.0 && s <= 0.1)) throw rolling::ConfigError("config: step must be in (0, 0.1]");
  return s;
}

/// Rotation angle of the fiber change for planar square states.
double fiber_angle(const rolling::RollingState& q0, const rolling::RollingState& q1) {
  const Eigen::MatrixXd rel = q1.A * q0.A.transpose();
  return std::atan2(rel(1, 0), rel(0, 0));
}

int cmd_roll(const Common& c) {
  const Json& cfg = c.config;
  require_keys(cfg, {"manifold", "manifold_hat", "state", "control"});
  const auto m = manifold_field(cfg, "manifold");
  const auto mh = manifold_field(cfg, "manifold_hat");
  const auto q0 = rolling::state_from_json(cfg.at("state"), m, mh);
  const auto ctrl = rolling::control_from_json(cfg.at("control"), *m);
  const double step = step_field(cfg);

  const rolling::RollingTrajectory tr = rolling::roll(q0, ctrl, step);

  Json rep = rolling::report_skeleton("roll", cfg);
  rep["step"] = step;
  rep["samples"] = tr.size();
  rep["initial_state"] = rolling::state_to_json(q0);
  rep["final_state"] = rolling::state_to_json(tr.final_state());
  rep["diagnostics"] = Json{{"max_isometry_drift", tr.max_isometry_drift},
                            {"max_no_slip_residual", tr.max_no_slip_residual},
                            {"no_spin_residual", rolling::no_spin_residual(tr)},
                            {"exited", tr.exited},
                            {"exit_time", tr.exit_time}};
  if (q0.n() == 2 && q0.n_hat() == 2)
    rep["holonomy_angle"] = fiber_angle(q0, tr.final_state());

  rolling::write_trajectory_csv(c.out_dir / "trajectory.csv", tr);
  rolling::write_json_file(c.out_dir / "roll_report.json", rep);
  return tr.exited ? kComputeError : kOk;
}

int cmd_holonomy(const Common& c) {
  const Json& cfg = c.config;
  require_keys(cfg, {"manifold"});
  const auto m = manifold_field(cfg, "manifold");
  const std::uint64_t seed = seed_field(cfg);
  const int samples = cfg.contains("samples") ? cfg["samples"].get<int>() : 200;
  const Eigen::VectorXd x = cfg.contains("x")
                                ? rolling::vector_from_json(cfg["x"], "config.x")
                                : rolling::domain_center(*m);

  const rolling::HolonomyAlgebra h =
      rolling::holonomy_algebra(m, x, samples, static_cast<unsigned>(seed));

  Json rep = rolling::report_skeleton("holonomy", cfg);
  rep["seed"] = static_cast<std::int64_t>(seed);
  rep["samples"] = samples;
  rep["algebra"] = rolling::to_json(h);
  rolling::write_json_file(c.out_dir / "holonomy_report.json", rep);
  return kOk;
}

int cmd_ns_check(const Common& c) {
  const Json& cfg = c.config;
  const auto m = manifold_field(cfg, "manifold");
  const auto mh = manifold_field(cfg, "manifold_hat");
  const std::uint64_t seed = seed_field(cfg);
  const int samples = cfg.contains("samples") ? cfg["samples"].get<int>() : 200;

  const rolling::NsVerdict v =
      rolling::ns_controllable(m, mh, samples, static_cast<unsigned>(seed));

  Json rep = rolling::report_skeleton("ns-check", cfg);
  rep["seed"] = static_cast<std::int64_t>(seed);
  rep["samples"] = samples;
  rep["verdict"] = rolling::to_json(v);
  rolling::write_json_file(c.out_dir / "ns_check_report.json", rep);
  return kOk;
}

int cmd_larc(const Common& c) {
  const Json& cfg = c.config;
  require_keys(cfg, {"manifold", "manifold_hat", "state"});
  const auto m = manifold_field(cfg, "manifold");
  const auto mh = manifold_field(cfg, "manifold_hat");
  const auto q = rolling::state_from_json(cfg.at("state"), m, mh);
  const int depth = cfg.contains("depth") ? cfg["depth"].get<int>() : 4;

  rolling::LarcOptions opts;
  if (cfg.contains("seed")) opts.seed = static_cast<unsigned>(seed_field(cfg));
  if (cfg.contains("oracle_step")) opts.oracle_step = cfg["oracle_step"].get<double>();

  const rolling::LieSpanReport rep = rolling::larc(q, depth, opts);

  Json out = rolling::report_skeleton("larc", cfg);
  out["depth"] = depth;
  out["span"] = rolling::to_json(rep);
  out["codim"] = rolling::to_json(rolling::codim_report(rep));
  rolling::write_json_file(c.out_dir / "larc_report.json", out);

  if (cfg.contains("expect") && cfg["expect"].is_string()) {
    const std::string want = cfg["expect"].get<std::string>();
    const bool full = rep.verdict == rolling::SpanVerdict::full_rank;
    if ((want == "full_rank") != full) return kComputeError;
  }
  return kOk;
}

int cmd_rol_scan(const Common& c) {
  const Json& cfg = c.config;
  const auto m = manifold_field(cfg, "manifold");
  const auto mh = manifold_field(cfg, "manifold_hat");
  const std::uint64_t seed = seed_field(cfg);
  const int n_states = cfg.contains("states") ? cfg["states"].get<int>() : 100;

  rolling::Rng rng(seed);
  const int n = m->dim();
  double max_norm = 0.0, sum_norm = 0.0;
  int count = 0;
  for (int s = 0; s < n_states; ++s) {
    const rolling::RollingState q = rolling::random_state(m, mh, rng, 0.35);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double f = rolling::rolling_curvature(q, Eigen::VectorXd::Unit(n, i),
                                                    Eigen::VectorXd::Unit(n, j))
                             .norm();
        max_norm = std::max(max_norm, f);
        sum_norm += f;
        ++count;
      }
  }

  Json rep = rolling::report_skeleton("rol-scan", cfg);
  rep["seed"] = static_cast<std::int64_t>(seed);
  rep["states"] = n_states;
  rep["pairs_per_state"] = n * (n - 1) / 2;
  rep["max_norm"] = max_norm;
  rep["mean_norm"] = count ? sum_norm / count : 0.0;
  rolling::write_json_file(c.out_dir / "rol_scan_report.json", rep);
  return kOk;
}

int cmd_dimgap(const Common& c) {
  const Json& cfg = c.config;
  require_keys(cfg, {"manifold", "manifold_hat", "state", "control", "side"});
  const auto m = manifold_field(cfg, "manifold");
  const auto mh = manifold_field(cfg, "manifold_hat");
  const auto q0 = rolling::state_from_json(cfg.at("state"), m, mh);
  const double step = step_field(cfg);
  const double offset = cfg.contains("offset") ? cfg["offset"].get<double>() : 0.0;
  const double tol = cfg.contains("tolerance") ? cfg["tolerance"].get<double>() : 1e-6;
  const std::string side = cfg["side"].get<std::string>();

  double sup_commute = 0.0, sup_stay = 0.0;
  std::size_t samples = 0;
  if (side == "target") {
    const auto ctrl = rolling::control_from_json(cfg.at("control"), *m);
    const rolling::RollingState q10 = rolling::lift_target(q0, offset);
    const rolling::RollingTrajectory base = rolling::roll(q0, ctrl, step);
    const rolling::RollingTrajectory lifted = rolling::roll(q10, ctrl, step);
    if (base.exited || lifted.exited) return kComputeError;
    samples = std::min(base.size(), lifted.size());
    for (std::size_t k = 0; k < samples; ++k) {
      const rolling::RollingState pk = rolling::project_target(lifted.state_at(k));
      const rolling::RollingState bk = base.state_at(k);
      sup_commute = std::max(sup_commute, (pk.x - bk.x).norm() + (pk.x_hat - bk.x_hat).norm() +
                                              (pk.A - bk.A).norm());
    }
  } else if (side == "source") {
    // Tangential control: the same spec with a zero line component prepended,
    // padded at the JSON level so both runs integrate identical values.
    Json padded = cfg.at("control");
    const auto pad = [](Json& arr) { arr.insert(arr.begin(), 0.0); };
    if (padded.contains("u"))
      pad(padded["u"]);
    else if (padded.contains("values"))
      for (auto& v : padded["values"]) pad(v);
    else
      throw rolling::ConfigError("dimgap source: control must list values explicitly");
    const rolling::RollingState q10 = rolling::lift_source(q0, offset);
    const auto base_ctrl = rolling::control_from_json(cfg.at("control"), *m);
    const auto lifted_ctrl = rolling::control_from_json(padded, *q10.m);
    const rolling::RollingTrajectory base = rolling::roll(q0, base_ctrl, step);
    const rolling::RollingTrajectory lifted = rolling::roll(q10, lifted_ctrl, step);
    if (base.exited || lifted.exited) return kComputeError;
    samples = std::min(base.size(), lifted.size());
    for (std::size_t k = 0; k < samples; ++k) {
      const rolling::RollingState qk = lifted.state_at(k);
      const rolling::RollingState pk = rolling::project_source(qk);
      const rolling::RollingState bk = base.state_at(k);
      const rolling::RollingState relift = rolling::lift_source(pk, qk.x(0));
      sup_stay = std::max(sup_stay, (relift.A - qk.A).norm() + std::abs(qk.x(0) - offset));
      sup_commute = std::max(sup_commute, (pk.x - bk.x).norm() + (pk.x_hat - bk.x_hat).norm() +
                                              (pk.A - bk.A).norm());
    }
  } else {
    throw rolling::ConfigError("config: side must be \"target\" or \"source\"");
  }

  Json rep = rolling::report_skeleton("dimgap", cfg);
  rep["side"] = side;
  rep["offset"] = offset;
  rep["step"] = step;
  rep["samples"] = samples;
  rep["tolerance"] = tol;
  rep["sup_projection_mismatch"] = sup_commute;
  if (side == "source") rep["sup_embedding_departure"] = sup_stay;
  const bool pass = sup_commute <= tol && sup_stay <= tol;
  rep["pass"] = pass;
  rolling::write_json_file(c.out_dir / "dimgap_report.json", rep);
  return pass ? kOk : kComputeError;
}

int cmd_report(const Common& c) {
  const Json& cfg = c.config;
  require_keys(cfg, {"experiments"});
  if (!cfg["experiments"].is_array())
    throw rolling::ConfigError("config: experiments must be an array");

  Json summary = rolling::report_skeleton("report", cfg);
  summary["runs"] = Json::array();
  int worst = kOk;
  int idx = 0;
  for (const auto& entry : cfg["experiments"]) {
    require_keys(entry, {"command", "config"});
    const std::string name = entry["command"].get<std::string>();
    const fs::path sub = c.out_dir / ("run_" + std::to_string(idx));
    fs::create_directories(sub);
    const Common inner{entry["config"], sub};
    int code = kConfigError;
    if (name == "roll")
      code = cmd_roll(inner);
    else if (name == "holonomy")
      code = cmd_holonomy(inner);
    else if (name == "ns-check")
      code = cmd_ns_check(inner);
    else if (name == "larc")
      code = cmd_larc(inner);
    else if (name == "rol-scan")
      code = cmd_rol_scan(inner);
    else if (name == "dimgap")
      code = cmd_dimgap(inner);
    else
      throw rolling::ConfigError("report: unknown command \"" + name + "\"");
    summary["runs"].push_back(Json{{"command", name},
                                   {"directory", sub.filename().string()},
                                   {"exit_code", code}});
    worst = std::max(worst, code);
    ++idx;
  }
  rolling::write_json_file(c.out_dir / "summary.json", summary);
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rolling-manifold experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  CliOverrides ov;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", ov.seed, "override the config seed");
    sub->add_option("--step", ov.step, "override the integration step");
    sub->add_option("--depth", ov.depth, "override the bracket depth");
  };

  CLI::App* roll = app.add_subcommand("roll", "integrate a rolling trajectory");
  CLI::App* larc = app.add_subcommand("larc", "bracket-generation rank report");
  CLI::App* holo = app.add_subcommand("holonomy", "sampled holonomy algebra");
  CLI::App* ns = app.add_subcommand("ns-check", "no-spin controllability verdict");
  CLI::App* rol = app.add_subcommand("rol-scan", "curvature-mismatch norm statistics");
  CLI::App* gap = app.add_subcommand("dimgap", "dimension-gap commutation checks");
  CLI::App* rpt = app.add_subcommand("report", "run a batch of experiments");
  for (CLI::App* sub : {roll, larc, holo, ns, rol, gap, rpt}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? kConfigError : kOk;
  }

  try {
    Common c{effective_config(rolling::json_from_file(config_path), ov), fs::path(out_dir)};
    fs::create_directories(c.out_dir);
    if (roll->parsed()) return cmd_roll(c);
    if (larc->parsed()) return cmd_larc(c);
    if (holo->parsed()) return cmd_holonomy(c);
    if (ns->parsed()) return cmd_ns_check(c);
    if (rol->parsed()) return cmd_rol_scan(c);
    if (gap->parsed()) return cmd_dimgap(c);
    if (rpt->parsed()) return cmd_report(c);
    std::cerr << "no command selected\n";
    return kConfigError;
  } catch (const rolling::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const rolling::DomainExitError& e) {
    std::cerr << "chart exit: " << e.what() << "\n";
    return kComputeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
