#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hadwiger/body_json.hpp"
#include "hadwiger/experiment.hpp"

using nlohmann::json;
using namespace hadwiger;

namespace {

constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// --body accepts a file path or an inline JSON object.
json read_body(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') {
    try {
      return json::parse(arg);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("--body: ") + e.what());
    }
  }
  return read_json_file(arg);
}

std::string body_name(const std::string& arg) {
  if (!arg.empty() && arg.front() == '{') return "body";
  const std::string stem = std::filesystem::path(arg).stem().string();
  return stem.empty() ? "body" : stem;
}

json auto_or_number(const std::string& value, const char* flag) {
  if (value == "auto") return "auto";
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string(flag) + ": expected auto or a number, got \"" + value + "\"");
  }
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(out, text);
  }
}

// Runs one experiment through the config path so flags get the same
// validation as config files.
int single_run(const std::string& experiment, const std::vector<std::string>& body_args,
               const json& params, std::uint64_t seed, std::optional<std::uint64_t> samples,
               const std::string& out) {
  json config{{"version", kConfigVersion}, {"seed", seed}};
  if (samples) config["samples"] = *samples;
  json bodies = json::array();
  json names = json::array();
  for (const auto& arg : body_args) {
    std::string name = body_name(arg);
    while (std::find(names.begin(), names.end(), name) != names.end()) name += "_";
    bodies.push_back(json{{"name", name}, {"spec", read_body(arg)}});
    names.push_back(name);
  }
  config["bodies"] = bodies;
  json run{{"name", experiment}, {"id", experiment}, {"params", params}};
  if (experiment != "gluskin") run["bodies"] = names;
  config["experiments"] = json::array({run});
  const ExperimentConfig parsed = parse_config(config);
  const RunResult r = execute_run(parsed.experiments.front(), parsed);
  emit(out, r.payload.dump(2) + "\n");
  if (!r.completed) std::cerr << "error: " << r.error << "\n";
  return r.invariants_ok ? 0 : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kovner-Besicovitch symmetry, sub-gaussian witnesses and covering experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::uint64_t seed = 1;
  std::optional<std::uint64_t> samples;
  std::string out;

  // run
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  auto* run = app.add_subcommand("run", "Run every experiment of a config file");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  auto* run_seed = run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--samples", samples, "Override the config sample count");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--format", format, "Table format")->check(CLI::IsMember({"json", "csv"}));

  // Single-experiment subcommands share --body/--seed/--samples/--out.
  std::vector<std::string> body_args;
  auto common = [&](CLI::App* sub, bool with_body) {
    if (with_body) sub->add_option("--body", body_args, "Body spec file or inline JSON")->required();
    sub->add_option("--seed", seed, "Seed");
    sub->add_option("--samples", samples, "Monte Carlo samples");
    sub->add_option("--out", out, "Output file (default stdout)");
  };

  std::string method = "auto";
  int restarts = 4;
  auto* dkb = app.add_subcommand("delta-kb", "Kovner-Besicovitch measure of symmetry");
  common(dkb, true);
  dkb->add_option("--method", method)->check(CLI::IsMember({"auto", "exact-2d", "mc"}));
  dkb->add_option("--restarts", restarts);

  std::string b2 = "auto", alpha = "auto";
  auto* wit = app.add_subcommand("witness", "Witness lower bound for delta_kb");
  common(wit, true);
  wit->add_option("--b2", b2, "auto or a value");
  wit->add_option("--alpha", alpha, "auto or a value");

  int directions = 10;
  std::optional<double> psi_b2;
  int trials = 200;
  double psi_alpha = 2.0;
  auto* psi = app.add_subcommand("psi2", "psi_alpha norms of marginals");
  common(psi, true);
  psi->add_option("--directions", directions, "Number of random directions");
  psi->add_option("--alpha", psi_alpha);
  psi->add_option("--b2", psi_b2, "Also estimate the fraction of directions with psi_2 <= b2");
  psi->add_option("--trials", trials, "Directions for the fraction");

  std::vector<int> dims;
  std::optional<int> m;
  int gl_trials = 100;
  auto* gl = app.add_subcommand("gluskin", "Volume scaling of random absolute convex hulls");
  common(gl, false);
  gl->add_option("--dim", dims, "Dimensions; the first one calibrates")->required();
  gl->add_option("--trials", gl_trials);
  gl->add_option("--m", m, "Number of directions (default floor(n^1.5/2), at least 2n)");

  std::optional<double> lambda, lattice, grid, verify_grid;
  auto* cov = app.add_subcommand("cover", "Greedy covering certificate");
  common(cov, true);
  cov->add_option("--lambda", lambda, "Homothety factor (default 1 - 1/n)");
  cov->add_option("--lattice", lattice, "Candidate lattice spacing");
  cov->add_option("--grid", grid, "Test grid resolution");
  cov->add_option("--verify-grid", verify_grid, "Finer verification resolution");

  std::string cert_path;
  double fine = 0.0;
  auto* ver = app.add_subcommand("verify", "Re-check a covering certificate on a finer grid");
  ver->add_option("--cert", cert_path, "Certificate JSON")->required();
  ver->add_option("--grid", fine, "Finer grid resolution")->required();
  ver->add_option("--out", out, "Output file (default stdout)");

  bool no_reduce = false;
  auto* rep = app.add_subcommand("report", "End-to-end Hadwiger report");
  common(rep, true);
  rep->add_flag("--no-reduce", no_reduce, "Skip the small-diameter reduction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (run->parsed()) {
      json config = read_json_file(config_path);
      if (!config.is_object()) throw ConfigError("$: config must be a JSON object");
      if (run_seed->count() > 0) config["seed"] = seed;
      if (samples) config["samples"] = *samples;
      if (out_dir) config["output"]["dir"] = *out_dir;
      if (format) config["output"]["format"] = *format;
      const ExperimentConfig parsed = parse_config(config);
      const ConfigOutcome outcome = run_config(parsed);
      for (const auto& r : outcome.runs) {
        std::cerr << r.id << ": " << (r.completed ? (r.invariants_ok ? "ok" : "invariant failed")
                                                  : "error: " + r.error)
                  << "\n";
      }
      return exit_status(outcome);
    }
    if (dkb->parsed()) {
      return single_run("delta-kb", body_args, json{{"method", method}, {"restarts", restarts}},
                        seed, samples, out);
    }
    if (wit->parsed()) {
      json params{{"b2", auto_or_number(b2, "--b2")}, {"alpha", auto_or_number(alpha, "--alpha")}};
      return single_run("witness", body_args, params, seed, samples, out);
    }
    if (psi->parsed()) {
      json params{{"directions", directions}, {"alpha", psi_alpha}, {"trials", trials}};
      if (psi_b2) params["b2"] = *psi_b2;
      if (samples) params["samples"] = *samples;
      return single_run("psi2", body_args, params, seed, std::nullopt, out);
    }
    if (gl->parsed()) {
      json params{{"dims", dims}, {"trials", gl_trials}};
      if (m) params["m"] = *m;
      return single_run("gluskin", {}, params, seed, std::nullopt, out);
    }
    if (cov->parsed()) {
      json params = json::object();
      if (lambda) params["lambda"] = *lambda;
      if (lattice) params["lattice"] = *lattice;
      if (grid) params["grid"] = *grid;
      if (verify_grid) params["verify_grid"] = *verify_grid;
      if (body_args.size() != 1) throw ConfigError("--body: cover takes exactly one body");
      json config{{"version", kConfigVersion},
                  {"seed", seed},
                  {"bodies", json::array({json{{"name", body_name(body_args[0])},
                                               {"spec", read_body(body_args[0])}}})},
                  {"experiments", json::array({json{{"name", "cover"}, {"id", "cover"}, {"params", params}}})}};
      const ExperimentConfig parsed = parse_config(config);
      const RunResult r = execute_run(parsed.experiments.front(), parsed);
      if (!r.completed) {
        std::cerr << "error: " << r.error << "\n";
        return kExitInvariant;
      }
      // The certificate itself is the output, so `verify` can read it back.
      emit(out, r.payload["results"][0]["certificate"].dump(2) + "\n");
      return r.invariants_ok ? 0 : kExitInvariant;
    }
    if (ver->parsed()) {
      const CoveringCertificate cert = certificate_from_json(read_json_file(cert_path));
      const CoverVerification v = verify_cover(cert, fine);
      ojson unc = ojson::array();
      for (const auto& x : v.uncovered) {
        ojson p = ojson::array();
        for (Eigen::Index i = 0; i < x.size(); ++i) p.push_back(x(i));
        unc.push_back(std::move(p));
      }
      ojson result{{"ok", v.ok},
                   {"resolution", v.resolution},
                   {"grid_points", v.grid_points},
                   {"uncovered_count", v.uncovered_count},
                   {"uncovered", std::move(unc)}};
      emit(out, result.dump(2) + "\n");
      return v.ok ? 0 : kExitInvariant;
    }
    if (rep->parsed()) {
      json params{{"reduce", !no_reduce}};
      return single_run("report", body_args, params, seed, samples, out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
