#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hadwiger/body_json.hpp"
#include "hadwiger/experiment.hpp"

using namespace hadwiger;
using nlohmann::json;

namespace {

json triangle_spec() {
  return json{{"kind", "vpolytope"}, {"vertices", {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}}};
}

json base_config() {
  return json{{"version", 1},
              {"seed", 5},
              {"bodies", {{{"name", "tri"}, {"spec", triangle_spec()}},
                          {{"name", "sq"}, {"spec", {{"kind", "cube"}, {"dim", 2}}}}}},
              {"experiments", json::array()}};
}

// The message of the ConfigError thrown by parse_config, or "" if none.
std::string config_error(const json& config) {
  try {
    parse_config(config);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("hadwiger_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

json delta_run(const std::string& id = "dkb") {
  return json{{"name", "delta-kb"},
              {"id", id},
              {"bodies", {"tri"}},
              {"params", {{"samples", 200000}, {"search_samples", 20000}, {"restarts", 2}}}};
}

}  // namespace

TEST_CASE("config errors name the offending path") {
  json c = base_config();
  c["bodies"][1]["spec"]["kind"] = "dodecahedron";
  CHECK(starts_with(config_error(c), "$.bodies[1].spec"));

  c = base_config();
  c["experiments"].push_back(json{{"name", "hadwiger-proof"}});
  CHECK(starts_with(config_error(c), "$.experiments[0].name"));

  c = base_config();
  c["experiments"].push_back(json{{"name", "delta-kb"}, {"params", {{"restart", 3}}}});
  const std::string unknown = config_error(c);
  CHECK(starts_with(unknown, "$.experiments[0].params.restart"));

  c = base_config();
  c["bodies"].push_back(json{{"name", "tri"}, {"spec", triangle_spec()}});
  CHECK(starts_with(config_error(c), "$.bodies[2].name"));

  c = base_config();
  c["experiments"] = {delta_run("a"), delta_run("a")};
  CHECK(starts_with(config_error(c), "$.experiments[1].id"));

  c = base_config();
  c["experiments"] = {delta_run()};
  c["experiments"][0]["bodies"] = {"hexagon"};
  CHECK(starts_with(config_error(c), "$.experiments[0].bodies[0]"));

  c = base_config();
  c["experiments"].push_back(json{{"name", "cover"}, {"params", {{"lambda", 1.5}}}});
  CHECK(starts_with(config_error(c), "$.experiments[0].params.lambda"));

  c = base_config();
  c["version"] = 2;
  CHECK(starts_with(config_error(c), "$.version"));

  c = base_config();
  c["colour"] = "blue";
  CHECK_FALSE(config_error(c).empty());

  c = base_config();
  c["output"] = {{"format", "xml"}};
  CHECK(starts_with(config_error(c), "$.output.format"));

  CHECK(config_error(base_config()).empty());
}

TEST_CASE("defaults are filled in") {
  json c = base_config();
  c["experiments"] = {json{{"name", "delta-kb"}}, json{{"name", "gluskin"}}};
  const ExperimentConfig cfg = parse_config(c);
  REQUIRE(cfg.experiments.size() == 2);
  CHECK(cfg.experiments[0].id == "delta-kb-0");
  CHECK(cfg.experiments[0].bodies == std::vector<std::string>{"tri", "sq"});
  CHECK(cfg.experiments[0].params.at("method") == "auto");
  CHECK(cfg.experiments[0].params.at("restarts") == 4);
  CHECK(cfg.experiments[1].bodies.empty());
  CHECK(cfg.experiments[1].params.at("dims") == json({3, 4, 5, 6}));
  CHECK(cfg.seed == 5);
  CHECK(cfg.format == OutputFormat::Json);
}

TEST_CASE("a config without experiments writes only the manifest") {
  const auto dir = scratch("empty");
  json c = base_config();
  c["output"] = {{"dir", dir.string()}};
  const ConfigOutcome out = run_config(parse_config(c));
  CHECK(exit_status(out) == 0);
  CHECK(out.runs.empty());
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("runs").empty());
  CHECK(manifest.at("table").is_null());
  CHECK(manifest.at("seed") == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("delta-kb run on the triangle") {
  json c = base_config();
  c["experiments"] = {delta_run()};
  const ExperimentConfig cfg = parse_config(c);
  const RunResult r = execute_run(cfg.experiments[0], cfg);
  REQUIRE(r.completed);
  CHECK(r.invariants_ok);
  const auto& entry = r.payload.at("results").at(0);
  CHECK(entry.at("method") == "exact-2d");
  CHECK(entry.at("delta_kb").get<double>() == doctest::Approx(2.0 / 3.0).epsilon(0.01));
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].at("lower_bound") == 0.25);
  CHECK(r.rows[0].at("invariants_ok") == true);
}

TEST_CASE("failed runs are reported, not thrown") {
  json c = base_config();
  c["bodies"].push_back(json{{"name", "flat"},
                             {"spec", {{"kind", "vpolytope"}, {"vertices", {{0, 0}, {1, 0}, {2, 0}}}}}});
  c["experiments"] = {json{{"name", "delta-kb"}, {"bodies", {"flat"}}}};
  const ExperimentConfig cfg = parse_config(c);
  const RunResult r = execute_run(cfg.experiments[0], cfg);
  CHECK_FALSE(r.completed);
  CHECK_FALSE(r.invariants_ok);
  CHECK_FALSE(r.error.empty());
  CHECK(r.payload.at("completed") == false);
  ConfigOutcome o;
  o.runs.push_back(r);
  o.invariant_failure = true;
  CHECK(exit_status(o) == 1);
}

TEST_CASE("number formatting") {
  CHECK(format_number(2.0 / 3.0) == "0.666667");
  CHECK(format_number(290.280943) == "290.281");
  CHECK(format_number(1e-12) == "1e-12");
  CHECK(format_number(1234567.0) == "1.23457e+06");
  CHECK(format_number(0.25) == "0.25");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
}

TEST_CASE("table layout") {
  ojson row{{"invariants_ok", true}, {"fitted_k1", 0.123456789}, {"bound_eq20", 290.280943},
            {"kb_lb", 0.01},         {"delta_kb", 1.0},           {"body", "cube, n=3"},
            {"run_id", "report"},    {"experiment", "report"},    {"n", 3}};
  const std::string csv = emit_table({row}, OutputFormat::Csv);
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header == "run_id,experiment,body,n,delta_kb,kb_lb,fitted_k1,bound_eq20,invariants_ok");
  CHECK(csv.find("\"cube, n=3\"") != std::string::npos);
  CHECK(csv.find("0.123457") != std::string::npos);
  CHECK(csv.find("290.281") != std::string::npos);

  // the documented order does not depend on the key order of the rows
  ojson shuffled;
  for (auto it = row.rbegin(); it != row.rend(); ++it) shuffled[it.key()] = it.value();
  CHECK(emit_table({shuffled}, OutputFormat::Csv) == csv);

  const json parsed = json::parse(emit_table({row}, OutputFormat::Json));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].at("fitted_k1").get<double>() == 0.123457);
  CHECK(parsed[0].at("n") == 3);

  // rows missing a column leave the cell empty
  ojson a{{"run_id", "a"}, {"delta_kb", 0.5}};
  ojson b{{"run_id", "b"}, {"count", 4}};
  CHECK(emit_table({a, b}, OutputFormat::Csv) == "run_id,delta_kb,count\na,0.5,\nb,,4\n");

  const auto& cols = table_columns();
  for (const char* name : {"delta_kb", "kb_lb", "bound_eq20", "fitted_k1"}) {
    CHECK(std::find(cols.begin(), cols.end(), name) != cols.end());
  }
}

TEST_CASE("report rows carry the contract columns") {
  json c = base_config();
  c["experiments"] = {json{{"name", "report"},
                           {"bodies", {"sq"}},
                           {"params",
                            {{"samples", 100000},
                             {"psi_samples", 20000},
                             {"direction_trials", 100},
                             {"search_samples", 20000},
                             {"restarts", 2}}}}};
  const ExperimentConfig cfg = parse_config(c);
  const RunResult r = execute_run(cfg.experiments[0], cfg);
  REQUIRE(r.completed);
  const std::string csv = emit_table(r.rows, OutputFormat::Csv);
  const std::string header = csv.substr(0, csv.find('\n'));
  for (const char* name : {"delta_kb", "kb_lb", "bound_eq20", "fitted_k1"}) {
    CAPTURE(name);
    CHECK(header.find(name) != std::string::npos);
  }
  const auto& entry = r.payload.at("results").at(0);
  CHECK(entry.at("l_ratio").at("fitted") == true);
  CHECK(entry.at("k_radius").at("fitted") == true);
  CHECK(entry.at("witness").at("fitted_k1").at("fitted") == true);
  CHECK(entry.at("bound_eq20").at("simplified_constant").at("fitted") == true);
  CHECK(entry.at("delta_method") == "symmetric");
}

TEST_CASE("reruns are byte-identical") {
  json c = base_config();
  c["experiments"] = {delta_run(),
                      json{{"name", "cover"}, {"id", "cov"}, {"bodies", {"sq"}},
                           {"params", {{"lambda", 0.6}, {"grid", 0.05}}}}};
  const auto d1 = scratch("rerun1");
  const auto d2 = scratch("rerun2");
  c["output"] = {{"dir", d1.string()}, {"format", "csv"}};
  CHECK(exit_status(run_config(parse_config(c))) == 0);
  c["output"]["dir"] = d2.string();
  setenv("HADWIGER_WORKERS", "3", 1);
  CHECK(exit_status(run_config(parse_config(c))) == 0);
  unsetenv("HADWIGER_WORKERS");
  for (const char* f : {"dkb.json", "cov.json", "table.csv"}) {
    CAPTURE(f);
    const std::string a = slurp(d1 / f);
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(d2 / f));
  }
  // the manifest differs only in timing and environment fields
  json m1 = json::parse(slurp(d1 / "manifest.json"));
  json m2 = json::parse(slurp(d2 / "manifest.json"));
  for (auto* m : {&m1, &m2}) {
    m->erase("started_at");
    m->erase("workers");
    for (auto& r : (*m)["runs"]) r.erase("wall_seconds");
  }
  CHECK(m1 == m2);
  CHECK(m1.at("table") == "table.csv");
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("different seeds change Monte Carlo output") {
  json c = base_config();
  json run = delta_run();
  run["params"]["method"] = "mc";
  c["experiments"] = {run};
  const ExperimentConfig a = parse_config(c);
  c["seed"] = 6;
  const ExperimentConfig b = parse_config(c);
  CHECK(execute_run(a.experiments[0], a).payload.at("results") !=
        execute_run(b.experiments[0], b).payload.at("results"));
}

TEST_CASE("certificates round-trip through JSON") {
  const json spec{{"kind", "cube"}, {"dim", 2}, {"normalize_volume", true}};
  const CoveringCertificate cert = greedy_cover(body_from_json(spec), 0.6, 0.5, 0.02);
  const ojson j = certificate_to_json(cert, spec);
  const CoveringCertificate back = certificate_from_json(json::parse(j.dump()));
  CHECK(back.count == cert.count);
  CHECK(back.lambda == cert.lambda);
  CHECK(back.verified_resolution == cert.verified_resolution);
  CHECK(back.complete == cert.complete);
  REQUIRE(back.centers.size() == cert.centers.size());
  for (std::size_t i = 0; i < cert.centers.size(); ++i) CHECK(back.centers[i] == cert.centers[i]);
  CHECK(verify_cover(back, 0.01).ok);
  CHECK(certificate_to_json(back, spec).dump() == j.dump());

  json broken = json::parse(j.dump());
  broken.erase("centers");
  CHECK_THROWS(certificate_from_json(broken));
}

TEST_CASE("atomic writes leave no temporary file") {
  const auto dir = scratch("atomic");
  write_file_atomic((dir / "a" / "b.txt").string(), "first");
  write_file_atomic((dir / "a" / "b.txt").string(), "second");
  CHECK(slurp(dir / "a" / "b.txt") == "second");
  CHECK_FALSE(std::filesystem::exists(dir / "a" / "b.txt.tmp"));
  std::filesystem::remove_all(dir);
}
