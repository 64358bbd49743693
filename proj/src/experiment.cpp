#include "hadwiger/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "hadwiger/body_json.hpp"
#include "hadwiger/parallel.hpp"

namespace hadwiger {

using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Integers built in code are signed; parsed ones are unsigned.
bool nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

// Reads typed parameters with defaults, remembers which keys were seen and
// rejects the rest.
class ParamReader {
 public:
  ParamReader(const json& in, std::string path) : in_(in), path_(std::move(path)) {
    if (!in_.is_null() && !in_.is_object()) fail(path_, "params must be an object");
  }

  json out = json::object();

  double number(const std::string& key, double def, double lo, double hi, bool open_lo = false,
                bool open_hi = false) {
    const double v = get_number(key, def);
    if (v < lo || v > hi || (open_lo && v == lo) || (open_hi && v == hi)) {
      fail(at(key), "value " + format_number(v) + " out of range " + (open_lo ? "(" : "[") +
                        format_number(lo) + ", " + format_number(hi) + (open_hi ? ")" : "]"));
    }
    out[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key, std::int64_t def, std::int64_t lo, std::int64_t hi) {
    std::int64_t v = def;
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_number_integer()) fail(at(key), "expected an integer");
      v = j.get<std::int64_t>();
    }
    if (v < lo || v > hi) {
      fail(at(key), "value " + std::to_string(v) + " out of range [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    out[key] = v;
    return v;
  }

  std::optional<std::int64_t> optional_integer(const std::string& key, std::int64_t lo,
                                               std::int64_t hi) {
    if (!has(key) || in_.at(key).is_null()) return std::nullopt;
    return integer(key, 0, lo, hi);
  }

  bool boolean(const std::string& key, bool def) {
    bool v = def;
    if (has(key)) {
      if (!in_.at(key).is_boolean()) fail(at(key), "expected true or false");
      v = in_.at(key).get<bool>();
    }
    out[key] = v;
    return v;
  }

  std::string choice(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    std::string v = def;
    if (has(key)) {
      if (!in_.at(key).is_string()) fail(at(key), "expected a string");
      v = in_.at(key).get<std::string>();
    }
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : "|") + a;
      fail(at(key), "unknown value \"" + v + "\" (expected " + list + ")");
    }
    out[key] = v;
    return v;
  }

  // "auto" (or absent) or a positive number.
  std::optional<double> auto_or_positive(const std::string& key) {
    if (!has(key) || (in_.at(key).is_string() && in_.at(key) == "auto")) {
      out[key] = "auto";
      return std::nullopt;
    }
    const double v = get_number(key, 0.0);
    if (!(v > 0.0)) fail(at(key), "expected \"auto\" or a positive number");
    out[key] = v;
    return v;
  }

  std::optional<double> optional_positive(const std::string& key) {
    if (!has(key) || in_.at(key).is_null()) return std::nullopt;
    const double v = get_number(key, 0.0);
    if (!(v > 0.0)) fail(at(key), "expected a positive number");
    out[key] = v;
    return v;
  }

  std::vector<std::int64_t> integer_list(const std::string& key, std::vector<std::int64_t> def,
                                         std::int64_t lo, std::int64_t hi) {
    if (has(key)) {
      const json& j = in_.at(key);
      if (!j.is_array() || j.empty()) fail(at(key), "expected a nonempty array of integers");
      def.clear();
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) fail(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
        def.push_back(j[i].get<std::int64_t>());
      }
    }
    for (std::size_t i = 0; i < def.size(); ++i) {
      if (def[i] < lo || def[i] > hi) {
        fail(at(key) + "[" + std::to_string(i) + "]",
             "value out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
    }
    out[key] = def;
    return def;
  }

  void finish() const {
    if (!in_.is_object()) return;
    for (auto it = in_.begin(); it != in_.end(); ++it) {
      if (!seen_.count(it.key())) fail(at(it.key()), "unknown parameter");
    }
  }

  const std::string& path() const { return path_; }

 private:
  bool has(const std::string& key) {
    seen_.insert(key);
    return in_.is_object() && in_.contains(key);
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }
  double get_number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& j = in_.at(key);
    if (!j.is_number()) fail(at(key), "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(at(key), "expected a finite number");
    return v;
  }

  const json& in_;
  std::string path_;
  std::set<std::string> seen_;
};

std::uint64_t as_u64(const json& params, const char* key) {
  return static_cast<std::uint64_t>(params.at(key).get<std::int64_t>());
}

ojson vec_json(const Point& p) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) a.push_back(p(i));
  return a;
}

ojson matrix_columns_json(const Matrix& m) {
  ojson a = ojson::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(vec_json(m.col(j)));
  return a;
}

std::string vec_string(const Point& p) {
  std::string s;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += (i ? ";" : "") + format_number(p(i));
  return s;
}

ojson fitted(double value) { return ojson{{"value", value}, {"fitted", true}}; }
ojson maybe_fitted(double value, bool is_fitted) {
  return ojson{{"value", value}, {"fitted", is_fitted}};
}
ojson interval_json(const Interval& i) { return ojson::array({i.low, i.high}); }

struct Invariants {
  ojson list = ojson::array();
  bool ok = true;
  void add(const std::string& body, const std::string& name, bool holds) {
    list.push_back(ojson{{"body", body}, {"name", name}, {"ok", holds}});
    ok = ok && holds;
  }
};

ojson base_row(const RunSpec& run, const std::string& body) {
  return ojson{{"run_id", run.id}, {"experiment", run.experiment}, {"body", body}};
}

SymmetryOptions symmetry_options(const json& p) {
  SymmetryOptions o;
  const std::string m = p.at("method").get<std::string>();
  o.method = m == "exact-2d"   ? SymmetryOptions::Method::Exact2d
             : m == "mc"       ? SymmetryOptions::Method::MonteCarlo
                               : SymmetryOptions::Method::Auto;
  o.restarts = static_cast<int>(p.at("restarts").get<std::int64_t>());
  o.tol = p.at("tol").get<double>();
  o.max_sweeps = static_cast<int>(p.at("max_sweeps").get<std::int64_t>());
  o.search_samples = as_u64(p, "search_samples");
  o.samples = as_u64(p, "samples");
  o.use_symmetry = p.at("use_symmetry").get<bool>();
  return o;
}

// Lattice and grid defaults: half and a fiftieth of the smallest box width.
double smallest_width(const ConvexBody& body) {
  const Box box = sampling_box(body, as_constraints(body));
  return (box.hi - box.lo).minCoeff();
}

}  // namespace

std::optional<OutputFormat> parse_format(const std::string& name) {
  if (name == "json") return OutputFormat::Json;
  if (name == "csv") return OutputFormat::Csv;
  return std::nullopt;
}

std::string to_string(OutputFormat format) { return format == OutputFormat::Json ? "json" : "csv"; }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"delta-kb", "psi2", "gluskin",
                                                 "witness",  "cover", "report"};
  return names;
}

json validate_run_params(const std::string& experiment, const json& params,
                         const std::vector<int>& dims, const ExperimentConfig& config,
                         const std::string& path) {
  ParamReader r(params, path);
  const auto samples_default = static_cast<std::int64_t>(config.samples);
  constexpr std::int64_t kBig = std::int64_t{1} << 40;
  auto require_dims = [&](int lo, int hi, const char* what) {
    for (int d : dims) {
      if (d < lo || d > hi) fail(path, std::string(what) + " (body dimension " + std::to_string(d) + ")");
    }
  };
  if (experiment == "delta-kb" || experiment == "report") {
    const std::string method = r.choice("method", "auto", {"auto", "exact-2d", "mc"});
    if (method == "exact-2d") require_dims(2, 2, "exact-2d needs planar bodies");
    r.integer("restarts", 4, 1, 1000);
    r.number("tol", 1e-4, 0.0, 1.0, true);
    r.integer("max_sweeps", 30, 1, 10000);
    r.integer("search_samples", 100'000, 1000, kBig);
    r.integer("samples", samples_default, 1000, kBig);
    r.boolean("use_symmetry", true);
    if (experiment == "report") {
      require_dims(2, kMaxExactDim, "report needs 2 <= n <= 6");
      r.boolean("reduce", true);
      r.integer("direction_trials", 200, kMinDirectionTrials, 1'000'000);
      r.integer("psi_samples", 100'000, static_cast<std::int64_t>(kMinPsiSamples), kBig);
    }
  } else if (experiment == "psi2") {
    r.integer("directions", 10, 1, 100'000);
    r.number("alpha", 2.0, 1.0, 1e6);
    r.integer("bootstrap", 20, 0, 100'000);
    r.integer("samples", 100'000, static_cast<std::int64_t>(kMinPsiSamples), kBig);
    r.optional_positive("b2");
    r.integer("trials", 200, kMinDirectionTrials, 1'000'000);
    r.optional_positive("beta");
  } else if (experiment == "gluskin") {
    if (!dims.empty()) fail(path, "gluskin takes no bodies");
    const auto ns = r.integer_list("dims", {3, 4, 5, 6}, 2, kMaxExactDim);
    r.integer("trials", 100, 1, 1'000'000);
    if (const auto m = r.optional_integer("m", 3, 100'000)) {
      for (auto n : ns) {
        if (*m <= n) fail(path + ".m", "m must exceed every dimension");
      }
    }
  } else if (experiment == "witness") {
    require_dims(2, kMaxExactDim, "witness needs 2 <= n <= 6");
    r.auto_or_positive("b2");
    r.auto_or_positive("alpha");
    r.auto_or_positive("C_emp");
    if (const auto m = r.optional_integer("m", 2, 100'000)) {
      for (int d : dims) {
        if (*m < d) fail(path + ".m", "m must be at least the dimension");
      }
    }
    r.integer("samples", samples_default, 1000, kBig);
    r.integer("psi_samples", 100'000, static_cast<std::int64_t>(kMinPsiSamples), kBig);
    r.integer("b2_directions", 100, 1, 1'000'000);
    r.integer("resample_budget", 1000, 1, 1'000'000);
  } else if (experiment == "cover") {
    if (params.is_object() && params.contains("lambda") && !params.at("lambda").is_null()) {
      r.number("lambda", 0.5, 0.0, 1.0, true, true);
    } else {
      require_dims(2, 1 << 20, "default lambda = 1 - 1/n needs n >= 2");
      r.optional_positive("lambda");
      r.out["lambda"] = nullptr;  // 1 - 1/n per body
    }
    const auto lattice = r.optional_positive("lattice");
    const auto grid = r.optional_positive("grid");
    const auto verify = r.optional_positive("verify_grid");
    if (!lattice) r.out["lattice"] = nullptr;
    if (!grid) r.out["grid"] = nullptr;
    if (!verify) r.out["verify_grid"] = nullptr;
    if (grid && verify && !(*verify < *grid)) {
      fail(path + ".verify_grid", "must be finer than grid");
    }
  } else {
    fail(path, "unknown experiment \"" + experiment + "\"");
  }
  r.finish();
  return r.out;
}

ExperimentConfig parse_config(const json& config) {
  if (!config.is_object()) fail("$", "config must be a JSON object");
  static const std::set<std::string> top = {"version", "seed", "samples", "output", "bodies",
                                            "experiments"};
  for (auto it = config.begin(); it != config.end(); ++it) {
    if (!top.count(it.key())) fail("$." + it.key(), "unknown field");
  }
  ExperimentConfig out;
  if (config.contains("version")) {
    if (!config["version"].is_number_integer() || config["version"].get<int>() != kConfigVersion) {
      fail("$.version", "unsupported config version (expected " + std::to_string(kConfigVersion) + ")");
    }
  }
  if (config.contains("seed")) {
    if (!nonnegative_integer(config["seed"])) fail("$.seed", "expected a nonnegative integer");
    out.seed = config["seed"].get<std::uint64_t>();
  }
  if (config.contains("samples")) {
    if (!nonnegative_integer(config["samples"]) || config["samples"].get<std::uint64_t>() < 1000) {
      fail("$.samples", "expected an integer >= 1000");
    }
    out.samples = config["samples"].get<std::uint64_t>();
  }
  if (config.contains("output")) {
    const json& o = config["output"];
    if (!o.is_object()) fail("$.output", "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it) {
      if (it.key() == "dir") {
        if (!it->is_string()) fail("$.output.dir", "expected a string");
        out.output_dir = it->get<std::string>();
      } else if (it.key() == "format") {
        const auto f = it->is_string() ? parse_format(it->get<std::string>()) : std::nullopt;
        if (!f) fail("$.output.format", "expected \"json\" or \"csv\"");
        out.format = *f;
      } else {
        fail("$.output." + it.key(), "unknown field");
      }
    }
  }

  std::map<std::string, int> body_dims;
  if (config.contains("bodies")) {
    const json& bodies = config["bodies"];
    if (!bodies.is_array()) fail("$.bodies", "expected an array");
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      const std::string path = "$.bodies[" + std::to_string(i) + "]";
      const json& b = bodies[i];
      if (!b.is_object()) fail(path, "expected an object");
      for (auto it = b.begin(); it != b.end(); ++it) {
        if (it.key() != "name" && it.key() != "spec") fail(path + "." + it.key(), "unknown field");
      }
      if (!b.contains("name") || !b["name"].is_string() || b["name"].get<std::string>().empty()) {
        fail(path + ".name", "expected a nonempty string");
      }
      if (!b.contains("spec")) fail(path + ".spec", "missing body spec");
      NamedBody nb;
      nb.name = b["name"].get<std::string>();
      if (body_dims.count(nb.name)) fail(path + ".name", "duplicate body name \"" + nb.name + "\"");
      nb.spec = b["spec"];
      try {
        nb.dim = validate_body_spec(nb.spec);
        body_from_json(nb.spec);
      } catch (const std::exception& e) {
        fail(path + ".spec", e.what());
      }
      body_dims[nb.name] = nb.dim;
      out.bodies.push_back(std::move(nb));
    }
  }

  if (config.contains("experiments")) {
    const json& runs = config["experiments"];
    if (!runs.is_array()) fail("$.experiments", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const std::string path = "$.experiments[" + std::to_string(i) + "]";
      const json& e = runs[i];
      if (!e.is_object()) fail(path, "expected an object");
      for (auto it = e.begin(); it != e.end(); ++it) {
        static const std::set<std::string> keys = {"name", "id", "bodies", "params"};
        if (!keys.count(it.key())) fail(path + "." + it.key(), "unknown field");
      }
      if (!e.contains("name") || !e["name"].is_string()) fail(path + ".name", "expected a string");
      RunSpec run;
      run.experiment = e["name"].get<std::string>();
      const auto& names = experiment_names();
      if (std::find(names.begin(), names.end(), run.experiment) == names.end()) {
        fail(path + ".name", "unknown experiment \"" + run.experiment + "\"");
      }
      run.id = run.experiment + "-" + std::to_string(i);
      if (e.contains("id")) {
        if (!e["id"].is_string() || e["id"].get<std::string>().empty()) {
          fail(path + ".id", "expected a nonempty string");
        }
        run.id = e["id"].get<std::string>();
      }
      if (run.id.find_first_of("/\\") != std::string::npos || run.id == "manifest" ||
          run.id == "table") {
        fail(path + ".id", "id is not usable as a file name");
      }
      if (!ids.insert(run.id).second) fail(path + ".id", "duplicate run id \"" + run.id + "\"");
      std::vector<int> dims;
      if (e.contains("bodies")) {
        const json& bl = e["bodies"];
        if (!bl.is_array()) fail(path + ".bodies", "expected an array of body names");
        for (std::size_t k = 0; k < bl.size(); ++k) {
          const std::string bp = path + ".bodies[" + std::to_string(k) + "]";
          if (!bl[k].is_string()) fail(bp, "expected a body name");
          const std::string name = bl[k].get<std::string>();
          const auto it = body_dims.find(name);
          if (it == body_dims.end()) fail(bp, "unknown body \"" + name + "\"");
          run.bodies.push_back(name);
          dims.push_back(it->second);
        }
      } else if (run.experiment != "gluskin") {
        for (const auto& b : out.bodies) {
          run.bodies.push_back(b.name);
          dims.push_back(b.dim);
        }
      }
      if (run.experiment != "gluskin" && run.bodies.empty()) {
        fail(path + ".bodies", "run needs at least one body");
      }
      run.params = validate_run_params(run.experiment, e.contains("params") ? e["params"] : json(),
                                       dims, out, path + ".params");
      out.experiments.push_back(std::move(run));
    }
  }
  return out;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

namespace {

const NamedBody& find_body(const ExperimentConfig& config, const std::string& name) {
  for (const auto& b : config.bodies) {
    if (b.name == name) return b;
  }
  throw std::invalid_argument("unknown body " + name);
}

void run_delta_kb(const RunSpec& run, const NamedBody& nb, const SampleStream& stream,
                  RunResult& res, Invariants& inv, ojson& entry) {
  const ConvexBody body = body_from_json(nb.spec);
  const SymmetryResult s = delta_kb(body, symmetry_options(run.params), stream);
  const double lower = std::ldexp(1.0, -body.dim());
  entry["delta_kb"] = s.delta_kb;
  entry["std_error"] = s.std_error;
  entry["x_star"] = vec_json(s.x_star);
  entry["method"] = s.method;
  entry["search_value"] = s.search_value;
  entry["evaluations"] = s.evaluations;
  ojson trace = ojson::array();
  for (const auto& t : s.trace) {
    trace.push_back(ojson{{"restart", t.restart}, {"x", vec_json(t.x)}, {"value", t.value}});
  }
  entry["trace"] = std::move(trace);
  const double rel = s.delta_kb > 0.0 ? s.std_error / s.delta_kb : 0.0;
  inv.add(nb.name, "delta_kb >= 2^-n", s.delta_kb >= lower * (1.0 - 4.0 * rel));
  inv.add(nb.name, "delta_kb <= 1", s.delta_kb <= 1.0 + 4.0 * s.std_error + 1e-9);
  ojson row = base_row(run, nb.name);
  row["n"] = body.dim();
  row["method"] = s.method;
  row["delta_kb"] = s.delta_kb;
  row["delta_kb_se"] = s.std_error;
  row["x_star"] = vec_string(s.x_star);
  row["evaluations"] = s.evaluations;
  row["lower_bound"] = lower;
  res.rows.push_back(std::move(row));
}

void run_psi2(const RunSpec& run, const NamedBody& nb, const SampleStream& stream, RunResult& res,
              Invariants& inv, ojson& entry) {
  const ConvexBody body = body_from_json(nb.spec);
  const json& p = run.params;
  const int n = body.dim();
  const auto count = static_cast<std::size_t>(p.at("directions").get<std::int64_t>());
  const double alpha = p.at("alpha").get<double>();
  const UniformSampler sampler(body, stream.split(1));
  const Matrix points = sampler.sample(stream.split(2), as_u64(p, "samples"));
  const Matrix dirs = sample_sphere(n, stream.split(3), count);
  std::vector<double> lambdas;
  ojson list = ojson::array();
  bool roots_ok = true;
  for (std::size_t k = 0; k < count; ++k) {
    const Psi2Estimate e =
        psi_alpha_norm(points, dirs.col(static_cast<Eigen::Index>(k)), alpha, stream.split(4).split(k),
                       static_cast<int>(p.at("bootstrap").get<std::int64_t>()));
    roots_ok = roots_ok && std::abs(e.mean_at_lambda - 2.0) <= 1e-6;
    lambdas.push_back(e.lambda_star);
    list.push_back(ojson{{"direction", vec_json(e.direction)},
                         {"lambda_star", e.lambda_star},
                         {"ci", interval_json(e.ci)},
                         {"mean_at_lambda", e.mean_at_lambda}});
  }
  entry["alpha"] = alpha;
  entry["samples"] = static_cast<std::uint64_t>(points.cols());
  entry["estimates"] = std::move(list);
  inv.add(nb.name, "mean at lambda_star equals 2", roots_ok);
  std::vector<double> sorted = lambdas;
  std::sort(sorted.begin(), sorted.end());
  double mean = 0.0;
  for (double v : lambdas) mean += v / static_cast<double>(lambdas.size());
  const double pos = 0.9 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double q90 = lo + 1 < sorted.size()
                         ? sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo])
                         : sorted.back();
  ojson row = base_row(run, nb.name);
  row["n"] = n;
  row["alpha"] = alpha;
  row["directions"] = count;
  row["lambda_mean"] = mean;
  row["lambda_min"] = sorted.front();
  row["lambda_max"] = sorted.back();
  row["lambda_q90"] = q90;
  if (p.contains("b2")) {
    std::optional<double> beta;
    if (p.contains("beta")) beta = p.at("beta").get<double>();
    const DirectionFraction f =
        direction_fraction(body, p.at("b2").get<double>(), static_cast<int>(p.at("trials").get<std::int64_t>()),
                           stream.split(5), beta, as_u64(p, "samples"));
    entry["direction_fraction"] = ojson{{"b2", f.b2},
                                        {"trials", f.trials},
                                        {"passes", f.passes},
                                        {"fraction", f.fraction},
                                        {"ci", interval_json(f.ci)},
                                        {"threshold", f.threshold},
                                        {"threshold_pass", f.threshold_pass}};
    inv.add(nb.name, "fraction inside its interval", f.ci.low <= f.fraction && f.fraction <= f.ci.high);
    row["b2"] = f.b2;
    row["b2_fitted"] = false;
    row["fraction"] = f.fraction;
    row["fraction_lo"] = f.ci.low;
    row["fraction_hi"] = f.ci.high;
    row["threshold"] = f.threshold;
    row["threshold_pass"] = f.threshold_pass;
  }
  res.rows.push_back(std::move(row));
}

void run_gluskin(const RunSpec& run, const SampleStream& stream, RunResult& res, Invariants& inv) {
  const json& p = run.params;
  std::vector<int> dims;
  for (const auto& d : p.at("dims")) dims.push_back(static_cast<int>(d.get<std::int64_t>()));
  std::optional<int> m;
  if (p.contains("m")) m = static_cast<int>(p.at("m").get<std::int64_t>());
  const GluskinScaling g =
      gluskin_volume_scaling(dims, static_cast<int>(p.at("trials").get<std::int64_t>()), stream, m);
  res.payload["c_emp"] = fitted(g.c_emp);
  res.payload["calibration_n"] = g.calibration_n;
  ojson rows = ojson::array();
  for (const auto& r : g.rows) {
    bool overridden = false;
    if (!m) gluskin_default_m(r.n, &overridden);
    rows.push_back(ojson{{"n", r.n},
                         {"m", r.m},
                         {"m_overridden", overridden},
                         {"trials", r.trials},
                         {"mean_normalized", r.mean_normalized},
                         {"stderr_normalized", r.stderr_normalized},
                         {"min_normalized", r.min_normalized},
                         {"fraction_above", r.fraction_above},
                         {"fraction_ci", interval_json(r.fraction_ci)}});
    ojson row = base_row(run, "");
    row["n"] = r.n;
    row["m"] = r.m;
    row["m_overridden"] = overridden;
    row["trials"] = r.trials;
    row["c_emp"] = g.c_emp;
    row["c_emp_fitted"] = true;
    row["mean_normalized"] = r.mean_normalized;
    row["min_normalized"] = r.min_normalized;
    row["fraction_above"] = r.fraction_above;
    res.rows.push_back(std::move(row));
  }
  res.payload["rows"] = std::move(rows);
  inv.add("", "c_emp > 0", g.c_emp > 0.0);
}

WitnessOptions witness_options(const json& p) {
  WitnessOptions o;
  if (p.at("b2").is_number()) o.b2 = p.at("b2").get<double>();
  if (p.at("alpha").is_number()) o.alpha = p.at("alpha").get<double>();
  if (p.at("C_emp").is_number()) o.C_emp = p.at("C_emp").get<double>();
  if (p.contains("m")) o.m = static_cast<int>(p.at("m").get<std::int64_t>());
  o.samples = as_u64(p, "samples");
  o.psi_samples = as_u64(p, "psi_samples");
  o.b2_directions = static_cast<int>(p.at("b2_directions").get<std::int64_t>());
  o.resample_budget = static_cast<int>(p.at("resample_budget").get<std::int64_t>());
  return o;
}

ojson witness_json(const WitnessReport& w) {
  return ojson{{"n", w.n},
               {"m", w.m},
               {"m_overridden", w.m_overridden},
               {"center", vec_json(w.center)},
               {"volume", w.volume},
               {"b2", maybe_fitted(w.b2, w.b2_fitted)},
               {"alpha", maybe_fitted(w.alpha, w.alpha_fitted)},
               {"t", w.t},
               {"N", w.N},
               {"N_capped", w.N_capped},
               {"C_emp", maybe_fitted(w.C_emp, w.C_fitted)},
               {"resamples", w.resamples},
               {"acceptance_rate", w.acceptance_rate},
               {"hypothesis_satisfied", w.hypothesis_satisfied},
               {"directions", matrix_columns_json(w.directions)},
               {"absconv_volume", w.absconv_volume},
               {"absconv_root", w.absconv_root},
               {"samples", w.samples},
               {"p_num", w.p_num},
               {"p_num_ci", interval_json(w.p_num_ci)},
               {"p_den", w.p_den},
               {"p_den_ci", interval_json(w.p_den_ci)},
               {"density_lb", w.density_lb},
               {"density_lb_ci", interval_json(w.density_lb_ci)},
               {"kb_lb", w.kb_lb},
               {"kb_lb_ci", interval_json(w.kb_lb_ci)},
               {"fitted_k1", fitted(w.fitted_k1)},
               {"tail_bound", w.tail_bound},
               {"notes", w.notes}};
}

void witness_invariants(const std::string& name, const WitnessReport& w, Invariants& inv) {
  const double t_rule = w.alpha * std::sqrt(std::log(std::sqrt(static_cast<double>(w.n))));
  inv.add(name, "t = alpha*sqrt(log sqrt n)", std::abs(w.t - t_rule) <= 1e-12 * std::max(1.0, t_rule));
  inv.add(name, "N is the smallest admissible integer",
          w.N_capped || w.N == select_averaging_depth(w.b2, w.alpha, w.C_emp));
  inv.add(name, "kb_lb <= 1", w.kb_lb_ci.low <= 1.0);
}

void add_witness_columns(ojson& row, const WitnessReport& w) {
  row["m"] = w.m;
  row["m_overridden"] = w.m_overridden;
  row["b2"] = w.b2;
  row["b2_fitted"] = w.b2_fitted;
  row["alpha"] = w.alpha;
  row["alpha_fitted"] = w.alpha_fitted;
  row["t"] = w.t;
  row["N"] = w.N;
  row["C_emp"] = w.C_emp;
  row["C_fitted"] = w.C_fitted;
  row["resamples"] = w.resamples;
  row["hypothesis_satisfied"] = w.hypothesis_satisfied;
  row["absconv_volume"] = w.absconv_volume;
  row["p_num"] = w.p_num;
  row["p_num_lo"] = w.p_num_ci.low;
  row["p_num_hi"] = w.p_num_ci.high;
  row["p_den"] = w.p_den;
  row["p_den_lo"] = w.p_den_ci.low;
  row["p_den_hi"] = w.p_den_ci.high;
  row["density_lb"] = w.density_lb;
  row["kb_lb"] = w.kb_lb;
  row["kb_lb_lo"] = w.kb_lb_ci.low;
  row["kb_lb_hi"] = w.kb_lb_ci.high;
  row["fitted_k1"] = w.fitted_k1;
  row["tail_bound"] = w.tail_bound;
}

void run_witness(const RunSpec& run, const NamedBody& nb, const SampleStream& stream,
                 RunResult& res, Invariants& inv, ojson& entry) {
  const ConvexBody body = body_from_json(nb.spec);
  const WitnessReport w = witness_pipeline(body, stream, witness_options(run.params));
  entry["witness"] = witness_json(w);
  witness_invariants(nb.name, w, inv);
  ojson row = base_row(run, nb.name);
  row["n"] = w.n;
  add_witness_columns(row, w);
  res.rows.push_back(std::move(row));
}

void run_cover(const RunSpec& run, const NamedBody& nb, RunResult& res, Invariants& inv,
               ojson& entry) {
  const ConvexBody body = body_from_json(nb.spec);
  const json& p = run.params;
  const int n = body.dim();
  const double lambda = p.at("lambda").is_number() ? p.at("lambda").get<double>() : 1.0 - 1.0 / n;
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw std::invalid_argument("cover: lambda = 1 - 1/n is not in (0, 1) for n = 1");
  }
  const double width = smallest_width(body);
  const double lattice = p.at("lattice").is_number() ? p.at("lattice").get<double>() : 0.5 * width;
  const double grid = p.at("grid").is_number() ? p.at("grid").get<double>() : width / 50.0;
  const double fine = p.at("verify_grid").is_number() ? p.at("verify_grid").get<double>() : grid / 2.0;
  const CoveringCertificate cert = greedy_cover(body, lambda, lattice, grid);
  const CoverVerification v = verify_cover(cert, fine);
  entry["certificate"] = certificate_to_json(cert, nb.spec);
  ojson unc = ojson::array();
  for (const auto& x : v.uncovered) unc.push_back(vec_json(x));
  entry["verification"] = ojson{{"resolution", v.resolution},
                                {"grid_points", v.grid_points},
                                {"ok", v.ok},
                                {"uncovered_count", v.uncovered_count},
                                {"uncovered", std::move(unc)}};
  inv.add(nb.name, "cover complete", cert.complete);
  inv.add(nb.name, "finer verification", v.ok);
  ojson row = base_row(run, nb.name);
  row["n"] = n;
  row["lambda"] = lambda;
  row["lattice"] = lattice;
  row["grid"] = grid;
  row["count"] = cert.count;
  row["complete"] = cert.complete;
  row["grid_points"] = cert.grid_points;
  row["margin"] = cert.margin;
  row["verify_grid"] = fine;
  row["verified"] = v.ok;
  row["uncovered"] = v.uncovered_count;
  res.rows.push_back(std::move(row));
}

void run_report(const RunSpec& run, const NamedBody& nb, const SampleStream& stream,
                RunResult& res, Invariants& inv, ojson& entry) {
  const ConvexBody body = body_from_json(nb.spec);
  const json& p = run.params;
  HadwigerOptions o;
  const std::uint64_t samples = as_u64(p, "samples");
  o.reduce_small_diameter = p.at("reduce").get<bool>();
  o.isotropic.samples = samples;
  o.isotropic.volume_samples = samples;
  o.symmetry = symmetry_options(p);
  o.witness.samples = samples;
  o.witness.psi_samples = as_u64(p, "psi_samples");
  o.direction_trials = static_cast<int>(p.at("direction_trials").get<std::int64_t>());
  o.direction_samples = as_u64(p, "psi_samples");
  const HadwigerReport r = hadwiger_report(body, stream, o);
  entry["n"] = r.n;
  entry["L_K"] = r.L_K;
  entry["residuals_ok"] = r.residuals_ok;
  entry["small_diameter"] = r.small_diameter;
  entry["truncated_volume"] = r.truncated_volume;
  entry["L_Q"] = r.L_Q;
  entry["l_ratio"] = fitted(r.l_ratio);
  entry["k_radius"] = fitted(r.k_radius);
  entry["b2"] = maybe_fitted(r.b2, r.witness.b2_fitted);
  entry["direction_fraction"] = ojson{{"fraction", r.fraction.fraction},
                                      {"ci", interval_json(r.fraction.ci)},
                                      {"threshold", r.fraction.threshold},
                                      {"threshold_pass", r.fraction.threshold_pass}};
  entry["delta_kb"] = r.delta_kb;
  entry["delta_kb_se"] = r.delta_kb_se;
  entry["delta_method"] = r.delta_method;
  entry["witness"] = witness_json(r.witness);
  entry["bound_eq20"] = ojson{{"lambda", r.bound.lambda},
                              {"homothety_factor", r.bound.homothety_factor},
                              {"rogers_factor", r.bound.rogers.factor},
                              {"n2_adjusted", r.bound.rogers.n2_adjusted},
                              {"bound", r.bound.bound},
                              {"simplified_constant", fitted(r.bound.simplified_constant)}};
  witness_invariants(nb.name, r.witness, inv);
  inv.add(nb.name, "kb_lb <= delta_kb", r.witness.kb_lb_ci.low <= r.delta_kb + 4.0 * r.delta_kb_se + 1e-9);
  inv.add(nb.name, "bound finite", std::isfinite(r.bound.bound) && r.bound.bound > 0.0);
  ojson row = base_row(run, nb.name);
  row["n"] = r.n;
  row["L_K"] = r.L_K;
  row["L_Q"] = r.L_Q;
  row["l_ratio"] = r.l_ratio;
  row["k_radius"] = r.k_radius;
  row["truncated_volume"] = r.truncated_volume;
  row["fraction"] = r.fraction.fraction;
  row["threshold"] = r.fraction.threshold;
  row["threshold_pass"] = r.fraction.threshold_pass;
  row["method"] = r.delta_method;
  row["delta_kb"] = r.delta_kb;
  row["delta_kb_se"] = r.delta_kb_se;
  add_witness_columns(row, r.witness);
  row["bound_eq20"] = r.bound.bound;
  row["simplified_constant"] = r.bound.simplified_constant;
  row["rogers_factor"] = r.bound.rogers.factor;
  res.rows.push_back(std::move(row));
}

}  // namespace

RunResult execute_run(const RunSpec& run, const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  res.id = run.id;
  res.experiment = run.experiment;
  res.payload = ojson{{"id", run.id},
                      {"experiment", run.experiment},
                      {"seed", config.seed},
                      {"params", ojson::parse(run.params.dump())}};
  Invariants inv;
  const SampleStream run_stream = SampleStream(config.seed).split(fnv1a(run.id));
  try {
    if (run.experiment == "gluskin") {
      run_gluskin(run, run_stream, res, inv);
    } else {
      ojson results = ojson::array();
      for (const auto& name : run.bodies) {
        const NamedBody& nb = find_body(config, name);
        const SampleStream s = run_stream.split(fnv1a(name));
        ojson entry{{"body", name}, {"spec", ojson::parse(nb.spec.dump())}};
        if (run.experiment == "delta-kb") {
          run_delta_kb(run, nb, s, res, inv, entry);
        } else if (run.experiment == "psi2") {
          run_psi2(run, nb, s, res, inv, entry);
        } else if (run.experiment == "witness") {
          run_witness(run, nb, s, res, inv, entry);
        } else if (run.experiment == "cover") {
          run_cover(run, nb, res, inv, entry);
        } else if (run.experiment == "report") {
          run_report(run, nb, s, res, inv, entry);
        } else {
          throw std::invalid_argument("unknown experiment " + run.experiment);
        }
        results.push_back(std::move(entry));
      }
      res.payload["results"] = std::move(results);
    }
    res.completed = true;
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  res.invariants_ok = res.completed && inv.ok;
  for (auto& row : res.rows) row["invariants_ok"] = res.invariants_ok;
  res.payload["invariants"] = std::move(inv.list);
  res.payload["invariants_ok"] = res.invariants_ok;
  res.payload["completed"] = res.completed;
  if (!res.completed) res.payload["error"] = res.error;
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> columns = {
      "run_id", "experiment", "body", "n", "method", "delta_kb", "delta_kb_se", "x_star",
      "evaluations", "lower_bound", "alpha", "alpha_fitted", "directions", "lambda_mean",
      "lambda_min", "lambda_max", "lambda_q90", "b2", "b2_fitted", "fraction", "fraction_lo",
      "fraction_hi", "threshold", "threshold_pass", "m", "m_overridden", "trials", "c_emp",
      "c_emp_fitted", "mean_normalized", "min_normalized", "fraction_above", "t", "N", "C_emp",
      "C_fitted", "resamples", "hypothesis_satisfied", "absconv_volume", "p_num", "p_num_lo",
      "p_num_hi", "p_den", "p_den_lo", "p_den_hi", "density_lb", "kb_lb", "kb_lb_lo", "kb_lb_hi",
      "fitted_k1", "tail_bound", "lambda", "lattice", "grid", "count", "complete", "grid_points",
      "margin", "verify_grid", "verified", "uncovered", "L_K", "L_Q", "l_ratio", "k_radius",
      "truncated_volume", "bound_eq20", "simplified_constant", "rogers_factor", "invariants_ok"};
  return columns;
}

namespace {

std::vector<std::string> present_columns(const std::vector<ojson>& rows) {
  std::set<std::string> present;
  std::vector<std::string> extra;
  for (const auto& r : rows) {
    for (auto it = r.begin(); it != r.end(); ++it) {
      if (present.insert(it.key()).second &&
          std::find(table_columns().begin(), table_columns().end(), it.key()) ==
              table_columns().end()) {
        extra.push_back(it.key());
      }
    }
  }
  std::vector<std::string> cols;
  for (const auto& c : table_columns()) {
    if (present.count(c)) cols.push_back(c);
  }
  cols.insert(cols.end(), extra.begin(), extra.end());
  return cols;
}

std::string csv_cell(const ojson& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return v.dump();
  if (v.is_number()) return format_number(v.get<double>());
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

ojson rounded(const ojson& v) {
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) return nullptr;
    return std::strtod(format_number(d).c_str(), nullptr);
  }
  return v;
}

}  // namespace

std::string emit_table(const std::vector<ojson>& rows, OutputFormat format) {
  const std::vector<std::string> cols = present_columns(rows);
  if (format == OutputFormat::Csv) {
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ",";
        if (r.contains(cols[i])) out += csv_cell(r.at(cols[i]));
      }
      out += "\n";
    }
    return out;
  }
  ojson arr = ojson::array();
  for (const auto& r : rows) {
    ojson o = ojson::object();
    for (const auto& c : cols) {
      if (r.contains(c)) o[c] = rounded(r.at(c));
    }
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

ConfigOutcome run_config(const ExperimentConfig& config, bool write_files) {
  ConfigOutcome outcome;
  const std::time_t started = std::time(nullptr);
  std::vector<ojson> rows;
  ojson runs = ojson::array();
  for (const auto& run : config.experiments) {
    RunResult r = execute_run(run, config);
    const std::string file = run.id + ".json";
    if (write_files) write_file_atomic(config.output_dir + "/" + file, r.payload.dump(2) + "\n");
    runs.push_back(ojson{{"id", r.id},
                         {"experiment", r.experiment},
                         {"bodies", run.bodies},
                         {"file", file},
                         {"completed", r.completed},
                         {"invariants_ok", r.invariants_ok},
                         {"wall_seconds", r.wall_seconds}});
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    outcome.invariant_failure = outcome.invariant_failure || !r.invariants_ok;
    outcome.runs.push_back(std::move(r));
  }
  if (write_files) {
    const std::string table = "table." + to_string(config.format);
    if (!config.experiments.empty()) {
      write_file_atomic(config.output_dir + "/" + table, emit_table(rows, config.format));
    }
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&started));
    ojson manifest{{"tool", "hadwiger"},
                   {"version", kToolVersion},
                   {"config_version", kConfigVersion},
                   {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                         std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__},
                   {"started_at", stamp},
                   {"seed", config.seed},
                   {"samples", config.samples},
                   {"workers", worker_count()},
                   {"format", to_string(config.format)},
                   {"table", config.experiments.empty() ? ojson(nullptr) : ojson(table)},
                   {"runs", std::move(runs)}};
    write_file_atomic(config.output_dir + "/manifest.json", manifest.dump(2) + "\n");
  }
  return outcome;
}

int exit_status(const ConfigOutcome& outcome) { return outcome.invariant_failure ? 1 : 0; }

ojson certificate_to_json(const CoveringCertificate& cert, const json& body_spec) {
  ojson centers = ojson::array();
  for (const auto& c : cert.centers) centers.push_back(vec_json(c));
  ojson unc = ojson::array();
  for (const auto& x : cert.uncovered) unc.push_back(vec_json(x));
  return ojson{{"body", ojson::parse(body_spec.dump())},
               {"lambda", cert.lambda},
               {"count", cert.count},
               {"centers", std::move(centers)},
               {"lattice_spacing", cert.lattice_spacing},
               {"verified_resolution", cert.verified_resolution},
               {"reference", vec_json(cert.reference)},
               {"inradius", cert.inradius},
               {"margin", cert.margin},
               {"grid_points", cert.grid_points},
               {"complete", cert.complete},
               {"uncovered_count", cert.uncovered_count},
               {"uncovered", std::move(unc)}};
}

CoveringCertificate certificate_from_json(const json& j) {
  auto need = [&](const char* key) -> const json& {
    if (!j.is_object() || !j.contains(key)) {
      throw std::invalid_argument(std::string("certificate: missing field ") + key);
    }
    return j.at(key);
  };
  const ConvexBody body = body_from_json(need("body"));
  const int n = body.dim();
  auto point = [&](const json& a, const std::string& what) {
    if (!a.is_array() || static_cast<int>(a.size()) != n) {
      throw std::invalid_argument("certificate: " + what + " must have " + std::to_string(n) + " coordinates");
    }
    Point p(n);
    for (int i = 0; i < n; ++i) p(i) = a[static_cast<std::size_t>(i)].get<double>();
    return p;
  };
  CoveringCertificate c{body, need("lambda").get<double>(), {}, 0,
                        need("lattice_spacing").get<double>(),
                        need("verified_resolution").get<double>(), Point::Zero(n), 0.0, 0.0, 0,
                        false, 0, {}};
  const json& centers = need("centers");
  if (!centers.is_array()) throw std::invalid_argument("certificate: centers must be an array");
  for (std::size_t i = 0; i < centers.size(); ++i) {
    c.centers.push_back(point(centers[i], "centers[" + std::to_string(i) + "]"));
  }
  c.count = static_cast<int>(c.centers.size());
  if (j.contains("reference")) c.reference = point(j.at("reference"), "reference");
  if (j.contains("inradius")) c.inradius = j.at("inradius").get<double>();
  if (j.contains("margin")) c.margin = j.at("margin").get<double>();
  if (j.contains("grid_points")) c.grid_points = j.at("grid_points").get<std::uint64_t>();
  if (j.contains("complete")) c.complete = j.at("complete").get<bool>();
  if (j.contains("uncovered_count")) c.uncovered_count = j.at("uncovered_count").get<std::uint64_t>();
  return c;
}

}  // namespace hadwiger
