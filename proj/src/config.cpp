#include "incompat/config.hpp"

#include <cmath>
#include <set>

#include "incompat/io.hpp"

namespace incompat {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(join(path, k), "unknown field");
}

double get_number(const json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key), "must be finite");
  return x;
}

int get_int(const json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

Vec2 get_vec(const json& j, const std::string& key, const std::string& path, Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(join(path, key), "expected [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

ScalarFieldExpr expression(const std::string& src, const std::string& path) {
  try {
    return parse_field(src);
  } catch (const ParseError& e) {
    throw ConfigError(path, std::string("cannot parse expression \"") + src + "\": " + e.what());
  }
}

}  // namespace

MetricField ProblemConfig::metric() const {
  if (metric_spec.kind == "euclidean") return MetricField::euclidean(chart, frame);
  if (metric_spec.kind == "conformal")
    return MetricField::conformal(chart, frame, expression(metric_spec.phi, "metric.phi"));
  return MetricField::general(chart, frame, expression(metric_spec.g_aa, "metric.g_aa"),
                              expression(metric_spec.g_bb, "metric.g_bb"), expression(metric_spec.g_ab, "metric.g_ab"));
}

ProblemSpec ProblemConfig::problem() const { return {chart, frame, metric(), laws, measures}; }

ProblemConfig parse_config(const json& j) {
  ProblemConfig c;
  only_keys(j, "", {"version", "chart", "frame", "metric", "bond_law", "volume_law", "epsilon", "eps_list", "solver",
                    "init", "measures", "qw", "seed", "output"});
  if (!j.contains("version")) throw ConfigError("version", "missing (expected " + std::to_string(kConfigVersion) + ")");
  c.version = get_int(j, "version", "", 0);
  if (c.version != kConfigVersion)
    throw ConfigError("version", "unsupported version " + std::to_string(c.version) + " (expected " +
                                     std::to_string(kConfigVersion) + ")");

  if (j.contains("chart")) {
    const json& ch = j.at("chart");
    only_keys(ch, "chart", {"x0", "x1", "y0", "y1"});
    try {
      c.chart = Chart(get_number(ch, "x0", "chart", 0.0), get_number(ch, "x1", "chart", 1.0),
                      get_number(ch, "y0", "chart", 0.0), get_number(ch, "y1", "chart", 1.0));
    } catch (const GeometryError& e) {
      throw ConfigError("chart", e.what());
    }
  }
  if (j.contains("frame")) {
    const json& fr = j.at("frame");
    only_keys(fr, "frame", {"a", "b"});
    try {
      c.frame = LatticeFrame(get_vec(fr, "a", "frame", LatticeFrame{}.a), get_vec(fr, "b", "frame", LatticeFrame{}.b));
    } catch (const GeometryError& e) {
      throw ConfigError("frame", e.what());
    }
  }

  if (j.contains("metric")) {
    const json& m = j.at("metric");
    if (!m.is_object()) throw ConfigError("metric", "expected an object");
    c.metric_spec.kind = get_string(m, "kind", "metric", "euclidean");
    if (c.metric_spec.kind == "euclidean") {
      only_keys(m, "metric", {"kind"});
    } else if (c.metric_spec.kind == "conformal") {
      only_keys(m, "metric", {"kind", "phi"});
      if (!m.contains("phi")) throw ConfigError("metric.phi", "missing");
      c.metric_spec.phi = get_string(m, "phi", "metric", "1");
    } else if (c.metric_spec.kind == "general") {
      only_keys(m, "metric", {"kind", "g_aa", "g_bb", "g_ab"});
      for (const char* k : {"g_aa", "g_bb", "g_ab"})
        if (!m.contains(k)) throw ConfigError(join("metric", k), "missing");
      c.metric_spec.g_aa = get_string(m, "g_aa", "metric", "");
      c.metric_spec.g_bb = get_string(m, "g_bb", "metric", "");
      c.metric_spec.g_ab = get_string(m, "g_ab", "metric", "");
    } else {
      throw ConfigError("metric.kind", "must be euclidean, conformal or general");
    }
  }
  // Builds the field (parsing every expression) and checks it is SPD.
  try {
    c.metric().validate_spd(64, 1e-12);
  } catch (const GeometryError& e) {
    throw ConfigError("metric", e.what());
  }

  if (j.contains("bond_law")) {
    const json& b = j.at("bond_law");
    if (!b.is_object()) throw ConfigError("bond_law", "expected an object");
    const std::string kind = get_string(b, "kind", "bond_law", "hookean");
    if (kind == "hookean") {
      only_keys(b, "bond_law", {"kind", "k"});
      const double k = get_number(b, "k", "bond_law", 1.0);
      if (!(k > 0.0)) throw ConfigError("bond_law.k", "must be positive");
      c.laws.bond = BondLaw::hookean(k);
    } else if (kind == "custom") {
      only_keys(b, "bond_law", {"kind", "phi", "alpha", "C", "L"});
      if (!b.contains("phi")) throw ConfigError("bond_law.phi", "missing");
      const ScalarFieldExpr phi = expression(get_string(b, "phi", "bond_law", ""), "bond_law.phi");
      c.laws.bond = BondLaw::custom(phi, {get_number(b, "alpha", "bond_law", 1.0), get_number(b, "C", "bond_law", 1.0),
                                          get_number(b, "L", "bond_law", 2.0)});
    } else {
      throw ConfigError("bond_law.kind", "must be hookean or custom");
    }
  }
  if (j.contains("volume_law")) {
    const json& v = j.at("volume_law");
    if (!v.is_object()) throw ConfigError("volume_law", "expected an object");
    const std::string kind = get_string(v, "kind", "volume_law", "huber");
    const double beta = get_number(v, "beta", "volume_law", 1.0);
    if (!(beta > 0.0)) throw ConfigError("volume_law.beta", "must be positive");
    if (kind == "huber") {
      only_keys(v, "volume_law", {"kind", "beta", "delta"});
      const double delta = get_number(v, "delta", "volume_law", 1e-3);
      if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("volume_law.delta", "must lie in (0, 1)");
      c.laws.volume = VolumeLaw::huber(beta, delta);
    } else if (kind == "abs") {
      only_keys(v, "volume_law", {"kind", "beta"});
      c.laws.volume = VolumeLaw::abs(beta);
    } else {
      throw ConfigError("volume_law.kind", "must be huber or abs");
    }
  }

  if (j.contains("epsilon")) {
    const double e = get_number(j, "epsilon", "", 0.0);
    if (!(e > 0.0)) throw ConfigError("epsilon", "must be positive");
    c.epsilon = e;
  }
  if (j.contains("eps_list")) {
    const json& l = j.at("eps_list");
    if (!l.is_array()) throw ConfigError("eps_list", "expected an array of numbers");
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!l[i].is_number() || !(l[i].get<double>() > 0.0))
        throw ConfigError("eps_list[" + std::to_string(i) + "]", "expected a positive number");
      c.eps_list.push_back(l[i].get<double>());
    }
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    only_keys(s, "solver", {"max_iters", "grad_tol", "sufficient_decrease", "backtrack", "history", "multi_start",
                            "start_noise"});
    SolveOptions& o = c.solver;
    o.max_iters = get_int(s, "max_iters", "solver", o.max_iters);
    o.grad_tol = get_number(s, "grad_tol", "solver", o.grad_tol);
    o.sufficient_decrease = get_number(s, "sufficient_decrease", "solver", o.sufficient_decrease);
    o.backtrack = get_number(s, "backtrack", "solver", o.backtrack);
    o.history = get_int(s, "history", "solver", o.history);
    o.multi_start = get_int(s, "multi_start", "solver", o.multi_start);
    o.start_noise = get_number(s, "start_noise", "solver", o.start_noise);
    if (s.contains("grad_tol") && !(o.grad_tol > 0.0)) throw ConfigError("solver.grad_tol", "must be positive");
    try {
      o.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("solver", e.what());
    }
  }
  if (j.contains("init")) {
    const json& in = j.at("init");
    only_keys(in, "init", {"kind", "param"});
    try {
      c.init = parse_init_kind(get_string(in, "kind", "init", "chart-identity"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("init.kind", e.what());
    }
    if (c.init == InitKind::Custom) throw ConfigError("init.kind", "custom configurations are only available through the API");
    c.init_param = get_number(in, "param", "init", c.init == InitKind::Random ? 0.0 : 1.0);
  }
  if (j.contains("measures")) {
    const json& m = j.at("measures");
    only_keys(m, "measures", {"quad_order", "rho_samples", "distance_nodes", "distance_tol", "distance_max_iters",
                              "distance_fast", "distance_extrapolate"});
    MeasureOptions& o = c.measures;
    o.quad_order = get_int(m, "quad_order", "measures", o.quad_order);
    o.rho_samples = get_int(m, "rho_samples", "measures", o.rho_samples);
    o.distance.nodes = get_int(m, "distance_nodes", "measures", o.distance.nodes);
    o.distance.tol = get_number(m, "distance_tol", "measures", o.distance.tol);
    o.distance.max_iters = get_int(m, "distance_max_iters", "measures", o.distance.max_iters);
    if (m.contains("distance_fast")) {
      if (!m.at("distance_fast").is_boolean()) throw ConfigError("measures.distance_fast", "expected a boolean");
      o.distance.fast = m.at("distance_fast").get<bool>();
    }
    if (m.contains("distance_extrapolate")) {
      if (!m.at("distance_extrapolate").is_boolean())
        throw ConfigError("measures.distance_extrapolate", "expected a boolean");
      o.distance.extrapolate = m.at("distance_extrapolate").get<bool>();
    }
    if (o.quad_order < 1 || o.quad_order > 20) throw ConfigError("measures.quad_order", "must lie in [1, 20]");
    if (o.rho_samples < 0) throw ConfigError("measures.rho_samples", "must be ≥ 0");
    if (o.distance.nodes < 2) throw ConfigError("measures.distance_nodes", "must be ≥ 2");
  }
  if (j.contains("qw")) {
    const json& q = j.at("qw");
    only_keys(q, "qw", {"level", "samples", "random_starts", "perturbation", "min_far"});
    c.qw.level = get_int(q, "level", "qw", c.qw.level);
    c.qw.samples = get_int(q, "samples", "qw", c.qw.samples);
    c.qw.random_starts = get_int(q, "random_starts", "qw", c.qw.random_starts);
    c.qw.perturbation = get_number(q, "perturbation", "qw", c.qw.perturbation);
    c.qw.min_far = get_number(q, "min_far", "qw", c.qw.min_far);
    if (c.qw.level < 1 || c.qw.level > 6) throw ConfigError("qw.level", "must lie in [1, 6]");
    if (c.qw.samples < 1) throw ConfigError("qw.samples", "must be ≥ 1");
    if (c.qw.random_starts < 0) throw ConfigError("qw.random_starts", "must be ≥ 0");
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
    c.solver.seed = c.seed;
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    only_keys(o, "output", {"dir"});
    c.out_dir = get_string(o, "dir", "output", c.out_dir);
  }
  return c;
}

ProblemConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + " is not valid JSON: " + e.what());
  } catch (const std::runtime_error& e) {
    throw ConfigError("", e.what());
  }
  return parse_config(j);
}

}  // namespace incompat
