#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "datos/core.hpp"
#include "datos/metrics.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/refsolver.hpp"
#include "datos/rng.hpp"
#include "datos/runner.hpp"

namespace datos {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config: " + (field.empty() ? std::string() : "field '" + field + "': ") + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Flat key = value files with dotted section names. '#' starts a comment.

struct ConfigKey {
  std::string name;
  std::string default_value;  // empty: unset unless given
  std::string help;
};

inline const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> keys{
      {"seed", "1", "master seed; sub-seeds of problem, graph and solver derive from it unless set explicitly"},
      {"problem.kind", "elastic_net", "elastic_net | logistic_l1 | covariance_mle"},
      {"problem.seed", "", "data seed (default: derived from seed)"},
      {"problem.n", "20", "samples per agent"},
      {"problem.d", "50", "feature dimension (elastic_net, logistic_l1)"},
      {"problem.lambda", "1e-5", "l1 weight per agent"},
      {"problem.gamma_base", "0.1", "elastic_net: gamma_i = gamma_base + (i-1) * gamma_step"},
      {"problem.gamma_step", "0.1", "elastic_net: see gamma_base"},
      {"problem.noise", "1.0", "logistic_l1 synthetic: label noise level"},
      {"problem.data", "", "logistic_l1: LIBSVM file; synthetic data when unset"},
      {"problem.limit", "-1", "logistic_l1: max rows read from problem.data (-1: all)"},
      {"problem.label_rule", "auto", "logistic_l1: auto | parity | sign"},
      {"problem.d_mat", "5", "covariance_mle: matrix side"},
      {"problem.a", "0.1", "covariance_mle: lower spectral bound"},
      {"problem.b", "10", "covariance_mle: upper spectral bound"},
      {"problem.trace_sign", "1", "covariance_mle: sign of the trace term (+1 or -1)"},
      {"graph.kind", "erdos_renyi", "erdos_renyi | path | ring | star | complete | file"},
      {"graph.m", "20", "agent count"},
      {"graph.p", "0.5", "erdos_renyi: edge probability"},
      {"graph.seed", "", "erdos_renyi: graph seed (default: derived from seed)"},
      {"graph.max_redraws", "10000", "erdos_renyi: cap on connectivity redraws"},
      {"graph.file", "", "file: edge-list path"},
      {"gossip.c", "0.3333333333333333", "lazy mixing parameter, in (0, 1/2)"},
      {"solver.algorithm", "datos", "run: datos | local_datos | adaptive_dys | pg_extra"},
      {"solver.algorithms", "datos,local_datos,pg_extra", "compare: comma-separated algorithm list"},
      {"solver.alpha_init", "10", "initial stepsize alpha^{-1}"},
      {"solver.delta", "0.9", "line-search curvature margin"},
      {"solver.eta", "0.5", "line-search shrink factor"},
      {"solver.max_trials", "60", "line-search trial cap"},
      {"solver.slack", "1e-12", "line-search relative slack"},
      {"solver.k_max", "1000", "round limit"},
      {"solver.stop", "0", "stop when consensus error + |gap| drops below this (0: off)"},
      {"solver.seed", "", "initialization seed (default: derived from seed)"},
      {"solver.global_min", "broadcast", "datos min-consensus: broadcast | flooding"},
      {"budget.kind", "fixed", "fixed | drop_reset"},
      {"budget.beta", "1", "budget scale"},
      {"budget.p", "2", "budget exponent in rounds (> 1)"},
      {"budget.q", "2", "drop_reset: exponent in drops (> 1)"},
      {"budget.eta_prime", "0.7", "drop_reset: drop threshold, in (eta, 1)"},
      {"pg_extra.alpha", "0.01", "pg_extra fixed stepsize"},
      {"reference.enabled", "true", "compute x*, u* for gap metrics"},
      {"reference.tol", "1e-12", "reference residual tolerance"},
      {"reference.max_iter", "200000", "reference iteration cap"},
      {"reference.cache", "true", "store/reuse reference solutions under <out>/ref_cache"},
      {"output.dir", "out", "output directory"},
      {"output.metrics", "gap_surrogate,consensus_err,alpha_min", "per-metric k,value plot files"},
  };
  return keys;
}

class FlatConfig {
 public:
  static FlatConfig parse(std::istream& is) {
    FlatConfig c;
    std::string line;
    int lineno = 0;
    std::map<std::string, bool> known;
    for (const auto& k : config_schema()) known[k.name] = true;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      const std::string t = trim(line);
      if (t.empty()) continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
      if (!known.count(key)) throw ConfigError(key, "unknown key (line " + std::to_string(lineno) + ")");
      if (c.given_.count(key)) throw ConfigError(key, "given twice (line " + std::to_string(lineno) + ")");
      c.given_[key] = value;
    }
    return c;
  }
  static FlatConfig load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("", "cannot open " + path.string());
    return parse(is);
  }

  void set(const std::string& key, const std::string& value) { given_[key] = value; }
  bool has(const std::string& key) const { return given_.count(key) > 0; }

  std::string str(const std::string& key) const {
    if (auto it = given_.find(key); it != given_.end()) return it->second;
    for (const auto& k : config_schema())
      if (k.name == key) return k.default_value;
    throw ConfigError(key, "not a schema key");
  }
  double num(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      const double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected a number, got '" + v + "'");
    }
  }
  long integer(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      const long d = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected an integer, got '" + v + "'");
    }
  }
  std::uint64_t u64(const std::string& key) const {
    const std::string v = str(key);
    try {
      std::size_t pos = 0;
      if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
      const auto d = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key, "expected an unsigned 64-bit integer, got '" + v + "'");
    }
  }
  bool boolean(const std::string& key) const {
    const std::string v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
  }
  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(str(key));
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!trim(tok).empty()) out.push_back(trim(tok));
    return out;
  }

  /// Every schema key with its effective value, in schema order.
  std::vector<std::pair<std::string, std::string>> resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : config_schema()) out.emplace_back(k.name, str(k.name));
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }
  std::map<std::string, std::string> given_;
};

// ---------------------------------------------------------------------------
// Resolved experiment

struct ExperimentConfig {
  FlatConfig raw;
  std::uint64_t seed = 1;
  std::uint64_t problem_seed = 0, graph_seed = 0;
  std::string problem_kind;
  int m = 0;
  std::string graph_kind;
  double p = 0.5;
  double c = 1.0 / 3.0;
  SolverConfig solver;
  std::vector<Algorithm> algorithms;  // first entry is the `run` algorithm
  bool reference = true;
  ReferenceOptions ref_opt;
  bool ref_cache = true;
  std::filesystem::path out_dir;
  std::vector<std::string> metrics;
};

namespace detail {
template <class F>
auto field(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}
}  // namespace detail

/// Resolves and range-checks every field before anything runs.
inline ExperimentConfig resolve_config(const FlatConfig& raw) {
  ExperimentConfig e;
  e.raw = raw;
  e.seed = raw.u64("seed");
  e.problem_seed = raw.str("problem.seed").empty() ? derive_seed(e.seed, 1) : raw.u64("problem.seed");
  e.graph_seed = raw.str("graph.seed").empty() ? derive_seed(e.seed, 2) : raw.u64("graph.seed");
  e.solver.seed = raw.str("solver.seed").empty() ? derive_seed(e.seed, 3) : raw.u64("solver.seed");

  e.problem_kind = raw.str("problem.kind");
  if (e.problem_kind != "elastic_net" && e.problem_kind != "logistic_l1" && e.problem_kind != "covariance_mle")
    throw ConfigError("problem.kind", "expected elastic_net, logistic_l1 or covariance_mle, got '" + e.problem_kind + "'");
  if (raw.integer("problem.n") < 1) throw ConfigError("problem.n", "must be >= 1");
  if (raw.integer("problem.d") < 1) throw ConfigError("problem.d", "must be >= 1");
  if (raw.integer("problem.d_mat") < 1) throw ConfigError("problem.d_mat", "must be >= 1");
  if (!(raw.num("problem.lambda") >= 0.0)) throw ConfigError("problem.lambda", "must be >= 0");
  if (!(raw.num("problem.a") > 0.0 && raw.num("problem.a") <= raw.num("problem.b")))
    throw ConfigError("problem.a", "requires 0 < a <= b");
  if (const double s = raw.num("problem.trace_sign"); s != 1.0 && s != -1.0)
    throw ConfigError("problem.trace_sign", "must be +1 or -1");
  if (const auto r = raw.str("problem.label_rule"); r != "auto" && r != "parity" && r != "sign")
    throw ConfigError("problem.label_rule", "expected auto, parity or sign");

  e.m = static_cast<int>(raw.integer("graph.m"));
  if (e.m < 1) throw ConfigError("graph.m", "must be >= 1");
  e.graph_kind = raw.str("graph.kind");
  const std::vector<std::string> kinds{"erdos_renyi", "path", "ring", "star", "complete", "file"};
  if (std::find(kinds.begin(), kinds.end(), e.graph_kind) == kinds.end())
    throw ConfigError("graph.kind", "unknown graph kind '" + e.graph_kind + "'");
  e.p = raw.num("graph.p");
  if (!(e.p > 0.0 && e.p <= 1.0)) throw ConfigError("graph.p", "p = " + raw.str("graph.p") + " outside (0, 1]");
  if (raw.integer("graph.max_redraws") < 0) throw ConfigError("graph.max_redraws", "must be >= 0");
  if (e.graph_kind == "file" && raw.str("graph.file").empty()) throw ConfigError("graph.file", "required for kind file");

  e.c = raw.num("gossip.c");
  if (!(e.c > 0.0 && e.c < 0.5))
    throw ConfigError("gossip.c", "c = " + raw.str("gossip.c") + " outside the open interval (0, 1/2)");

  auto& s = e.solver;
  s.alpha_init = raw.num("solver.alpha_init");
  if (!(s.alpha_init > 0.0)) throw ConfigError("solver.alpha_init", "must be > 0");
  s.ls.delta = raw.num("solver.delta");
  if (!(s.ls.delta > 0.0 && s.ls.delta < 1.0)) throw ConfigError("solver.delta", "must lie in (0, 1)");
  s.ls.eta = raw.num("solver.eta");
  if (!(s.ls.eta > 0.0 && s.ls.eta < 1.0)) throw ConfigError("solver.eta", "must lie in (0, 1)");
  s.ls.max_trials = static_cast<int>(raw.integer("solver.max_trials"));
  if (s.ls.max_trials < 1) throw ConfigError("solver.max_trials", "must be >= 1");
  s.ls.slack = raw.num("solver.slack");
  if (!(s.ls.slack >= 0.0)) throw ConfigError("solver.slack", "must be >= 0");
  s.k_max = static_cast<int>(raw.integer("solver.k_max"));
  if (s.k_max < 0) throw ConfigError("solver.k_max", "must be >= 0");
  s.stop = raw.num("solver.stop");
  const std::string gm = raw.str("solver.global_min");
  if (gm == "broadcast") s.global_min = GlobalMinMode::Broadcast;
  else if (gm == "flooding") s.global_min = GlobalMinMode::Flooding;
  else throw ConfigError("solver.global_min", "expected broadcast or flooding");

  const std::string bk = raw.str("budget.kind");
  if (bk == "fixed") s.budget.kind = BudgetKind::Fixed;
  else if (bk == "drop_reset") s.budget.kind = BudgetKind::DropReset;
  else throw ConfigError("budget.kind", "expected fixed or drop_reset");
  s.budget.beta = raw.num("budget.beta");
  s.budget.p = raw.num("budget.p");
  s.budget.q = raw.num("budget.q");
  s.budget.eta_prime = raw.num("budget.eta_prime");
  detail::field("budget", [&] {
    s.budget.validate(s.ls.eta);
    return 0;
  });
  s.pg_extra_alpha = raw.num("pg_extra.alpha");
  if (!(s.pg_extra_alpha > 0.0)) throw ConfigError("pg_extra.alpha", "must be > 0");

  e.algorithms.push_back(detail::field("solver.algorithm", [&] { return parse_algorithm(raw.str("solver.algorithm")); }));
  std::vector<Algorithm> cmp;
  for (const auto& a : raw.list("solver.algorithms"))
    cmp.push_back(detail::field("solver.algorithms", [&] { return parse_algorithm(a); }));
  if (cmp.empty()) throw ConfigError("solver.algorithms", "empty list");
  e.algorithms.insert(e.algorithms.end(), cmp.begin(), cmp.end());

  e.reference = raw.boolean("reference.enabled");
  e.ref_opt.tol = raw.num("reference.tol");
  if (!(e.ref_opt.tol > 0.0)) throw ConfigError("reference.tol", "must be > 0");
  e.ref_opt.max_iter = static_cast<int>(raw.integer("reference.max_iter"));
  if (e.ref_opt.max_iter < 1) throw ConfigError("reference.max_iter", "must be >= 1");
  e.ref_cache = raw.boolean("reference.cache");
  e.out_dir = raw.str("output.dir");
  e.metrics = raw.list("output.metrics");
  for (const auto& mname : e.metrics)
    if (std::find(plot_metric_names().begin(), plot_metric_names().end(), mname) == plot_metric_names().end())
      throw ConfigError("output.metrics", "unknown metric '" + mname + "'");
  return e;
}

inline std::vector<Algorithm> compare_algorithms(const ExperimentConfig& e) {
  return {e.algorithms.begin() + 1, e.algorithms.end()};
}

/// Canonical text of every key that influences the problem instance (for
/// reference-cache keys).
inline std::string problem_key(const ExperimentConfig& e) {
  std::ostringstream os;
  os << "kind=" << e.problem_kind << "|m=" << e.m << "|seed=" << e.problem_seed;
  for (const auto& [k, v] : e.raw.resolved())
    if (k.rfind("problem.", 0) == 0 && k != "problem.seed") os << '|' << k << '=' << v;
  return os.str();
}

inline ProblemInstance build_problem(const ExperimentConfig& e) {
  const auto& r = e.raw;
  const auto n = static_cast<Eigen::Index>(r.integer("problem.n"));
  const auto d = static_cast<Eigen::Index>(r.integer("problem.d"));
  const double lambda = r.num("problem.lambda");
  if (e.problem_kind == "elastic_net")
    return elastic_net(e.problem_seed, e.m, n, d, lambda,
                       default_gamma_schedule(e.m, r.num("problem.gamma_base"), r.num("problem.gamma_step")));
  if (e.problem_kind == "logistic_l1") {
    if (r.str("problem.data").empty())
      return logistic_l1(synthetic_classification(e.problem_seed, e.m, n, d, r.num("problem.noise")), lambda);
    const std::string rule_s = r.str("problem.label_rule");
    const LabelRule rule = rule_s == "parity" ? LabelRule::Parity : rule_s == "sign" ? LabelRule::Sign : LabelRule::Auto;
    const Dataset all = read_libsvm(r.str("problem.data"), d, r.integer("problem.limit"), rule);
    const Shards sh = split_dataset(all, e.m);
    return logistic_l1(sh.parts, lambda);
  }
  const auto side = static_cast<Eigen::Index>(r.integer("problem.d_mat"));
  return covariance_mle(e.problem_seed, e.m, n, default_covariance(e.problem_seed, side), r.num("problem.a"),
                        r.num("problem.b"), r.num("problem.trace_sign"));
}

inline NetworkGraph build_graph(const ExperimentConfig& e) {
  const auto& r = e.raw;
  if (e.graph_kind == "erdos_renyi")
    return generate_erdos_renyi(e.m, e.p, e.graph_seed, static_cast<int>(r.integer("graph.max_redraws")));
  if (e.graph_kind == "path") return path_graph(e.m);
  if (e.graph_kind == "ring") return ring_graph(e.m);
  if (e.graph_kind == "star") return star_graph(e.m);
  if (e.graph_kind == "complete") return complete_graph(e.m);
  NetworkGraph g = load_edge_list(r.str("graph.file"));
  if (g.size() != e.m) throw ConfigError("graph.file", "edge list has m=" + std::to_string(g.size()) + ", graph.m is " +
                                                           std::to_string(e.m));
  return g;
}

// ---------------------------------------------------------------------------
// Commands

struct Experiment {
  ExperimentConfig cfg;
  ProblemInstance problem;
  NetworkGraph graph;
  GossipMatrix gossip;
  std::optional<ReferencePoint> reference;
};

inline Experiment prepare(const ExperimentConfig& cfg) {
  Experiment ex{cfg, build_problem(cfg), build_graph(cfg), {}, std::nullopt};
  ex.gossip = lazy_mix(metropolis_weights(ex.graph), cfg.c);
  if (cfg.reference) {
    std::optional<std::filesystem::path> cache;
    if (cfg.ref_cache) cache = cfg.out_dir / "ref_cache";
    ex.reference = solve_cached(ex.problem, problem_key(cfg), cfg.ref_opt, cache).reference();
  }
  return ex;
}

inline RunTrace run_experiment(const Experiment& ex, Algorithm algo) {
  RunOptions opt;
  opt.reference = ex.reference;
  opt.config_echo = ex.cfg.raw.resolved();
  return run(ex.problem, ex.graph, ex.gossip, algo, ex.cfg.solver, opt);
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

inline std::string trace_text(const RunTrace& t) {
  std::ostringstream os;
  write_trace_csv(os, t);
  return os.str();
}

inline std::string summary_line(const RunTrace& t) {
  const auto& last = t.rows.back();
  std::ostringstream os;
  long vec = 0, sc = 0, bc = 0;
  for (const auto& r : t.rows) {
    vec += r.vec_msgs;
    sc += r.scalar_msgs;
    bc += r.broadcast_msgs;
  }
  os << t.algorithm << ": rounds=" << last.k << " final_gap="
     << (last.gap_surrogate ? format_double(*last.gap_surrogate) : std::string("n/a"))
     << " consensus_err=" << format_double(last.consensus_err) << " messages(vec/scalar/broadcast)=" << vec << '/'
     << sc << '/' << bc << " stop=" << t.stop_reason;
  return os.str();
}

struct CommandOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
};

inline ExperimentConfig load_experiment(const std::filesystem::path& path, const CommandOverrides& ov) {
  FlatConfig raw = FlatConfig::load(path);
  if (ov.seed) raw.set("seed", std::to_string(*ov.seed));
  if (ov.out_dir) raw.set("output.dir", ov.out_dir->string());
  return resolve_config(raw);
}

inline void emit_plots(const std::filesystem::path& dir, const RunTrace& t, const std::vector<std::string>& metrics,
                       const std::string& prefix) {
  for (const auto& mname : metrics) {
    std::ostringstream os;
    write_plot_csv(os, t, mname);
    write_text(dir / (prefix + mname + ".csv"), os.str());
  }
}

/// Returns the process exit status; messages go to `out` / `err`.
inline int cmd_run(const std::filesystem::path& config, const CommandOverrides& ov, std::ostream& out,
                   std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_experiment(config, ov);
    const Experiment ex = prepare(cfg);
    const RunTrace t = run_experiment(ex, cfg.algorithms.front());
    std::filesystem::create_directories(cfg.out_dir);
    write_text(cfg.out_dir / "trace.csv", trace_text(t));
    emit_plots(cfg.out_dir, t, cfg.metrics, "");
    out << summary_line(t) << '\n';
    return 0;
  } catch (const EngineError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

/// Merged table aligned on k: per algorithm, every trace column except k,
/// prefixed with "<algorithm>:". Rows missing for an algorithm are empty. A
/// single trace merges to its own table (header and rows, no prefix).
inline std::string merge_traces(const std::vector<RunTrace>& traces) {
  if (traces.empty()) throw Error("merge_traces: no traces");
  std::ostringstream os;
  if (traces.size() == 1) {
    os << kTraceHeader << '\n';
    for (const auto& r : traces.front().rows) write_trace_row(os, r);
    return os.str();
  }
  long k_max = 0;
  for (const auto& t : traces) k_max = std::max(k_max, t.rows.back().k);
  os << "k";
  const std::string cols = std::string(kTraceHeader).substr(2);
  for (const auto& t : traces) {
    std::stringstream ss(cols);
    std::string c;
    while (std::getline(ss, c, ',')) os << ',' << t.algorithm << ':' << c;
  }
  os << '\n';
  for (long k = 0; k <= k_max; ++k) {
    os << k;
    for (const auto& t : traces) {
      if (k < static_cast<long>(t.rows.size())) {
        std::ostringstream row;
        write_trace_row(row, t.rows[static_cast<std::size_t>(k)]);
        std::string s = row.str();
        s.pop_back();
        os << s.substr(s.find(','));
      } else {
        os << std::string(9, ',');
      }
    }
    os << '\n';
  }
  return os.str();
}

inline int cmd_compare(const std::filesystem::path& config, const CommandOverrides& ov, std::ostream& out,
                       std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_experiment(config, ov);
    const Experiment ex = prepare(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    std::vector<RunTrace> traces;
    for (Algorithm a : compare_algorithms(cfg)) {
      traces.push_back(run_experiment(ex, a));
      const auto& t = traces.back();
      write_text(cfg.out_dir / ("trace_" + t.algorithm + ".csv"), trace_text(t));
      emit_plots(cfg.out_dir, t, cfg.metrics, t.algorithm + "_");
      out << summary_line(t) << '\n';
    }
    write_text(cfg.out_dir / "compare.csv", merge_traces(traces));
    return 0;
  } catch (const EngineError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace datos
