#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "datos/core.hpp"
#include "datos/engine.hpp"
#include "datos/metrics.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"

namespace datos {

enum class Algorithm { Datos, LocalDatos, AdaptiveDys, PgExtra };

inline std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Datos: return "datos";
    case Algorithm::LocalDatos: return "local_datos";
    case Algorithm::AdaptiveDys: return "adaptive_dys";
    case Algorithm::PgExtra: return "pg_extra";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "datos") return Algorithm::Datos;
  if (s == "local_datos") return Algorithm::LocalDatos;
  if (s == "adaptive_dys") return Algorithm::AdaptiveDys;
  if (s == "pg_extra") return Algorithm::PgExtra;
  throw Error("unknown algorithm '" + s + "' (expected datos, local_datos, adaptive_dys or pg_extra)");
}

/// What an observer sees after each round of a network algorithm. `before`
/// and `after` are null for the centralized algorithm.
struct RoundView {
  int k = 0;
  const SolverState* before = nullptr;
  const SolverState* after = nullptr;
  const RoundReport* report = nullptr;
  const Stack* x = nullptr;  // iterate after the round (all algorithms)
};

struct RunOptions {
  std::optional<ReferencePoint> reference;  // enables gap and support columns
  std::function<void(const RoundView&)> observer;
  std::vector<std::pair<std::string, std::string>> config_echo;
};

namespace detail {

inline TraceRow make_row(long k, const Stack& x, std::span<const double> alphas, long trials, const MessageLedger& msg,
                         const ProblemInstance& prob, const RunOptions& opt) {
  TraceRow row;
  row.k = k;
  row.alpha_min = *std::min_element(alphas.begin(), alphas.end());
  row.alpha_max = *std::max_element(alphas.begin(), alphas.end());
  row.ls_trials_total = trials;
  row.consensus_err = consensus_error(x);
  if (opt.reference) {
    row.gap_surrogate = optimality_gap(x, prob, *opt.reference);
    if (prob.all_l1()) {
      const Vector mean = x.colwise().mean().transpose();
      row.support_size = static_cast<long>(sign_support(mean, default_support_tol(*opt.reference)).size());
    }
  }
  row.vec_msgs = msg.vector_msgs;
  row.scalar_msgs = msg.scalar_msgs;
  row.broadcast_msgs = msg.broadcast_msgs;
  return row;
}

/// Stop test: consensus error plus |gap| when a reference is known, else
/// consensus error plus the size of the last primal move.
inline bool should_stop(double stop, const TraceRow& row, double move) {
  if (!(stop > 0.0)) return false;
  const double primary = row.gap_surrogate ? std::abs(*row.gap_surrogate) : move;
  return row.consensus_err + primary < stop;
}

}  // namespace detail

/// Runs one algorithm to k_max rounds (or the stop tolerance) and records one
/// trace row for the initial point plus one per executed round.
inline RunTrace run(const ProblemInstance& prob, const NetworkGraph& graph, const GossipMatrix& w, Algorithm algo,
                    const SolverConfig& cfg, const RunOptions& opt = {}) {
  prob.validate();
  if (graph.size() != prob.m) throw Error("run: graph has " + std::to_string(graph.size()) + " agents, problem has " +
                                          std::to_string(prob.m));
  cfg.validate(w.c);
  RunTrace trace;
  trace.algorithm = algorithm_name(algo);
  trace.config = opt.config_echo;
  trace.stop_reason = "k_max";
  GossipChannel ch(graph, w);
  SolverState st = initial_state(prob, cfg);
  const std::vector<double> alpha0(static_cast<std::size_t>(prob.m), cfg.alpha_init);

  if (algo == Algorithm::AdaptiveDys) {
    // Centralized on the aggregate problem from the column mean of X^0, S^0.
    const Vector x0 = st.X.colwise().mean().transpose();
    const Vector s0 = st.S.colwise().mean().transpose();
    const ProxSpec r = prob.aggregate_reg();
    AdaptiveDys dys(prob.aggregate_loss(), r, make_zero(), prob.restricted_domain ? apply_prox(r, x0, 1.0) : x0, s0,
                    cfg);
    Stack x = dys.x().transpose();
    const std::vector<double> a0{cfg.alpha_init};
    trace.rows.push_back(detail::make_row(0, x, a0, 0, {}, prob, opt));
    for (int k = 0; k < cfg.k_max; ++k) {
      const DysIterate it = dys.step();
      const Stack xn = it.x.transpose();
      const double move = (xn - x).norm();
      x = xn;
      const std::vector<double> a{it.alpha};
      trace.rows.push_back(detail::make_row(k + 1, x, a, it.trials, {}, prob, opt));
      if (opt.observer) opt.observer(RoundView{k, nullptr, nullptr, nullptr, &x});
      if (detail::should_stop(cfg.stop, trace.rows.back(), move)) {
        trace.stop_reason = "stop";
        break;
      }
    }
    trace.final_x = x;
    trace.final_s = dys.s().transpose();
    return trace;
  }

  if (algo == Algorithm::PgExtra) {
    PgExtraState ps = make_pg_extra(st.X);
    const std::vector<double> a(static_cast<std::size_t>(prob.m), cfg.pg_extra_alpha);
    trace.rows.push_back(detail::make_row(0, ps.X, a, 0, {}, prob, opt));
    for (int k = 0; k < cfg.k_max; ++k) {
      const Stack before = ps.X;
      const RoundReport rep = pg_extra_round(ps, prob, ch, cfg.pg_extra_alpha);
      trace.rows.push_back(detail::make_row(k + 1, ps.X, a, 0, rep.messages, prob, opt));
      if (opt.observer) opt.observer(RoundView{k, nullptr, nullptr, &rep, &ps.X});
      if (!ps.X.allFinite()) {
        trace.stop_reason = "diverged";
        break;
      }
      if (detail::should_stop(cfg.stop, trace.rows.back(), (ps.X - before).norm())) {
        trace.stop_reason = "stop";
        break;
      }
    }
    trace.final_x = ps.X;
    return trace;
  }

  trace.rows.push_back(detail::make_row(0, st.X, alpha0, 0, {}, prob, opt));
  BudgetState budget = make_budget(cfg.budget, cfg.alpha_init);
  std::vector<BudgetState> budgets(static_cast<std::size_t>(prob.m), budget);
  for (int k = 0; k < cfg.k_max; ++k) {
    const SolverState before = st;
    const RoundReport rep = algo == Algorithm::Datos ? datos_round(st, prob, ch, cfg, budget)
                                                     : local_datos_round(st, prob, ch, cfg, budgets);
    trace.rows.push_back(detail::make_row(k + 1, st.X, st.alphas, rep.total_trials(), rep.messages, prob, opt));
    if (opt.observer) opt.observer(RoundView{k, &before, &st, &rep, &st.X});
    if (detail::should_stop(cfg.stop, trace.rows.back(), (st.X - before.X).norm())) {
      trace.stop_reason = "stop";
      break;
    }
  }
  trace.final_x = st.X;
  trace.final_s = st.S;
  return trace;
}

/// Dual certificate S* harvested from a long high-accuracy run of the global
/// algorithm: the final S once the iterate is consensual at the reference up
/// to `tol`. Returns nullopt if the run does not get there within k_max.
inline std::optional<Stack> harvest_dual(const ProblemInstance& prob, const NetworkGraph& graph, const GossipMatrix& w,
                                         const SolverConfig& cfg, const ReferencePoint& ref, double tol = 1e-10) {
  GossipChannel ch(graph, w);
  SolverState st = initial_state(prob, cfg);
  BudgetState budget = make_budget(cfg.budget, cfg.alpha_init);
  const Stack xs = ref.consensual(prob.m);
  for (int k = 0; k < cfg.k_max; ++k) {
    const Stack s_prev = st.S;
    datos_round(st, prob, ch, cfg, budget);
    if ((st.X - xs).cwiseAbs().maxCoeff() <= tol && (st.S - s_prev).cwiseAbs().maxCoeff() <= tol) return st.S;
  }
  return std::nullopt;
}

}  // namespace datos
