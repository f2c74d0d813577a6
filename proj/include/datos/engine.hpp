#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "datos/core.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/proxops.hpp"
#include "datos/rng.hpp"
#include "datos/stepsize.hpp"

namespace datos {

// ---------------------------------------------------------------------------
// Simulated synchronous network

struct MessageLedger {
  long vector_msgs = 0;    // d-dimensional neighbor transmissions
  long scalar_msgs = 0;    // scalar neighbor transmissions
  long broadcast_msgs = 0; // network-wide scalar broadcasts

  MessageLedger operator-(const MessageLedger& o) const {
    return {vector_msgs - o.vector_msgs, scalar_msgs - o.scalar_msgs, broadcast_msgs - o.broadcast_msgs};
  }
  bool operator==(const MessageLedger&) const = default;
};

/// Every inter-agent data dependency of the solvers goes through this
/// channel. Agent i only ever reads values from j in {i} U N_i, and each
/// exchange is charged to the ledger. With recording enabled, the set of
/// ordered (reader, sender) pairs is kept for inspection.
class GossipChannel {
 public:
  GossipChannel(const NetworkGraph& g, const GossipMatrix& w) : graph_(&g), w_(&w) {
    if (w.size() != g.size()) throw Error("gossip: matrix size does not match graph");
    for (int i = 0; i < g.size(); ++i)
      for (int j = 0; j < g.size(); ++j)
        if (i != j && !g.has_edge(i, j) && w.w(i, j) != 0.0)
          throw Error("gossip: W has weight on non-edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }

  const NetworkGraph& graph() const { return *graph_; }
  const GossipMatrix& gossip() const { return *w_; }
  int size() const { return graph_->size(); }
  const MessageLedger& ledger() const { return ledger_; }

  void enable_recording(bool on = true) { recording_ = on; }
  const std::set<Edge>& touched() const { return touched_; }

  /// W X, one vector message per edge direction.
  Stack mix(const Stack& x) {
    const int m = size();
    Stack out(x.rows(), x.cols());
    for (int i = 0; i < m; ++i) {
      auto row = out.row(i);
      row = w_->w(i, i) * x.row(i);
      for (int j : graph_->neighbors(i)) {
        touch(i, j);
        row += w_->w(i, j) * x.row(j);
      }
    }
    ledger_.vector_msgs += 2 * static_cast<long>(graph_->edge_count());
    return out;
  }

  /// Y = (I - W) diag(alpha)^{-1} X, assuming neighbors already hold x_j
  /// (from a prior mix); only the current alpha_j travel, as scalars.
  Stack laplacian_scaled(const Stack& x, std::span<const double> alphas) {
    const int m = size();
    Stack out(x.rows(), x.cols());
    for (int i = 0; i < m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      auto row = out.row(i);
      row = ((1.0 - w_->w(i, i)) / alphas[ui]) * x.row(i);
      for (int j : graph_->neighbors(i)) {
        touch(i, j);
        row -= (w_->w(i, j) / alphas[static_cast<std::size_t>(j)]) * x.row(j);
      }
    }
    ledger_.scalar_msgs += 2 * static_cast<long>(graph_->edge_count());
    return out;
  }

  /// min over the closed neighborhood {i} U N_i, one scalar per edge direction.
  std::vector<double> neighborhood_min(std::span<const double> v) {
    const int m = size();
    std::vector<double> out(v.begin(), v.end());
    for (int i = 0; i < m; ++i)
      for (int j : graph_->neighbors(i)) {
        touch(i, j);
        out[static_cast<std::size_t>(i)] = std::min(out[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
      }
    ledger_.scalar_msgs += 2 * static_cast<long>(graph_->edge_count());
    return out;
  }

  /// Exact network-wide min, each agent broadcasting its scalar once.
  double broadcast_min(std::span<const double> v) {
    ledger_.broadcast_msgs += size();
    return *std::min_element(v.begin(), v.end());
  }

  /// Network-wide min by flooding: diameter rounds of neighborhood min.
  double flooding_min(std::span<const double> v) {
    std::vector<double> cur(v.begin(), v.end());
    for (int r = 0; r < graph_->diameter(); ++r) cur = neighborhood_min(cur);
    return cur.front();
  }

 private:
  void touch(int i, int j) {
    if (recording_) touched_.emplace(i, j);
  }

  const NetworkGraph* graph_;
  const GossipMatrix* w_;
  MessageLedger ledger_;
  bool recording_ = false;
  std::set<Edge> touched_;
};

// ---------------------------------------------------------------------------
// Configuration and state

enum class GlobalMinMode { Broadcast, Flooding };

struct SolverConfig {
  double alpha_init = 10.0;  // alpha^{-1}
  LineSearchParams ls;       // eta, delta
  BudgetParams budget;
  int k_max = 1000;
  double stop = 0.0;         // <= 0 disables early stopping
  std::uint64_t seed = 0;
  GlobalMinMode global_min = GlobalMinMode::Broadcast;
  bool force_global_min = false;  // local variant: replace neighborhood min by a global one
  double pg_extra_alpha = 0.01;   // fixed stepsize of the PG-EXTRA baseline

  void validate(double c) const {
    if (!(alpha_init > 0.0)) throw Error("alpha_init must be > 0");
    ls.validate();
    budget.validate(ls.eta);
    if (!(c > 0.0 && c < 0.5)) throw Error("c = " + std::to_string(c) + " outside the open interval (0, 1/2)");
    if (k_max < 0) throw Error("k_max must be >= 0");
    if (!(pg_extra_alpha > 0.0)) throw Error("pg_extra alpha must be > 0");
  }
};

/// Network algorithm state after round k-1 (about to run round k).
struct SolverState {
  Stack X, S, D, T, A;
  Stack X_prev;  // X^{k-1}
  Stack S0;      // S^0, kept for the candidate-stepsize ratio
  std::vector<double> alphas;  // alpha_i^{k-1}
  int k = 0;
};

inline SolverState make_state(const Stack& x0, const Stack& s0, double alpha_init) {
  SolverState st;
  st.X = x0;
  st.S = s0;
  st.S0 = s0;
  st.D = Stack::Zero(x0.rows(), x0.cols());
  st.T = st.D;
  st.A = st.D;
  st.X_prev = st.D;
  st.alphas.assign(static_cast<std::size_t>(x0.rows()), alpha_init);
  return st;
}

/// X^0, S^0 i.i.d. standard normal from the run seed, X^0 shifted by the
/// problem's start center when it declares one. Problems with a restricted
/// smooth domain get X^0 replaced by prox_{R}(X^0) (unit step).
inline SolverState initial_state(const ProblemInstance& prob, const SolverConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0x1A17ULL));
  Stack x0 = rng.normal_stack(prob.m, prob.d);
  const Stack s0 = rng.normal_stack(prob.m, prob.d);
  if (prob.meta.start_center) x0.rowwise() += prob.meta.start_center->transpose();
  if (prob.restricted_domain) x0 = prox_rowwise(x0, 1.0, prob.regs);
  return make_state(x0, s0, cfg.alpha_init);
}

struct RoundReport {
  int k = 0;
  std::vector<double> candidates;    // alpha~_i
  std::vector<double> ls_alphas;     // per-agent line-search output
  std::vector<double> alphas;        // stepsizes used in the update (post consensus)
  std::vector<int> trials;
  std::vector<double> budget;        // n^k (or m^k per agent) granted this round
  MessageLedger messages;            // this round only

  int total_trials() const {
    int t = 0;
    for (int v : trials) t += v;
    return t;
  }
};

class EngineError : public Error {
 public:
  EngineError(const std::string& what, int round, int agent) : Error(what), round_(round), agent_(agent) {}
  int round() const { return round_; }
  int agent() const { return agent_; }

 private:
  int round_;
  int agent_;
};

/// Outcome of the communication step: grad F(X), W X and W (grad F + S + D).
struct Exchange {
  Stack G, Xh, Dh;
};

inline Exchange communicate(const SolverState& st, const ProblemInstance& prob, GossipChannel& ch) {
  Exchange ex;
  ex.G = prob.gradients(st.X);
  ex.Xh = ch.mix(st.X);
  ex.Dh = ch.mix(ex.G + st.S + st.D);
  return ex;
}

/// Per-agent backtracking around x_i along x+ = xh_i - alpha dh_i.
inline LineSearchResult agent_linesearch(int i, double alpha0, const SolverState& st, const Exchange& ex,
                                         const ProblemInstance& prob, const SolverConfig& cfg) {
  const auto& f = *prob.losses[static_cast<std::size_t>(i)];
  const Vector xi = st.X.row(i).transpose();
  const double fi = f.value(xi);
  try {
    return linesearch(alpha0, xi, fi, ex.G.row(i).transpose(), ex.Xh.row(i).transpose(),
                      -Vector(ex.Dh.row(i).transpose()), f, cfg.ls);
  } catch (const Error& e) {
    throw EngineError(std::string(e.what()) + " [agent " + std::to_string(i) + ", round " + std::to_string(st.k) + "]",
                      st.k, i);
  }
}

/// Primal/dual/tracking update with a common stepsize alpha.
inline void datos_update(SolverState& st, const Exchange& ex, double alpha, const ProblemInstance& prob) {
  Stack a_next = ex.Xh - alpha * ex.Dh;
  Stack x_next = prox_rowwise(a_next + alpha * st.S, alpha, prob.regs);
  Stack s_next = st.S + (a_next - x_next) / alpha;
  Stack d_next = ex.Dh - ex.G - st.S + (st.X - ex.Xh) / alpha;
  Stack t_next = st.T - st.S - st.D - ex.G + st.X / alpha;
  st.X_prev = std::move(st.X);
  st.X = std::move(x_next);
  st.A = std::move(a_next);
  st.S = std::move(s_next);
  st.D = std::move(d_next);
  st.T = std::move(t_next);
  std::fill(st.alphas.begin(), st.alphas.end(), alpha);
  ++st.k;
}

/// One round of the global min-consensus algorithm.
inline RoundReport datos_round(SolverState& st, const ProblemInstance& prob, GossipChannel& ch,
                               const SolverConfig& cfg, BudgetState& budget) {
  const MessageLedger before = ch.ledger();
  const int m = prob.m;
  RoundReport rep;
  rep.k = st.k;
  const Exchange ex = communicate(st, prob, ch);
  const double n_k = budget_peek(budget);
  rep.budget.assign(static_cast<std::size_t>(m), n_k);
  for (int i = 0; i < m; ++i) {
    const double cand = candidate_alpha_global(st.alphas[static_cast<std::size_t>(i)], st.A.row(i).transpose(),
                                               st.X_prev.row(i).transpose(), st.S.row(i).transpose(),
                                               st.S0.row(i).transpose(), st.T.row(i).transpose(), ch.gossip().c, n_k,
                                               cfg.ls.delta);
    const auto res = agent_linesearch(i, cand, st, ex, prob, cfg);
    rep.candidates.push_back(cand);
    rep.ls_alphas.push_back(res.alpha);
    rep.trials.push_back(res.trials);
  }
  const double alpha = cfg.global_min == GlobalMinMode::Broadcast ? ch.broadcast_min(rep.ls_alphas)
                                                                  : ch.flooding_min(rep.ls_alphas);
  rep.alphas.assign(static_cast<std::size_t>(m), alpha);
  datos_update(st, ex, alpha, prob);
  budget = budget_next(budget, alpha).state;
  rep.messages = ch.ledger() - before;
  return rep;
}

/// Primal/dual update with per-agent stepsizes Lambda = diag(alphas).
inline void local_update(SolverState& st, const Exchange& ex, std::span<const double> alphas,
                         const ProblemInstance& prob, GossipChannel& ch) {
  const Stack d_lambda = ch.laplacian_scaled(st.X, alphas);
  const Eigen::Map<const Vector> lam(alphas.data(), static_cast<Eigen::Index>(alphas.size()));
  Stack a_next = ex.Xh - lam.asDiagonal() * ex.Dh;
  Stack x_next = prox_rowwise(a_next + lam.asDiagonal() * st.S, alphas, prob.regs);
  Stack s_next = st.S + lam.cwiseInverse().asDiagonal() * (a_next - x_next);
  Stack d_next = ex.Dh + d_lambda - ex.G - st.S;
  st.X_prev = std::move(st.X);
  st.X = std::move(x_next);
  st.A = std::move(a_next);
  st.S = std::move(s_next);
  st.D = std::move(d_next);
  st.alphas.assign(alphas.begin(), alphas.end());
  ++st.k;
}

/// One round of the neighbor-only (local min-consensus) algorithm. Each agent
/// owns a budget state driven by its own post-consensus stepsize.
inline RoundReport local_datos_round(SolverState& st, const ProblemInstance& prob, GossipChannel& ch,
                                     const SolverConfig& cfg, std::vector<BudgetState>& budgets) {
  const MessageLedger before = ch.ledger();
  const int m = prob.m;
  if (static_cast<int>(budgets.size()) != m) throw Error("local_datos: one budget state per agent required");
  RoundReport rep;
  rep.k = st.k;
  const Exchange ex = communicate(st, prob, ch);
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double m_k = budget_peek(budgets[ui]);
    const double cand = candidate_alpha_local(st.alphas[ui], m_k);
    const auto res = agent_linesearch(i, cand, st, ex, prob, cfg);
    rep.budget.push_back(m_k);
    rep.candidates.push_back(cand);
    rep.ls_alphas.push_back(res.alpha);
    rep.trials.push_back(res.trials);
  }
  if (cfg.force_global_min)
    rep.alphas.assign(static_cast<std::size_t>(m), ch.broadcast_min(rep.ls_alphas));
  else
    rep.alphas = ch.neighborhood_min(rep.ls_alphas);
  local_update(st, ex, rep.alphas, prob, ch);
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    budgets[ui] = budget_next(budgets[ui], rep.alphas[ui]).state;
  }
  rep.messages = ch.ledger() - before;
  return rep;
}

// ---------------------------------------------------------------------------
// Lifted-form oracle: the same splitting written on the stacked [X; X~]
// variables with explicit consensus matrix L = (I - W)^{1/2} and metric
// M = W^{1/2}. Dense and centralized; only used to cross-check the network
// recursions.

/// Symmetric PSD square root with eigenvalues clipped at 0.
inline Matrix sym_sqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()));
  const Vector lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix out = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

struct LiftedState {
  Stack X, S, A;     // primal block
  Stack Xt, St, At;  // slack block
  Stack Y;           // multiplier of the consensus constraint L X + M X~ = 0
  Matrix L, M;
  int k = 0;
};

inline LiftedState make_lifted(const Stack& x0, const Stack& s0, const GossipMatrix& w) {
  LiftedState ls;
  const auto m = w.w.rows();
  ls.X = x0;
  ls.S = s0;
  ls.A = Stack::Zero(x0.rows(), x0.cols());
  ls.Xt = ls.A;
  ls.St = ls.A;
  ls.At = ls.A;
  ls.Y = ls.A;
  ls.L = sym_sqrt(Matrix::Identity(m, m) - w.w);
  ls.M = sym_sqrt(w.w);
  return ls;
}

inline void lifted_round(LiftedState& s, const ProblemInstance& prob, double alpha) {
  const Stack g = prob.gradients(s.X);
  const Stack primal = s.X - alpha * s.S - alpha * g;
  const Stack slack = s.Xt - alpha * s.St;
  // Y-subproblem closed form (L^2 + M^2 = I).
  Stack y_next = (s.L * primal + s.M * slack) / alpha;
  Stack a_next = primal - alpha * (s.L * y_next);
  Stack at_next = slack - alpha * (s.M * y_next);
  Stack x_next = prox_rowwise(a_next + alpha * s.S, alpha, prob.regs);
  Stack xt_next = Stack::Zero(s.X.rows(), s.X.cols());  // prox of the indicator of {0}
  s.S = s.S + (a_next - x_next) / alpha;
  s.St = s.St + (at_next - xt_next) / alpha;
  s.X = std::move(x_next);
  s.Xt = std::move(xt_next);
  s.A = std::move(a_next);
  s.At = std::move(at_next);
  s.Y = std::move(y_next);
  ++s.k;
}

// ---------------------------------------------------------------------------
// Centralized adaptive Davis-Yin splitting for min f + r1 + r2:
//   a  = prox_{alpha r2}(x - alpha s - alpha grad f(x))   (backtracked)
//   x+ = prox_{alpha r1}(a + alpha s)
//   s+ = s + (a - x+) / alpha

struct DysIterate {
  int k = 0;
  Vector x, a, s;
  double alpha = 0.0;
  double budget = 0.0;
  int trials = 0;
};

class AdaptiveDys {
 public:
  AdaptiveDys(LossPtr f, ProxSpec r1, ProxSpec r2, Vector x0, Vector s0, const SolverConfig& cfg)
      : f_(std::move(f)), r1_(std::move(r1)), r2_(std::move(r2)), cfg_(cfg) {
    cfg_.ls.validate();
    cfg_.budget.validate(cfg_.ls.eta);
    if (!(cfg_.alpha_init > 0.0)) throw Error("alpha_init must be > 0");
    x_ = std::move(x0);
    s_ = std::move(s0);
    s0_ = s_;
    a_prev_ = Vector::Zero(x_.size());
    x_prev_ = Vector::Zero(x_.size());
    alpha_prev_ = cfg_.alpha_init;
    budget_ = make_budget(cfg_.budget, cfg_.alpha_init);
  }

  DysIterate step() {
    const double fx = f_->value(x_);
    if (!std::isfinite(fx)) throw EngineError("adaptive_dys: f is not finite at the iterate", k_, 0);
    const Vector g = f_->gradient(x_);
    const double n_k = budget_peek(budget_);
    const double ratio =
        ((1.0 - cfg_.ls.delta) / 4.0) * ratio_or_inf((a_prev_ - x_prev_).squaredNorm(), (s_ - s0_).squaredNorm());
    const double cand = std::sqrt(alpha_prev_ * alpha_prev_ + std::min(ratio, n_k));
    LineSearchResult res;
    try {
      res = backtrack(
          cand, x_, fx, g, [&](double a) { return apply_prox(r2_, x_ - a * s_ - a * g, a); }, *f_, cfg_.ls);
    } catch (const Error& e) {
      throw EngineError(std::string(e.what()) + " [round " + std::to_string(k_) + "]", k_, 0);
    }
    const double alpha = res.alpha;
    Vector a = std::move(res.point);
    Vector x_next = apply_prox(r1_, a + alpha * s_, alpha);
    s_ = s_ + (a - x_next) / alpha;
    x_prev_ = std::move(x_);
    x_ = std::move(x_next);
    a_prev_ = a;
    alpha_prev_ = alpha;
    budget_ = budget_next(budget_, alpha).state;
    DysIterate it{k_, x_, std::move(a), s_, alpha, n_k, res.trials};
    ++k_;
    return it;
  }

  const Vector& x() const { return x_; }
  const Vector& s() const { return s_; }
  double alpha() const { return alpha_prev_; }
  int round() const { return k_; }

 private:
  LossPtr f_;
  ProxSpec r1_, r2_;
  SolverConfig cfg_;
  Vector x_, s_, s0_, a_prev_, x_prev_;
  double alpha_prev_ = 0.0;
  BudgetState budget_;
  int k_ = 0;
};

// ---------------------------------------------------------------------------
// PG-EXTRA baseline (fixed stepsize), with W_bar = (I + W) / 2:
//   z^1     = W X^0 - alpha grad F(X^0)
//   z^{k+1} = z^k + W X^k - W_bar X^{k-1} - alpha (grad F(X^k) - grad F(X^{k-1}))
//   X^{k+1} = prox_{alpha R}(z^{k+1})

struct PgExtraState {
  Stack X, X_prev, Z, G_prev, WX_prev;
  int k = 0;
};

inline PgExtraState make_pg_extra(const Stack& x0) {
  PgExtraState s;
  s.X = x0;
  return s;
}

inline RoundReport pg_extra_round(PgExtraState& s, const ProblemInstance& prob, GossipChannel& ch, double alpha) {
  if (!(alpha > 0.0)) throw Error("pg_extra: stepsize must be positive");
  const MessageLedger before = ch.ledger();
  RoundReport rep;
  rep.k = s.k;
  Stack g = prob.gradients(s.X);
  Stack wx = ch.mix(s.X);
  if (s.k == 0) {
    s.Z = wx - alpha * g;
  } else {
    s.Z = s.Z + wx - 0.5 * (s.X_prev + s.WX_prev) - alpha * (g - s.G_prev);
  }
  s.X_prev = s.X;
  s.WX_prev = std::move(wx);
  s.G_prev = std::move(g);
  s.X = prox_rowwise(s.Z, alpha, prob.regs);
  ++s.k;
  rep.alphas.assign(static_cast<std::size_t>(prob.m), alpha);
  rep.trials.assign(static_cast<std::size_t>(prob.m), 0);
  rep.messages = ch.ledger() - before;
  return rep;
}

}  // namespace datos
