#pragma once

#include <cmath>
#include <functional>
#include <string>

#include "datos/core.hpp"
#include "datos/problems.hpp"

namespace datos {

struct LineSearchParams {
  double eta = 0.5;     // shrink factor
  double delta = 0.9;   // curvature margin
  int max_trials = 60;
  double slack = 1e-12; // relative tolerance on the descent test

  void validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw Error("eta must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw Error("delta must lie in (0, 1)");
    if (max_trials < 1) throw Error("max_trials must be >= 1");
    if (!(slack >= 0.0)) throw Error("slack must be >= 0");
  }
};

class LineSearchFailure : public Error {
 public:
  LineSearchFailure(const std::string& what, double last_alpha) : Error(what), last_alpha_(last_alpha) {}
  double last_alpha() const { return last_alpha_; }

 private:
  double last_alpha_;
};

struct LineSearchResult {
  double alpha = 0.0;
  int trials = 0;
  Vector point;        // accepted trial point x+
  double value = 0.0;  // f(x+)
};

/// Local sufficient-descent test:
///   f(x+) <= f(x1) + <g1, x+ - x1> + delta/(2 alpha) ||x+ - x1||^2 + slack (1 + |f(x1)|).
/// Infinite f(x+) always fails.
inline bool descent_test(double f_plus, double f1, const ConstVecRef& g1, const ConstVecRef& x_plus,
                         const ConstVecRef& x1, double alpha, double delta, double slack) {
  if (!std::isfinite(f_plus)) return false;
  const Vector step = x_plus - x1;
  const double rhs = f1 + g1.dot(step) + delta / (2.0 * alpha) * step.squaredNorm() + slack * (1.0 + std::abs(f1));
  return f_plus <= rhs;
}

/// Geometric backtracking alpha0, eta alpha0, ... over an arbitrary family of
/// trial points alpha -> x+(alpha), testing descent_test around x1.
/// One f evaluation per trial; g1 = grad f(x1) is supplied by the caller.
inline LineSearchResult backtrack(double alpha0, const ConstVecRef& x1, double f1, const ConstVecRef& g1,
                                  const std::function<Vector(double)>& trial_point, const SmoothLoss& f,
                                  const LineSearchParams& params) {
  if (!(alpha0 > 0.0)) throw Error("linesearch: initial stepsize must be positive");
  if (!std::isfinite(f1)) throw Error("linesearch: f(x1) is not finite");
  double alpha = alpha0;
  for (int t = 1; t <= params.max_trials; ++t) {
    Vector xp = trial_point(alpha);
    const double fp = f.value(xp);
    if (descent_test(fp, f1, g1, xp, x1, alpha, params.delta, params.slack))
      return LineSearchResult{alpha, t, std::move(xp), fp};
    if (t < params.max_trials) alpha *= params.eta;
  }
  throw LineSearchFailure("linesearch: no acceptable stepsize within " + std::to_string(params.max_trials) +
                              " trials (last alpha " + std::to_string(alpha) + ")",
                          alpha);
}

/// Backtracking along x+ = x2 + alpha * dir.
inline LineSearchResult linesearch(double alpha0, const ConstVecRef& x1, double f1, const ConstVecRef& g1,
                                   const ConstVecRef& x2, const ConstVecRef& dir, const SmoothLoss& f,
                                   const LineSearchParams& params) {
  const Vector base = x2;
  const Vector d = dir;
  return backtrack(alpha0, x1, f1, g1, [&](double a) -> Vector { return base + a * d; }, f, params);
}

inline LineSearchResult linesearch(double alpha0, const ConstVecRef& x1, const ConstVecRef& x2, const ConstVecRef& dir,
                                   const SmoothLoss& f, const LineSearchParams& params) {
  const double f1 = f.value(x1);
  if (!std::isfinite(f1)) throw Error("linesearch: f(x1) is not finite");
  const Vector g1 = f.gradient(x1);
  return linesearch(alpha0, x1, f1, g1, x2, dir, f, params);
}

/// Candidate stepsize of the global-consensus variant:
///   sqrt(alpha_prev^2 + min(((1-delta)/4) ||a - x_prev||^2 / (||s - s0||^2 + 2c ||t||^2), n_k))
/// with 0/0 read as +inf.
inline double candidate_alpha_global(double alpha_prev, const ConstVecRef& a, const ConstVecRef& x_prev,
                                     const ConstVecRef& s, const ConstVecRef& s0, const ConstVecRef& t, double c,
                                     double n_k, double delta) {
  const double num = (a - x_prev).squaredNorm();
  const double den = (s - s0).squaredNorm() + 2.0 * c * t.squaredNorm();
  const double ratio = ((1.0 - delta) / 4.0) * ratio_or_inf(num, den);
  return std::sqrt(alpha_prev * alpha_prev + std::min(ratio, n_k));
}

/// Candidate stepsize of the neighbor-only variant: sqrt(alpha_prev^2 + m_k).
inline double candidate_alpha_local(double alpha_prev, double m_k) { return std::sqrt(alpha_prev * alpha_prev + m_k); }

// ---------------------------------------------------------------------------
// Summable budget sequences.

enum class BudgetKind { Fixed, DropReset };

struct BudgetParams {
  BudgetKind kind = BudgetKind::Fixed;
  double beta = 1.0;
  double p = 2.0;
  double q = 2.0;
  double eta_prime = 0.7;

  void validate(double eta) const {
    if (!(beta > 0.0)) throw Error("budget: beta must be > 0");
    if (!(p > 1.0)) throw Error("budget: p must be > 1");
    if (kind == BudgetKind::DropReset) {
      if (!(q > 1.0)) throw Error("budget: q must be > 1");
      if (!(eta_prime > eta && eta_prime < 1.0)) throw Error("budget: eta_prime must lie in (eta, 1)");
    }
  }
};

/// Fixed: n^k = beta / (k+1)^p.
/// DropReset: round k is a drop iff alpha^k <= eta' * min_{t<k} alpha^t (the
/// min over no rounds is alpha^{-1}); with r drops so far and tau rounds since
/// the last one (k+1 if none), n^k = beta / ((r+1)^q (tau+1)^p).
struct BudgetState {
  BudgetParams params;
  long k = 0;               // next round index
  double running_min = 0.0; // min of alpha over rounds < k, starting at alpha^{-1}
  int drops = 0;            // r^{k-1}
  long since_last_drop = 0; // tau^{k-1}; tau^{-1} = 0
};

inline BudgetState make_budget(const BudgetParams& params, double alpha_init) {
  BudgetState s;
  s.params = params;
  s.running_min = alpha_init;
  return s;
}

/// Budget the upcoming round may spend, computed from the history of earlier
/// rounds only (the round itself counted as a non-drop).
inline double budget_peek(const BudgetState& s) {
  const auto& pr = s.params;
  if (pr.kind == BudgetKind::Fixed) return pr.beta / std::pow(static_cast<double>(s.k + 1), pr.p);
  return pr.beta / (std::pow(static_cast<double>(s.drops + 1), pr.q) *
                    std::pow(static_cast<double>(s.since_last_drop + 2), pr.p));
}

struct BudgetStep {
  double n = 0.0;
  BudgetState state;
};

/// Advances the budget by one round with the stepsize alpha_k observed after
/// min-consensus; returns n^k (drop status of round k included).
inline BudgetStep budget_next(const BudgetState& s, double alpha_k) {
  if (!(alpha_k > 0.0)) throw Error("budget: stepsize must be positive");
  BudgetStep out;
  out.state = s;
  auto& ns = out.state;
  const auto& pr = s.params;
  if (pr.kind == BudgetKind::Fixed) {
    out.n = pr.beta / std::pow(static_cast<double>(s.k + 1), pr.p);
  } else {
    const bool drop = alpha_k <= pr.eta_prime * s.running_min;
    if (drop) {
      ns.drops = s.drops + 1;
      ns.since_last_drop = 0;
    } else {
      ns.since_last_drop = s.since_last_drop + 1;
    }
    out.n = pr.beta / (std::pow(static_cast<double>(ns.drops + 1), pr.q) *
                       std::pow(static_cast<double>(ns.since_last_drop + 1), pr.p));
  }
  ns.running_min = std::min(s.running_min, alpha_k);
  ns.k = s.k + 1;
  return out;
}

}  // namespace datos
