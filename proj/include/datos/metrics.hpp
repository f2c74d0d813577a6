#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "datos/core.hpp"
#include "datos/problems.hpp"
#include "datos/proxops.hpp"

namespace datos {

struct ReferencePoint {
  Vector x_star;
  double u_star = 0.0;
  double residual = 0.0;              // certified prox-gradient residual of x_star
  std::optional<Stack> s_star_rows;   // per-agent dual certificate, if harvested

  Stack consensual(int m) const { return x_star.transpose().replicate(m, 1); }
};

/// (1/m) sum_i u(x_i) - u*, u the full objective evaluated at each agent's row.
inline double optimality_gap(const Stack& x, const ProblemInstance& prob, const ReferencePoint& ref) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double ui = prob.objective(x.row(i).transpose());
    if (!std::isfinite(ui)) return kInf;
    acc += ui;
  }
  return acc / static_cast<double>(x.rows()) - ref.u_star;
}

/// ||X - 1 xbar^T||_F.
inline double consensus_error(const Stack& x) {
  if (x.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).norm();
}

/// Largest |column sum| of a stacked matrix.
inline double max_column_sum(const Stack& x) {
  if (x.size() == 0) return 0.0;
  return x.colwise().sum().cwiseAbs().maxCoeff();
}

/// ||X - X*||^2 + alpha_prev^2 ||S - S*||^2 on the network blocks.
inline double lyapunov_value(const Stack& x, const Stack& s, double alpha_prev, const ReferencePoint& ref) {
  if (!ref.s_star_rows) throw Error("lyapunov_value: reference point has no dual certificate");
  const Stack xs = ref.consensual(static_cast<int>(x.rows()));
  return (x - xs).squaredNorm() + alpha_prev * alpha_prev * (s - *ref.s_star_rows).squaredNorm();
}

/// Companion merit of the lifted iteration:
///   ||X - X*||^2 + ||Xt||^2 + alpha_prev^2 (||S - S*||^2 + ||St - St*||^2)
///   + (1-delta)/2 ||A - X_prev||^2 - 2 ||Sfull^0 - Sfull*||^2 * budget_spent.
struct LiftedMeritInput {
  const Stack* x;
  const Stack* xt;
  const Stack* s;
  const Stack* st;
  const Stack* a;
  const Stack* x_prev;
  double alpha_prev;
};

inline double lifted_merit(const LiftedMeritInput& in, const Stack& x_star, const Stack& s_star, const Stack& st_star,
                           double delta, double dual_dist0_sq, double budget_spent) {
  const double a2 = in.alpha_prev * in.alpha_prev;
  return (*in.x - x_star).squaredNorm() + in.xt->squaredNorm() +
         a2 * ((*in.s - s_star).squaredNorm() + (*in.st - st_star).squaredNorm()) +
         0.5 * (1.0 - delta) * (*in.a - *in.x_prev).squaredNorm() - 2.0 * dual_dist0_sq * budget_spent;
}

// ---------------------------------------------------------------------------
// Stepsize-weighted running averages of (A^t, S^t) with weights alpha^{t-1}.

class ErgodicAverager {
 public:
  void add(const Stack& a, const Stack& s, double alpha_prev) {
    if (!(alpha_prev > 0.0)) throw Error("ergodic_average: weight must be positive");
    if (theta_ == 0.0) {
      sum_a_ = alpha_prev * a;
      sum_s_ = alpha_prev * s;
    } else {
      sum_a_ += alpha_prev * a;
      sum_s_ += alpha_prev * s;
    }
    theta_ += alpha_prev;
    ++count_;
  }
  int count() const { return count_; }
  double theta() const { return theta_; }
  Stack a_bar() const {
    if (count_ == 0) throw Error("ergodic_average: no rounds recorded");
    return sum_a_ / theta_;
  }
  Stack s_bar() const {
    if (count_ == 0) throw Error("ergodic_average: no rounds recorded");
    return sum_s_ / theta_;
  }

 private:
  Stack sum_a_, sum_s_;
  double theta_ = 0.0;
  int count_ = 0;
};

/// Batch form: weights[t] multiplies items[t].
inline Stack weighted_mean(std::span<const Stack> items, std::span<const double> weights) {
  if (items.empty() || items.size() != weights.size()) throw Error("ergodic_average: need matching nonempty inputs");
  Stack acc = Stack::Zero(items.front().rows(), items.front().cols());
  double theta = 0.0;
  for (std::size_t t = 0; t < items.size(); ++t) {
    acc += weights[t] * items[t];
    theta += weights[t];
  }
  return acc / theta;
}

// ---------------------------------------------------------------------------
// Active-set identification for l1 problems.

using Support = std::vector<int>;  // signed: +(j+1) for positive, -(j+1) for negative entries

inline Support sign_support(const ConstVecRef& x, double tol) {
  Support s;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x(j) > tol) s.push_back(static_cast<int>(j + 1));
    if (x(j) < -tol) s.push_back(-static_cast<int>(j + 1));
  }
  return s;
}

inline double default_support_tol(const ReferencePoint& ref) {
  return 1e-9 * (1.0 + (ref.x_star.size() ? ref.x_star.cwiseAbs().maxCoeff() : 0.0));
}

struct SupportReport {
  std::vector<Support> agents;
  Support reference;
  bool identified = false;
};

inline SupportReport support_tracker(const Stack& x, const ReferencePoint& ref, double tol) {
  SupportReport rep;
  rep.reference = sign_support(ref.x_star, tol);
  rep.identified = true;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    rep.agents.push_back(sign_support(x.row(i).transpose(), tol));
    if (rep.agents.back() != rep.reference) rep.identified = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Rate diagnostics

struct RateFit {
  double rho = 1.0;
  double slope = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (k, log e_k) over the trailing `window` entries.
inline RateFit linear_rate_fit(std::span<const double> series, std::size_t window) {
  if (window < 10) throw Error("linear_rate_fit: window must be >= 10");
  if (series.size() < window) throw Error("linear_rate_fit: series shorter than window");
  const std::size_t start = series.size() - window;
  std::vector<double> y;
  for (std::size_t k = start; k < series.size(); ++k) {
    if (!(series[k] > 0.0)) throw Error("linear_rate_fit: nonpositive entry at index " + std::to_string(k));
    y.push_back(std::log(series[k]));
  }
  const double n = static_cast<double>(window);
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < window; ++t) {
    mx += static_cast<double>(t);
    my += y[t];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t t = 0; t < window; ++t) {
    const double dx = static_cast<double>(t) - mx, dy = y[t] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.rho = std::exp(fit.slope);
  // A constant series is fit exactly by the flat line.
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

struct SublinearCheck {
  double c_hat = 0.0;
  long argmax_k = 0;
  bool ok = false;
};

/// gaps[t] is the ergodic gap after round k = t + 1. C_hat = max_k k * gap_k;
/// ok when the max occurs outside the tail (second half of the run) and k *
/// gap_k is non-increasing along the tail, up to rel_slack * C_hat.
inline SublinearCheck sublinear_bound_check(std::span<const double> gaps, double rel_slack = 1e-6) {
  SublinearCheck out;
  if (gaps.empty()) return out;
  std::vector<double> prod(gaps.size());
  for (std::size_t t = 0; t < gaps.size(); ++t) prod[t] = static_cast<double>(t + 1) * gaps[t];
  const auto it = std::max_element(prod.begin(), prod.end());
  out.c_hat = *it;
  out.argmax_k = static_cast<long>(it - prod.begin()) + 1;
  if (!std::isfinite(out.c_hat)) return out;
  const std::size_t tail = prod.size() / 2;
  bool mono = true;
  for (std::size_t t = tail + 1; t < prod.size(); ++t)
    if (prod[t] > prod[t - 1] + rel_slack * std::abs(out.c_hat)) mono = false;
  out.ok = mono && static_cast<std::size_t>(out.argmax_k) <= std::max<std::size_t>(tail, 1);
  return out;
}

// ---------------------------------------------------------------------------
// Run traces

struct TraceRow {
  long k = 0;
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  long ls_trials_total = 0;
  std::optional<double> gap_surrogate;
  double consensus_err = 0.0;
  std::optional<long> support_size;
  long vec_msgs = 0;
  long scalar_msgs = 0;
  long broadcast_msgs = 0;
};

struct RunTrace {
  std::string algorithm;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<TraceRow> rows;
  Stack final_x;
  Stack final_s;
  std::string stop_reason;
};

inline constexpr const char* kTraceHeader =
    "k,alpha_min,alpha_max,ls_trials_total,gap_surrogate,consensus_err,support_size,vec_msgs,scalar_msgs,"
    "broadcast_msgs";

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_config_echo(std::ostream& os, const RunTrace& t) {
  if (!t.algorithm.empty()) os << "# algorithm=" << t.algorithm << '\n';
  for (const auto& [k, v] : t.config) os << "# " << k << '=' << v << '\n';
}

inline void write_trace_row(std::ostream& os, const TraceRow& r) {
  os << r.k << ',' << format_double(r.alpha_min) << ',' << format_double(r.alpha_max) << ',' << r.ls_trials_total
     << ',';
  if (r.gap_surrogate) os << format_double(*r.gap_surrogate);
  os << ',' << format_double(r.consensus_err) << ',';
  if (r.support_size) os << *r.support_size;
  os << ',' << r.vec_msgs << ',' << r.scalar_msgs << ',' << r.broadcast_msgs << '\n';
}

inline void write_trace_csv(std::ostream& os, const RunTrace& t) {
  write_config_echo(os, t);
  os << kTraceHeader << '\n';
  for (const auto& r : t.rows) write_trace_row(os, r);
}

/// Names accepted by plot_series / write_plot_csv.
inline const std::vector<std::string>& plot_metric_names() {
  static const std::vector<std::string> names{"alpha_min", "alpha_max", "ls_trials_total", "gap_surrogate",
                                              "consensus_err", "support_size", "vec_msgs", "scalar_msgs",
                                              "broadcast_msgs"};
  return names;
}

/// (k, value) pairs of one trace column; rows with a missing value are skipped.
inline std::vector<std::pair<long, double>> plot_series(const RunTrace& t, const std::string& metric) {
  std::vector<std::pair<long, double>> out;
  for (const auto& r : t.rows) {
    std::optional<double> v;
    if (metric == "alpha_min") v = r.alpha_min;
    else if (metric == "alpha_max") v = r.alpha_max;
    else if (metric == "ls_trials_total") v = static_cast<double>(r.ls_trials_total);
    else if (metric == "gap_surrogate") v = r.gap_surrogate;
    else if (metric == "consensus_err") v = r.consensus_err;
    else if (metric == "support_size") {
      if (r.support_size) v = static_cast<double>(*r.support_size);
    } else if (metric == "vec_msgs") v = static_cast<double>(r.vec_msgs);
    else if (metric == "scalar_msgs") v = static_cast<double>(r.scalar_msgs);
    else if (metric == "broadcast_msgs") v = static_cast<double>(r.broadcast_msgs);
    else throw Error("unknown metric '" + metric + "'");
    if (v) out.emplace_back(r.k, *v);
  }
  return out;
}

inline void write_plot_csv(std::ostream& os, const RunTrace& t, const std::string& metric) {
  os << "k,value\n";
  for (const auto& [k, v] : plot_series(t, metric)) os << k << ',' << format_double(v) << '\n';
}

}  // namespace datos
