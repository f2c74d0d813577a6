#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "datos/core.hpp"
#include "datos/metrics.hpp"
#include "datos/problems.hpp"
#include "datos/proxops.hpp"
#include "datos/stepsize.hpp"

namespace datos {

struct SolveReport {
  Vector x_star;
  double u_star = 0.0;
  double residual = 0.0;
  int iterations = 0;

  ReferencePoint reference() const { return ReferencePoint{x_star, u_star, residual, std::nullopt}; }
};

class ReferenceNotConverged : public Error {
 public:
  ReferenceNotConverged(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// ||x - prox_{alpha r}(x - alpha grad f(x))|| / alpha for the aggregate
/// problem min sum_i f_i + sum_i r_i.
inline double prox_grad_residual(const SmoothLoss& f, const ProxSpec& r, const ConstVecRef& x, double alpha) {
  const Vector g = f.gradient(x);
  return (x - apply_prox(r, x - alpha * g, alpha)).norm() / alpha;
}

/// Natural (unit-step) residual of a candidate solution.
inline double certify(const ProblemInstance& prob, const ConstVecRef& x, double alpha = 1.0) {
  const auto f = prob.aggregate_loss();
  if (!std::isfinite(f->value(x))) return kInf;
  return prox_grad_residual(*f, prob.aggregate_reg(), x, alpha);
}

struct ReferenceOptions {
  double tol = 1e-12;
  int max_iter = 200000;
  double alpha0 = 1.0;
  double grow = 2.0;  // the previous accepted step times grow is the next first trial
};

/// Centralized proximal gradient on u = sum f_i + sum r_i with backtracking.
/// Each iteration tries x+ = prox_{alpha r}(x - alpha grad f(x)) for
/// alpha = grow * alpha_prev, eta * grow * alpha_prev, ... A trial is accepted
/// when the sufficient-descent test of the line search holds, or when the
/// gradient form of the same curvature bound,
///   <grad f(x+) - grad f(x), x+ - x> <= (delta / alpha) ||x+ - x||^2,
/// holds; the latter stays meaningful once value differences drop below
/// roundoff. Stops when the residual at both the accepted step and the unit
/// step is at most tol.
inline SolveReport prox_grad_reference(const ProblemInstance& prob, const ReferenceOptions& opt = {}) {
  prob.validate();
  const auto f = prob.aggregate_loss();
  const ProxSpec r = prob.aggregate_reg();
  const LineSearchParams ls;
  constexpr int kMaxTrials = 200;
  Vector x = apply_prox(r, Vector::Zero(prob.d), 1.0);
  double fx = f->value(x);
  if (!std::isfinite(fx)) throw Error("reference: starting point outside the domain of f");
  Vector g = f->gradient(x);
  double alpha = opt.alpha0;
  for (int it = 0; it < opt.max_iter; ++it) {
    double a = alpha * opt.grow;
    Vector xp, gp;
    double fp = kInf;
    bool accepted = false;
    for (int t = 0; t < kMaxTrials && !accepted; ++t, a *= ls.eta) {
      xp = apply_prox(r, x - a * g, a);
      fp = f->value(xp);
      if (!std::isfinite(fp)) continue;
      const Vector step = xp - x;
      const double s2 = step.squaredNorm();
      gp = f->gradient(xp);
      accepted = descent_test(fp, fx, g, xp, x, a, ls.delta, 0.0) || (gp - g).dot(step) <= (ls.delta / a) * s2;
      if (accepted) alpha = a;
    }
    if (!accepted) throw Error("reference: backtracking failed at iteration " + std::to_string(it));
    const double res_step = (x - xp).norm() / alpha;
    x = std::move(xp);
    fx = fp;
    g = std::move(gp);
    if (res_step <= opt.tol) {
      const double res_unit = (x - apply_prox(r, x - g, 1.0)).norm();
      const double res_alpha = (x - apply_prox(r, x - alpha * g, alpha)).norm() / alpha;
      if (res_unit <= opt.tol && res_alpha <= opt.tol) {
        SolveReport rep;
        rep.x_star = x;
        rep.u_star = prob.objective(x);
        rep.residual = res_unit;
        rep.iterations = it + 1;
        return rep;
      }
    }
  }
  const double res = certify(prob, x);
  throw ReferenceNotConverged("reference: max_iter " + std::to_string(opt.max_iter) + " exceeded (residual " +
                                  format_double(res) + ")",
                              res);
}

// ---------------------------------------------------------------------------
// On-disk cache: one text file per problem key.

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string cache_key(const std::string& problem_key, double tol) {
  std::ostringstream os;
  os << std::hex << fnv1a64(problem_key + "|tol=" + format_double(tol));
  return os.str();
}

inline std::filesystem::path cache_file(const std::filesystem::path& dir, const std::string& key) {
  return dir / ("ref_" + key + ".txt");
}

inline void save_reference(const std::filesystem::path& path, const std::string& key, const SolveReport& rep) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw Error("reference cache: cannot write " + path.string());
  os << "key=" << key << '\n';
  os << "u_star=" << format_double(rep.u_star) << '\n';
  os << "residual=" << format_double(rep.residual) << '\n';
  os << "iterations=" << rep.iterations << '\n';
  os << "x_star=";
  for (Eigen::Index j = 0; j < rep.x_star.size(); ++j) os << (j ? "," : "") << format_double(rep.x_star(j));
  os << '\n';
}

/// Loads a cache entry; nullopt when missing, keyed differently, or unreadable.
inline std::optional<SolveReport> load_reference(const std::filesystem::path& path, const std::string& key) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  SolveReport rep;
  std::string line, got_key;
  bool have_x = false, have_u = false;
  try {
    while (std::getline(is, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
      if (k == "key") got_key = v;
      else if (k == "u_star") { rep.u_star = std::stod(v); have_u = true; }
      else if (k == "residual") rep.residual = std::stod(v);
      else if (k == "iterations") rep.iterations = std::stoi(v);
      else if (k == "x_star") {
        std::vector<double> vals;
        std::stringstream ss(v);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        rep.x_star = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        have_x = true;
      }
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (got_key != key || !have_x || !have_u) return std::nullopt;
  return rep;
}

/// Solve, or reuse a cached solution for the same (problem_key, tol).
inline SolveReport solve_cached(const ProblemInstance& prob, const std::string& problem_key,
                                const ReferenceOptions& opt, const std::optional<std::filesystem::path>& cache_dir) {
  const std::string key = cache_key(problem_key, opt.tol);
  if (cache_dir) {
    if (auto hit = load_reference(cache_file(*cache_dir, key), key); hit && hit->x_star.size() == prob.d) return *hit;
  }
  SolveReport rep = prox_grad_reference(prob, opt);
  if (cache_dir) save_reference(cache_file(*cache_dir, key), key, rep);
  return rep;
}

}  // namespace datos
