#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "datos/core.hpp"
#include "datos/symflat.hpp"

namespace datos {

// Nonsmooth terms r(x) with cheap proximal maps.
namespace prox {

struct L1 {
  double lambda = 0.0;  // r(x) = lambda * ||x||_1
};
struct Zero {};
struct Box {
  double lo = 0.0, hi = 0.0;  // indicator of lo <= x_j <= hi
};
struct SpectralBox {
  double a = 0.0, b = 0.0;  // indicator of a I <= X <= b I over SymFlat coordinates
};

}  // namespace prox

using ProxSpec = std::variant<prox::Zero, prox::L1, prox::Box, prox::SpectralBox>;

inline ProxSpec make_l1(double lambda) {
  if (!(lambda >= 0.0)) throw Error("l1: lambda must be >= 0");
  return prox::L1{lambda};
}
inline ProxSpec make_zero() { return prox::Zero{}; }
inline ProxSpec make_box(double lo, double hi) {
  if (!(lo <= hi)) throw Error("box: requires lo <= hi");
  return prox::Box{lo, hi};
}
inline ProxSpec make_spectral_box(double a, double b) {
  if (!(a > 0.0 && a <= b)) throw Error("spectral_box: requires 0 < a <= b");
  return prox::SpectralBox{a, b};
}

inline std::string kind_name(const ProxSpec& s) {
  struct V {
    std::string operator()(const prox::Zero&) const { return "zero"; }
    std::string operator()(const prox::L1&) const { return "l1"; }
    std::string operator()(const prox::Box&) const { return "box"; }
    std::string operator()(const prox::SpectralBox&) const { return "spectral_box"; }
  };
  return std::visit(V{}, s);
}

/// Componentwise sign(v) * max(|v| - tau, 0).
inline Vector soft_threshold(const ConstVecRef& v, double tau) {
  if (tau < 0.0) throw Error("soft_threshold: tau must be >= 0");
  Vector out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double a = std::abs(v(j)) - tau;
    out(j) = a > 0.0 ? std::copysign(a, v(j)) : 0.0;
  }
  return out;
}

inline Vector project_box(const ConstVecRef& v, double lo, double hi) { return v.cwiseMax(lo).cwiseMin(hi); }

/// Frobenius projection of a symmetric matrix (given as a flat) onto
/// {a I <= X <= b I}: clamp the eigenvalues into [a, b].
inline Vector project_spectral_box(const ConstVecRef& flat, double a, double b) {
  if (!(a > 0.0 && a <= b)) throw Error("project_spectral_box: requires 0 < a <= b");
  const Matrix x = symflat::unflatten(flat);
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  const Vector lam = es.eigenvalues().cwiseMax(a).cwiseMin(b);
  const Matrix& q = es.eigenvectors();
  Matrix out = q * lam.asDiagonal() * q.transpose();
  out = 0.5 * (out + out.transpose());
  return symflat::flatten(out);
}

/// prox_{alpha r}(v).
inline Vector apply_prox(const ProxSpec& spec, const ConstVecRef& v, double alpha) {
  if (!(alpha > 0.0)) throw Error("prox: stepsize must be positive, got " + std::to_string(alpha));
  struct V {
    const ConstVecRef& v;
    double alpha;
    Vector operator()(const prox::Zero&) const { return v; }
    Vector operator()(const prox::L1& p) const { return soft_threshold(v, alpha * p.lambda); }
    Vector operator()(const prox::Box& p) const { return project_box(v, p.lo, p.hi); }
    Vector operator()(const prox::SpectralBox& p) const { return project_spectral_box(v, p.a, p.b); }
  };
  return std::visit(V{v, alpha}, spec);
}

/// Relative slack used when evaluating indicator functions on computed points.
inline constexpr double kIndicatorSlack = 1e-9;

/// r(v); +inf outside the domain of an indicator.
inline double reg_value(const ProxSpec& spec, const ConstVecRef& v) {
  struct V {
    const ConstVecRef& v;
    double operator()(const prox::Zero&) const { return 0.0; }
    double operator()(const prox::L1& p) const { return p.lambda * v.lpNorm<1>(); }
    double operator()(const prox::Box& p) const {
      const double tl = kIndicatorSlack * (1.0 + std::abs(p.lo));
      const double th = kIndicatorSlack * (1.0 + std::abs(p.hi));
      return (v.minCoeff() >= p.lo - tl && v.maxCoeff() <= p.hi + th) ? 0.0 : kInf;
    }
    double operator()(const prox::SpectralBox& p) const {
      const Matrix x = symflat::unflatten(v);
      Eigen::SelfAdjointEigenSolver<Matrix> es(x, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      return (lo >= p.a - kIndicatorSlack * (1.0 + p.a) && hi <= p.b + kIndicatorSlack * (1.0 + p.b)) ? 0.0 : kInf;
    }
  };
  if (v.size() == 0) return 0.0;
  return std::visit(V{v}, spec);
}

/// Row i of the result is prox_{alphas[i] r_i}(row i of X).
inline Stack prox_rowwise(const Stack& x, std::span<const double> alphas, std::span<const ProxSpec> specs) {
  const auto m = static_cast<std::size_t>(x.rows());
  if (alphas.size() != m || specs.size() != m) throw Error("prox_rowwise: size mismatch");
  Stack out(x.rows(), x.cols());
  for (std::size_t i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    if (!(alphas[i] > 0.0))
      throw Error("prox_rowwise: nonpositive stepsize " + std::to_string(alphas[i]) + " for row " + std::to_string(i));
    out.row(r) = apply_prox(specs[i], x.row(r).transpose(), alphas[i]).transpose();
  }
  return out;
}

/// Uniform-stepsize overload.
inline Stack prox_rowwise(const Stack& x, double alpha, std::span<const ProxSpec> specs) {
  const std::vector<double> alphas(static_cast<std::size_t>(x.rows()), alpha);
  return prox_rowwise(x, alphas, specs);
}

/// The nonsmooth term sum_i r_i evaluated on a single shared point, as one
/// ProxSpec. Needs every agent to use the same kind (l1 weights add up;
/// indicators must coincide).
inline ProxSpec aggregate(std::span<const ProxSpec> specs) {
  if (specs.empty()) throw Error("aggregate: no terms");
  const auto k0 = specs.front().index();
  for (const auto& s : specs)
    if (s.index() != k0)
      throw Error("aggregate: non-uniform regularizer kinds (" + kind_name(specs.front()) + " vs " + kind_name(s) + ")");
  if (std::holds_alternative<prox::L1>(specs.front())) {
    double lam = 0.0;
    for (const auto& s : specs) lam += std::get<prox::L1>(s).lambda;
    return prox::L1{lam};
  }
  if (std::holds_alternative<prox::Box>(specs.front())) {
    const auto b0 = std::get<prox::Box>(specs.front());
    for (const auto& s : specs) {
      const auto b = std::get<prox::Box>(s);
      if (b.lo != b0.lo || b.hi != b0.hi) throw Error("aggregate: box indicators differ across agents");
    }
  }
  if (std::holds_alternative<prox::SpectralBox>(specs.front())) {
    const auto b0 = std::get<prox::SpectralBox>(specs.front());
    for (const auto& s : specs) {
      const auto b = std::get<prox::SpectralBox>(s);
      if (b.a != b0.a || b.b != b0.b) throw Error("aggregate: spectral boxes differ across agents");
    }
  }
  return specs.front();
}

/// Largest violation of s in lambda * d||.||_1(x): on coordinates with
/// |x_j| > zero_tol the subgradient must equal lambda * sign(x_j); elsewhere
/// |s_j| <= lambda.
inline double l1_subgradient_violation(const ConstVecRef& s, const ConstVecRef& x, double lambda, double zero_tol = 0.0) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double v = (std::abs(x(j)) > zero_tol) ? std::abs(s(j) - lambda * (x(j) > 0 ? 1.0 : -1.0))
                                                 : std::max(0.0, std::abs(s(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace datos
