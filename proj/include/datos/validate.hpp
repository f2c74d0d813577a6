#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "datos/core.hpp"
#include "datos/engine.hpp"
#include "datos/netgraph.hpp"
#include "datos/problems.hpp"
#include "datos/proxops.hpp"
#include "datos/rng.hpp"
#include "datos/stepsize.hpp"

namespace datos {

struct GroupResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Replaceable pieces, so that a deliberately broken operator can be fed
/// through the suite to confirm it is caught.
struct ValidateHooks {
  std::function<Vector(const ConstVecRef&, double)> soft_threshold = [](const ConstVecRef& v, double t) {
    return datos::soft_threshold(v, t);
  };
};

namespace validate_detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline GroupResult gossip_group() {
  GroupResult r{"gossip", true, "", 0.0};
  double worst = 0.0;
  int graphs = 0;
  for (double p : {0.1, 0.5, 0.9})
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto g = generate_erdos_renyi(20, p, seed);
      const Matrix wt = metropolis_weights(g);
      if (const auto msg = check_gossip_base(wt); !msg.empty()) {
        r.pass = false;
        r.detail = msg;
        return r;
      }
      const auto gm = lazy_mix(wt, 1.0 / 3.0);
      const Vector ones = Vector::Ones(20);
      worst = std::max({worst, (gm.w * ones - ones).cwiseAbs().maxCoeff(),
                        (gm.w - gm.w.transpose()).cwiseAbs().maxCoeff()});
      if (!compliant_with(gm.w, g) || gm.w.diagonal().minCoeff() <= 0.0) r.pass = false;
      if (sym_eigenvalues_desc(gm.w).minCoeff() < 1.0 - 2.0 * gm.c - 1e-12) r.pass = false;
      ++graphs;
    }
  if (worst > 1e-12) r.pass = false;
  r.detail = std::to_string(graphs) + " graphs, max stochasticity/symmetry defect " + fmt(worst);
  return r;
}

inline double fd_error(const SmoothLoss& f, const Vector& x) {
  const double h = 1e-6 * (1.0 + x.norm());
  const Vector g = f.gradient(x);
  Vector fd(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    fd(j) = (f.value(xp) - f.value(xm)) / (2.0 * h);
  }
  return (fd - g).norm() / std::max(1.0, g.norm());
}

inline GroupResult gradient_group() {
  GroupResult r{"gradients", true, "", 0.0};
  Rng rng(11);
  double worst = 0.0;
  const auto logi = logistic_l1(synthetic_classification(3, 2, 15, 6), 0.0);
  const auto en = elastic_net(4, 2, 10, 6, 0.0, {0.1, 0.2});
  const auto cov = covariance_mle(5, 2, 30, default_covariance(5, 3), 0.1, 10);
  for (int t = 0; t < 5; ++t) {
    worst = std::max(worst, fd_error(*logi.losses[0], rng.normal_vector(6)));
    worst = std::max(worst, fd_error(*en.losses[1], rng.normal_vector(6)));
    Matrix z = rng.normal_matrix(3, 3);
    const Matrix x = 2.0 * Matrix::Identity(3, 3) + 0.2 * (z + z.transpose());
    worst = std::max(worst, fd_error(*cov.losses[0], symflat::flatten(x)));
  }
  r.pass = worst < 1e-6;
  r.detail = "max relative finite-difference error " + fmt(worst);
  return r;
}

inline GroupResult prox_group(const ValidateHooks& hooks) {
  GroupResult r{"prox", true, "", 0.0};
  Rng rng(12);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Vector v = 2.0 * rng.normal_vector(8);
    const double tau = rng.uniform(0.05, 1.5);
    const Vector out = hooks.soft_threshold(v, tau);
    // (v - out) / tau must be a subgradient of ||.||_1 at out.
    worst = std::max(worst, l1_subgradient_violation((v - out) / tau, out, 1.0));
  }
  if (worst > 1e-10) r.pass = false;
  double proj = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Matrix z = rng.normal_matrix(3, 3);
    const Vector x = symflat::flatten(z + z.transpose());
    const Vector y = symflat::flatten(Matrix(rng.normal_matrix(3, 3)).selfadjointView<Eigen::Upper>());
    const Vector px = project_spectral_box(x, 0.5, 2.0), py = project_spectral_box(y, 0.5, 2.0);
    proj = std::max(proj, (project_spectral_box(px, 0.5, 2.0) - px).cwiseAbs().maxCoeff());
    proj = std::max(proj, std::max(0.0, (px - py).norm() - (x - y).norm()));
  }
  if (proj > 1e-10) r.pass = false;
  r.detail = "soft-threshold inclusion defect " + fmt(worst) + ", projection defect " + fmt(proj);
  return r;
}

inline GroupResult lifted_group() {
  GroupResult r{"lifted", true, "", 0.0};
  double worst = 0.0, track = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto prob = elastic_net(seed, 5, 6, 4, 0.05, default_gamma_schedule(5));
    const auto g = generate_erdos_renyi(5, 0.6, seed);
    const auto gm = lazy_mix(metropolis_weights(g), 1.0 / 3.0);
    SolverConfig cfg;
    cfg.seed = seed;
    GossipChannel ch(g, gm);
    SolverState st = initial_state(prob, cfg);
    BudgetState b = make_budget(cfg.budget, cfg.alpha_init);
    LiftedState ls = make_lifted(st.X, st.S, gm);
    for (int k = 0; k < 50; ++k) {
      const auto rep = datos_round(st, prob, ch, cfg, b);
      lifted_round(ls, prob, rep.alphas.front());
      worst = std::max({worst, (st.X - ls.X).cwiseAbs().maxCoeff(), (st.S - ls.S).cwiseAbs().maxCoeff()});
      track = std::max(track, (ls.L * st.T - ls.Y).cwiseAbs().maxCoeff());
    }
  }
  r.pass = worst <= 1e-10 && track <= 1e-9;
  r.detail = "max |network - lifted| " + fmt(worst) + ", tracking defect " + fmt(track);
  return r;
}

inline GroupResult uniform_group() {
  GroupResult r{"uniform", true, "", 0.0};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto prob = elastic_net(seed, 5, 6, 4, 0.05, default_gamma_schedule(5));
    const auto g = generate_erdos_renyi(5, 0.6, seed);
    const auto gm = lazy_mix(metropolis_weights(g), 1.0 / 3.0);
    SolverConfig cfg;
    cfg.seed = seed;
    GossipChannel ch(g, gm);
    SolverState st = initial_state(prob, cfg);
    BudgetState b = make_budget(cfg.budget, cfg.alpha_init);
    for (int k = 0; k < 50; ++k) {
      SolverState local = st;
      const auto rep = datos_round(st, prob, ch, cfg, b);
      const Exchange ex = communicate(local, prob, ch);
      local_update(local, ex, rep.alphas, prob, ch);
      worst = std::max({worst, (st.X - local.X).cwiseAbs().maxCoeff(), (st.S - local.S).cwiseAbs().maxCoeff(),
                        (st.D - local.D).cwiseAbs().maxCoeff(), (st.A - local.A).cwiseAbs().maxCoeff()});
    }
  }
  r.pass = worst <= 1e-12;
  r.detail = "max |local - global| under a uniform stepsize " + fmt(worst);
  return r;
}

inline GroupResult linesearch_group() {
  GroupResult r{"linesearch", true, "", 0.0};
  struct Half final : SmoothLoss {
    Eigen::Index dim() const override { return 1; }
    double value(const ConstVecRef& x) const override { return 0.5 * x.squaredNorm(); }
    Vector gradient(const ConstVecRef& x) const override { return x; }
  } f;
  const Vector one = Vector::Ones(1);
  LineSearchParams p;
  p.slack = 0.0;
  const auto res = linesearch(10.0, one, one, -one, f, p);
  if (std::abs(res.alpha - 0.625) > 1e-15 || res.trials != 5) r.pass = false;
  BudgetParams dr;
  dr.kind = BudgetKind::DropReset;
  auto s = make_budget(dr, 10.0);
  const auto n0 = budget_next(s, 10.0);
  if (std::abs(n0.n - 0.25) > 1e-15) r.pass = false;
  r.detail = "1-D quadratic: alpha " + fmt(res.alpha) + " after " + std::to_string(res.trials) + " trials";
  return r;
}

}  // namespace validate_detail

inline std::vector<GroupResult> run_validation(const ValidateHooks& hooks = {}) {
  using Clock = std::chrono::steady_clock;
  const std::vector<std::pair<std::string, std::function<GroupResult()>>> groups{
      {"gossip", validate_detail::gossip_group},
      {"gradients", validate_detail::gradient_group},
      {"prox", [&] { return validate_detail::prox_group(hooks); }},
      {"lifted", validate_detail::lifted_group},
      {"uniform", validate_detail::uniform_group},
      {"linesearch", validate_detail::linesearch_group},
  };
  std::vector<GroupResult> out;
  for (const auto& [name, g] : groups) {
    const auto t0 = Clock::now();
    GroupResult res;
    try {
      res = g();
    } catch (const std::exception& e) {
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.name = name;
    res.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    out.push_back(res);
  }
  return out;
}

inline int cmd_validate(std::ostream& out, const ValidateHooks& hooks = {}) {
  int failed = 0;
  for (const auto& g : run_validation(hooks)) {
    out << (g.pass ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    if (!g.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace datos
