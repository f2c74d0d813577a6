#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "datos/core.hpp"
#include "datos/proxops.hpp"
#include "datos/rng.hpp"
#include "datos/symflat.hpp"

namespace datos {

/// Smooth local loss: value (+inf outside its open domain) and gradient.
class SmoothLoss {
 public:
  virtual ~SmoothLoss() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const ConstVecRef& x) const = 0;
  /// Only called where value(x) is finite.
  virtual Vector gradient(const ConstVecRef& x) const = 0;
};

using LossPtr = std::shared_ptr<const SmoothLoss>;

class ZeroLoss final : public SmoothLoss {
 public:
  explicit ZeroLoss(Eigen::Index d) : d_(d) {}
  Eigen::Index dim() const override { return d_; }
  double value(const ConstVecRef&) const override { return 0.0; }
  Vector gradient(const ConstVecRef& x) const override { return Vector::Zero(x.size()); }

 private:
  Eigen::Index d_;
};

/// (1/n) sum_j log(1 + exp(-b_j <x, a_j>)).
class LogisticLoss final : public SmoothLoss {
 public:
  LogisticLoss(Matrix features, Vector labels) : a_(std::move(features)), b_(std::move(labels)) {
    if (a_.rows() != b_.size()) throw Error("logistic: row count mismatch");
  }
  Eigen::Index dim() const override { return a_.cols(); }

  double value(const ConstVecRef& x) const override {
    if (a_.rows() == 0) return 0.0;
    const Vector z = -(b_.array() * (a_ * x).array()).matrix();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) acc += softplus(z(j));
    return acc / static_cast<double>(a_.rows());
  }

  Vector gradient(const ConstVecRef& x) const override {
    if (a_.rows() == 0) return Vector::Zero(a_.cols());
    const Vector z = -(b_.array() * (a_ * x).array()).matrix();
    Vector w(z.size());
    for (Eigen::Index j = 0; j < z.size(); ++j) w(j) = -b_(j) * sigmoid(z(j));
    return a_.transpose() * w / static_cast<double>(a_.rows());
  }

  static double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
  static double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

 private:
  Matrix a_;
  Vector b_;
};

/// (1/n) ||A x - b||^2 + (gamma/2) ||x||^2.
class LeastSquaresLoss final : public SmoothLoss {
 public:
  LeastSquaresLoss(Matrix a, Vector b, double gamma) : a_(std::move(a)), b_(std::move(b)), gamma_(gamma) {
    if (a_.rows() != b_.size()) throw Error("least squares: row count mismatch");
  }
  Eigen::Index dim() const override { return a_.cols(); }
  double value(const ConstVecRef& x) const override {
    const double fit = a_.rows() ? (a_ * x - b_).squaredNorm() / static_cast<double>(a_.rows()) : 0.0;
    return fit + 0.5 * gamma_ * x.squaredNorm();
  }
  Vector gradient(const ConstVecRef& x) const override {
    Vector g = gamma_ * x;
    if (a_.rows()) g += (2.0 / static_cast<double>(a_.rows())) * (a_.transpose() * (a_ * x - b_));
    return g;
  }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  double gamma() const { return gamma_; }

 private:
  Matrix a_;
  Vector b_;
  double gamma_;
};

/// -n log det X + sign * trace(X Y) over SymFlat coordinates; +inf unless X > 0.
class LogDetTraceLoss final : public SmoothLoss {
 public:
  LogDetTraceLoss(Matrix y, double n, double trace_sign) : y_(std::move(y)), n_(n), sign_(trace_sign) {}
  Eigen::Index dim() const override { return symflat::flat_size(y_.rows()); }

  double value(const ConstVecRef& x) const override {
    const Matrix xm = symflat::unflatten(x, y_.rows());
    Eigen::LLT<Matrix> llt(xm);
    if (llt.info() != Eigen::Success) return kInf;
    const Vector diag = Matrix(llt.matrixL()).diagonal();
    if ((diag.array() <= 0.0).any()) return kInf;
    const double logdet = 2.0 * diag.array().log().sum();
    return -n_ * logdet + sign_ * (xm.cwiseProduct(y_)).sum();
  }

  Vector gradient(const ConstVecRef& x) const override {
    const Matrix xm = symflat::unflatten(x, y_.rows());
    Eigen::LLT<Matrix> llt(xm);
    if (llt.info() != Eigen::Success) throw Error("log-det loss: gradient requested outside the PD cone");
    Matrix inv = llt.solve(Matrix::Identity(xm.rows(), xm.cols()));
    inv = 0.5 * (inv + inv.transpose());
    return symflat::flatten(-n_ * inv + sign_ * y_);
  }

  const Matrix& sample_covariance() const { return y_; }

 private:
  Matrix y_;
  double n_;
  double sign_;
};

/// Sum of several losses over the same coordinates.
class SumLoss final : public SmoothLoss {
 public:
  explicit SumLoss(std::vector<LossPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw Error("sum loss: no parts");
  }
  Eigen::Index dim() const override { return parts_.front()->dim(); }
  double value(const ConstVecRef& x) const override {
    double acc = 0.0;
    for (const auto& p : parts_) {
      const double v = p->value(x);
      if (!std::isfinite(v)) return kInf;
      acc += v;
    }
    return acc;
  }
  Vector gradient(const ConstVecRef& x) const override {
    Vector g = Vector::Zero(x.size());
    for (const auto& p : parts_) g += p->gradient(x);
    return g;
  }

 private:
  std::vector<LossPtr> parts_;
};

struct ProblemMeta {
  std::optional<Vector> x_true;
  std::vector<double> gamma;      // strong-convexity moduli from the regularizer, if any
  std::vector<double> smoothness; // per-agent global Lipschitz constants of grad f_i, when computable
  std::vector<double> strong_convexity;
  // Random starting points are drawn around this point when set.
  std::optional<Vector> start_center;
};

/// m agents, each with a smooth loss f_i and a nonsmooth term r_i on R^d.
struct ProblemInstance {
  std::string name;
  int m = 0;
  Eigen::Index d = 0;
  std::vector<LossPtr> losses;
  std::vector<ProxSpec> regs;
  ProblemMeta meta;
  // f_i are finite only on an open subset (e.g. the PD cone); starting
  // points are pushed into dom r with a unit prox step.
  bool restricted_domain = false;

  void validate() const {
    if (m < 1 || static_cast<int>(losses.size()) != m || static_cast<int>(regs.size()) != m)
      throw Error("problem: agent count mismatch");
    for (const auto& l : losses)
      if (!l || l->dim() != d) throw Error("problem: loss dimension mismatch");
  }

  double local_value(int i, const ConstVecRef& x) const { return losses[static_cast<std::size_t>(i)]->value(x); }

  /// grad F(X): row i is grad f_i(x_i).
  Stack gradients(const Stack& x) const {
    Stack g(x.rows(), x.cols());
    for (int i = 0; i < m; ++i) g.row(i) = losses[static_cast<std::size_t>(i)]->gradient(x.row(i).transpose()).transpose();
    return g;
  }

  /// F(X) = sum_i f_i(x_i).
  double stacked_smooth_value(const Stack& x) const {
    double acc = 0.0;
    for (int i = 0; i < m; ++i) acc += local_value(i, x.row(i).transpose());
    return acc;
  }

  /// u(x) = sum_j f_j(x) + sum_j r_j(x) at a single shared point.
  double objective(const ConstVecRef& x) const {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      const double fv = losses[static_cast<std::size_t>(j)]->value(x);
      const double rv = reg_value(regs[static_cast<std::size_t>(j)], x);
      if (!std::isfinite(fv) || !std::isfinite(rv)) return kInf;
      acc += fv + rv;
    }
    return acc;
  }

  std::shared_ptr<SumLoss> aggregate_loss() const { return std::make_shared<SumLoss>(losses); }
  ProxSpec aggregate_reg() const { return aggregate(std::span<const ProxSpec>(regs)); }

  bool all_l1() const {
    for (const auto& r : regs)
      if (!std::holds_alternative<prox::L1>(r)) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Datasets

struct Dataset {
  Matrix features;  // n x d
  Vector labels;    // n

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

enum class LabelRule {
  Auto,    // explicitly signed tokens "+1"/"-1" kept, other labels by digit parity
  Parity,  // even -> +1, odd -> -1
  Sign,    // > 0 -> +1, otherwise -1
};

inline double map_label(const std::string& token, LabelRule rule, int lineno) {
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error("libsvm: malformed label at line " + std::to_string(lineno));
  }
  const bool is_signed = !token.empty() && (token[0] == '+' || token[0] == '-');
  if (rule == LabelRule::Sign || (rule == LabelRule::Auto && is_signed && std::abs(v) == 1.0))
    return v > 0 ? 1.0 : -1.0;
  if (v != std::floor(v)) throw Error("libsvm: non-integer label for parity rule at line " + std::to_string(lineno));
  const auto iv = static_cast<long long>(v);
  return (iv % 2 == 0) ? 1.0 : -1.0;
}

/// Reads LIBSVM sparse text (`label idx:val ...`, 1-based indices) into dense
/// rows of length d; at most `limit` rows (limit < 0: all).
inline Dataset read_libsvm(std::istream& is, Eigen::Index d, long limit = -1, LabelRule rule = LabelRule::Auto) {
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  std::vector<double> labels;
  std::string line;
  int lineno = 0;
  while ((limit < 0 || static_cast<long>(rows.size()) < limit) && std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    labels.push_back(map_label(tok, rule, lineno));
    auto& row = rows.emplace_back();
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        throw Error("libsvm: malformed feature '" + tok + "' at line " + std::to_string(lineno));
      long long idx = 0;
      double val = 0.0;
      try {
        std::size_t u1 = 0, u2 = 0;
        idx = std::stoll(tok.substr(0, colon), &u1);
        val = std::stod(tok.substr(colon + 1), &u2);
        if (u1 != colon || u2 != tok.size() - colon - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error("libsvm: malformed feature '" + tok + "' at line " + std::to_string(lineno));
      }
      if (idx < 1 || idx > d) throw Error("libsvm: index out of range at line " + std::to_string(lineno));
      row.emplace_back(static_cast<Eigen::Index>(idx - 1), val);
    }
  }
  Dataset out;
  out.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), d);
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (auto [j, v] : rows[r]) out.features(static_cast<Eigen::Index>(r), j) = v;
    out.labels(static_cast<Eigen::Index>(r)) = labels[r];
  }
  return out;
}

inline Dataset read_libsvm(const std::string& path, Eigen::Index d, long limit = -1, LabelRule rule = LabelRule::Auto) {
  std::ifstream is(path);
  if (!is) throw Error("libsvm: cannot open " + path);
  return read_libsvm(is, d, limit, rule);
}

struct Shards {
  std::vector<Dataset> parts;
  Eigen::Index dropped = 0;  // trailing rows discarded to make equal shards
};

/// Contiguous equal shards in row order; the remainder is dropped.
inline Shards split_dataset(const Dataset& data, int m) {
  if (m < 1) throw Error("split_dataset: m must be >= 1");
  Shards out;
  const Eigen::Index per = data.rows() / m;
  out.dropped = data.rows() - per * m;
  for (int i = 0; i < m; ++i) {
    Dataset part;
    part.features = data.features.middleRows(i * per, per);
    part.labels = data.labels.segment(i * per, per);
    out.parts.push_back(std::move(part));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Problem families

inline ProblemInstance logistic_l1(const std::vector<Dataset>& shards, double lambda) {
  if (shards.empty()) throw Error("logistic_l1: no agents");
  if (!(lambda >= 0.0)) throw Error("logistic_l1: lambda must be >= 0");
  ProblemInstance p;
  p.name = "logistic_l1";
  p.m = static_cast<int>(shards.size());
  p.d = shards.front().dim();
  for (const auto& s : shards) {
    if (s.dim() != p.d) throw Error("logistic_l1: feature dimension differs across agents");
    for (Eigen::Index j = 0; j < s.labels.size(); ++j)
      if (s.labels(j) != 1.0 && s.labels(j) != -1.0) throw Error("logistic_l1: label outside {-1, +1}");
    p.losses.push_back(std::make_shared<LogisticLoss>(s.features, s.labels));
    p.regs.push_back(make_l1(lambda));
  }
  p.validate();
  return p;
}

/// Synthetic binary classification data: a ~ N(0, I), planted x ~ N(0, I/d),
/// label sign(<a, x> + noise * N(0,1)). Agent i draws from sub-seed i.
inline std::vector<Dataset> synthetic_classification(std::uint64_t seed, int m, Eigen::Index n, Eigen::Index d, double noise = 1.0) {
  Rng planted(derive_seed(seed, 0xC1A55ULL));
  const Vector x_true = planted.normal_vector(d) / std::sqrt(static_cast<double>(d));
  std::vector<Dataset> out;
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Dataset ds;
    ds.features = rng.normal_matrix(n, d);
    ds.labels.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double score = ds.features.row(j).dot(x_true) + noise * rng.normal();
      ds.labels(j) = score > 0 ? 1.0 : -1.0;
    }
    out.push_back(std::move(ds));
  }
  return out;
}

/// gamma_i = 0.1 + (i - 1) * 0.1 for agents i = 1..m.
inline std::vector<double> default_gamma_schedule(int m, double base = 0.1, double step = 0.1) {
  std::vector<double> g;
  for (int i = 0; i < m; ++i) g.push_back(base + static_cast<double>(i) * step);
  return g;
}

/// Extreme eigenvalues of A^T A computed from the smaller Gram matrix.
inline std::pair<double, double> gram_extremes(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return {0.0, 0.0};
  const bool tall = a.rows() >= a.cols();
  const Matrix gram = tall ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
  const double hi = es.eigenvalues().maxCoeff();
  const double lo = tall ? std::max(0.0, es.eigenvalues().minCoeff()) : 0.0;
  return {lo, hi};
}

inline ProblemInstance elastic_net_from_data(std::vector<Matrix> a, std::vector<Vector> b, double lambda,
                                             const std::vector<double>& gamma) {
  const int m = static_cast<int>(a.size());
  if (m < 1 || static_cast<int>(b.size()) != m || static_cast<int>(gamma.size()) != m)
    throw Error("elastic_net: per-agent sizes disagree");
  ProblemInstance p;
  p.name = "elastic_net";
  p.m = m;
  p.d = a.front().cols();
  p.meta.gamma = gamma;
  for (int i = 0; i < m; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double n = static_cast<double>(a[ui].rows());
    const auto [lo, hi] = gram_extremes(a[ui]);
    const double scale = n > 0 ? 2.0 / n : 0.0;
    p.meta.smoothness.push_back(scale * hi + gamma[ui]);
    p.meta.strong_convexity.push_back(scale * lo + gamma[ui]);
    p.losses.push_back(std::make_shared<LeastSquaresLoss>(std::move(a[ui]), std::move(b[ui]), gamma[ui]));
    p.regs.push_back(make_l1(lambda));
  }
  p.validate();
  return p;
}

/// A_i, b_i with i.i.d. N(0, 1) entries from sub-seed i.
inline ProblemInstance elastic_net(std::uint64_t seed, int m, Eigen::Index n, Eigen::Index d, double lambda,
                                   const std::vector<double>& gamma) {
  if (m < 1 || n < 1 || d < 1) throw Error("elastic_net: sizes must be positive");
  std::vector<Matrix> as;
  std::vector<Vector> bs;
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    as.push_back(rng.normal_matrix(n, d));
    bs.push_back(rng.normal_vector(n));
  }
  return elastic_net_from_data(std::move(as), std::move(bs), lambda, gamma);
}

/// Random SPD matrix Q diag(s) Q^T with s_j = 8 * 4^(j / (side - 1)) and Q
/// orthogonal from the QR factor of a Gaussian matrix.
inline Matrix default_covariance(std::uint64_t seed, Eigen::Index side) {
  Rng rng(derive_seed(seed, 0x5167AULL));
  const Matrix g = rng.normal_matrix(side, side);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ();
  Vector s(side);
  for (Eigen::Index j = 0; j < side; ++j)
    s(j) = 8.0 * std::pow(4.0, side > 1 ? static_cast<double>(j) / static_cast<double>(side - 1) : 0.0);
  Matrix out = q * s.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

inline ProblemInstance covariance_from_samples(const std::vector<Matrix>& sample_cov, double n, double a, double b,
                                               double trace_sign = 1.0) {
  if (!(a > 0.0 && a <= b)) throw Error("covariance_mle: requires 0 < a <= b");
  if (trace_sign != 1.0 && trace_sign != -1.0) throw Error("covariance_mle: trace_sign must be +1 or -1");
  ProblemInstance p;
  p.name = "covariance_mle";
  p.m = static_cast<int>(sample_cov.size());
  p.d = symflat::flat_size(sample_cov.front().rows());
  p.restricted_domain = true;
  p.meta.start_center = (0.5 * (a + b)) * symflat::identity(sample_cov.front().rows());
  for (const auto& y : sample_cov) {
    p.losses.push_back(std::make_shared<LogDetTraceLoss>(y, n, trace_sign));
    p.regs.push_back(make_spectral_box(a, b));
  }
  p.validate();
  return p;
}

/// Per agent: n Gaussian samples with covariance sigma, Y_i their second
/// moment; f_i(X) = -n log det X + trace_sign * trace(X Y_i) on {aI <= X <= bI}.
inline ProblemInstance covariance_mle(std::uint64_t seed, int m, Eigen::Index n, const Matrix& sigma, double a, double b,
                                      double trace_sign = 1.0) {
  if (m < 1 || n < 1) throw Error("covariance_mle: sizes must be positive");
  if (sigma.rows() != sigma.cols() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw Error("covariance_mle: sigma must be symmetric");
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw Error("covariance_mle: sigma is not positive definite");
  const Matrix l = llt.matrixL();
  std::vector<Matrix> ys;
  for (int i = 0; i < m; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Matrix y = Matrix::Zero(sigma.rows(), sigma.cols());
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vector s = l * rng.normal_vector(sigma.rows());
      y += s * s.transpose();
    }
    ys.push_back(y / static_cast<double>(n));
  }
  return covariance_from_samples(ys, static_cast<double>(n), a, b, trace_sign);
}

}  // namespace datos
