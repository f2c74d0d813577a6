#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace datos {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Stacked agent variables: row i belongs to agent i.
using Stack = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using VecRef = Eigen::Ref<Vector>;
using ConstVecRef = Eigen::Ref<const Vector>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// All library failures surface as datos::Error (or a subclass carrying context).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// a / b with the convention 0/0 = +inf (and x/0 = +inf for x >= 0).
inline double ratio_or_inf(double num, double den) {
  if (den <= 0.0) return kInf;
  return num / den;
}

// Row i of a stacked matrix as a column vector view.
inline auto row_vec(Stack& X, Eigen::Index i) { return X.row(i).transpose(); }
inline auto row_vec(const Stack& X, Eigen::Index i) { return X.row(i).transpose(); }

}  // namespace datos
