#pragma once

#include <cmath>
#include <numbers>

#include "datos/core.hpp"

namespace datos {

// Isometric flattening of symmetric matrices. The upper triangle is stored
// row by row (i <= j); off-diagonal entries are scaled by sqrt(2) so that the
// Frobenius inner product of two matrices equals the Euclidean inner product
// of their flats.
namespace symflat {

inline Eigen::Index flat_size(Eigen::Index side) { return side * (side + 1) / 2; }

inline Eigen::Index side_from_flat(Eigen::Index n) {
  const auto side = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * static_cast<double>(n) + 1.0) - 1.0) / 2.0));
  if (flat_size(side) != n) throw Error("symflat: length " + std::to_string(n) + " is not triangular");
  return side;
}

inline Vector flatten(const Matrix& x) {
  if (x.rows() != x.cols()) throw Error("symflat: matrix is not square");
  const Eigen::Index n = x.rows();
  Vector out(flat_size(n));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      out(k++) = (i == j) ? x(i, i) : std::numbers::sqrt2 * x(i, j);
  return out;
}

inline Matrix unflatten(const ConstVecRef& flat, Eigen::Index side) {
  if (flat.size() != flat_size(side)) throw Error("symflat: length does not match side");
  Matrix out(side, side);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < side; ++i)
    for (Eigen::Index j = i; j < side; ++j) {
      const double v = (i == j) ? flat(k) : flat(k) / std::numbers::sqrt2;
      out(i, j) = v;
      out(j, i) = v;
      ++k;
    }
  return out;
}

inline Matrix unflatten(const ConstVecRef& flat) { return unflatten(flat, side_from_flat(flat.size())); }

inline Vector identity(Eigen::Index side) { return flatten(Matrix::Identity(side, side)); }

}  // namespace symflat
}  // namespace datos
