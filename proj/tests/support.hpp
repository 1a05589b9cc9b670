#pragma once

#include <initializer_list>

#include <gtest/gtest.h>

#include "opext/numkit.hpp"

namespace opext::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
  const auto r = static_cast<Index>(rows.size());
  const auto c = r == 0 ? Index{0} : static_cast<Index>(rows.begin()->size());
  Matrix m(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (const Complex& v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline Matrix diag(std::initializer_list<double> d) {
  Matrix m = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double v : d) m(i, i) = v, ++i;
  return m;
}

inline Matrix e(Index n, Index i) {
  Matrix v = Matrix::Zero(n, 1);
  v(i, 0) = 1.0;
  return v;
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline ::testing::AssertionResult near(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    return ::testing::AssertionFailure() << "shape " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
                                         << b.cols();
  }
  const double d = max_abs(a - b);
  if (d <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max entry difference " << d << " > " << tol << "\n" << a << "\nvs\n" << b;
}

}  // namespace opext::testing
