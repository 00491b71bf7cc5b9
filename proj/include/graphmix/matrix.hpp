#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "graphmix/parallel.hpp"

namespace graphmix {

// work threshold below which row-parallel dispatch is not worth the wakeup
inline constexpr double kParallelFlopThreshold = 5e5;

// Dense row-major matrix of doubles. The whole numeric stack runs in 64-bit
// precision so gradient checks against finite differences stay tight.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::vector<double> values) : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != static_cast<std::size_t>(r) * c) {
      throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }
  }

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (double v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

// C = A * B. Output rows are independent, so the parallel split is
// bit-identical to the sequential kernel.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols == b.rows);
  Matrix c(a.rows, b.cols);
  auto kernel = [&](int r0, int r1) {
    for (int i = r0; i < r1; ++i) {
      const double* arow = a.row(i);
      double* crow = c.row(i);
      for (int k = 0; k < a.cols; ++k) {
        const double aik = arow[k];
        if (aik == 0.0) continue;
        const double* brow = b.row(k);
        for (int j = 0; j < b.cols; ++j) {
          crow[j] += aik * brow[j];
        }
      }
    }
  };
  if (static_cast<double>(a.rows) * a.cols * b.cols >= kParallelFlopThreshold) {
    parallel_rows(a.rows, kernel);
  } else {
    kernel(0, a.rows);
  }
  return c;
}

// C = A^T * B  (A is [k x m], B is [k x n], C is [m x n])
inline Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  assert(a.rows == b.rows);
  Matrix c(a.cols, b.cols);
  auto kernel = [&](int i0, int i1) {
    for (int k = 0; k < a.rows; ++k) {
      const double* arow = a.row(k);
      const double* brow = b.row(k);
      for (int i = i0; i < i1; ++i) {
        const double aki = arow[i];
        if (aki == 0.0) continue;
        double* crow = c.row(i);
        for (int j = 0; j < b.cols; ++j) {
          crow[j] += aki * brow[j];
        }
      }
    }
  };
  if (static_cast<double>(a.rows) * a.cols * b.cols >= kParallelFlopThreshold) {
    parallel_rows(a.cols, kernel);
  } else {
    kernel(0, a.cols);
  }
  return c;
}

// C = A * B^T  (A is [m x k], B is [n x k], C is [m x n]); transposing B
// first keeps the hot loop on contiguous rows.
inline Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  assert(a.cols == b.cols);
  Matrix bt(b.cols, b.rows);
  for (int i = 0; i < b.rows; ++i) {
    const double* brow = b.row(i);
    for (int j = 0; j < b.cols; ++j) {
      bt(j, i) = brow[j];
    }
  }
  return matmul(a, bt);
}

// dst += scale * src
inline void axpy(Matrix& dst, const Matrix& src, double scale = 1.0) {
  assert(dst.rows == src.rows && dst.cols == src.cols);
  for (std::size_t i = 0; i < dst.data.size(); ++i) {
    dst.data[i] += scale * src.data[i];
  }
}

inline void scale_inplace(Matrix& m, double s) {
  for (double& v : m.data) v *= s;
}

}  // namespace graphmix
