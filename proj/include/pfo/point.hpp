#pragma once

#include <Eigen/Dense>

#include <string>

#include "pfo/error.hpp"

namespace pfo {

using Index = Eigen::Index;

/// Dense iterate / direction. Column-major rows x cols; vector problems use cols == 1.
using Point = Eigen::MatrixXd;

inline double inner(const Point& a, const Point& b) { return (a.array() * b.array()).sum(); }

inline bool all_finite(const Point& p) { return p.allFinite(); }

inline std::string dims_string(Index rows, Index cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

inline void check_same_dims(const Point& a, const Point& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::DimensionMismatch, std::string(what) + ": dimension mismatch " +
                                           dims_string(a.rows(), a.cols()) + " vs " +
                                           dims_string(b.rows(), b.cols()));
  }
}

}  // namespace pfo
