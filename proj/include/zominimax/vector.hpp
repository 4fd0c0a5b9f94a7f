#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include "zominimax/error.hpp"

namespace zominimax {

/// Dense point/gradient in R^d. Finite-ness is checked at API boundaries
/// with require_finite rather than on every arithmetic result.
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double value : values) v[i++] = value;
  return v;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline std::string to_string(const Vector& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  os << ")";
  return os.str();
}

inline const Vector& require_finite(const Vector& v, std::string_view what) {
  if (v.size() == 0) {
    throw Error(ErrorKind::kInvalidArgument, std::string(what) + " is empty");
  }
  if (!v.allFinite()) {
    throw Error(ErrorKind::kNonFinite, std::string(what) + " has non-finite entries",
                to_string(v));
  }
  return v;
}

inline void require_dim(const Vector& v, Eigen::Index dim, std::string_view what) {
  if (v.size() != dim) {
    std::ostringstream os;
    os << what << ": expected dimension " << dim << ", got " << v.size();
    throw Error(ErrorKind::kDimensionMismatch, os.str());
  }
}

}  // namespace zominimax
