#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "zominimax/error.hpp"
#include "zominimax/problem.hpp"

#define EXPECT_ERROR_KIND(stmt, k)                                     \
  do {                                                                 \
    try {                                                              \
      stmt;                                                            \
      ADD_FAILURE() << "expected zominimax::Error from " #stmt;        \
    } catch (const zominimax::Error& e_) {                             \
      EXPECT_EQ(e_.kind(), (k)) << e_.what();                          \
    }                                                                  \
  } while (0)

namespace zmtest {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_var(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}


}  // namespace zmtest
