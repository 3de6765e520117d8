#pragma once

#include "hoi/copula.hpp"
#include "hoi/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace hoi::test {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected hoi::Error");
  return ErrorCode::Io;
}

/// A·Aᵀ + shift·I with standard-normal A.
inline CovarianceMatrix random_spd(int n, std::mt19937_64& rng, double shift = 0.5) {
  std::normal_distribution<double> n01;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n01(rng);
  CovarianceMatrix c;
  c.sigma = a * a.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
  return c;
}

/// Recursive k-subset generator, used as the enumeration oracle.
inline void naive_combinations(int n, int k, int start, std::vector<int>& cur,
                               std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (int v = start; v < n; ++v) {
    cur.push_back(v);
    naive_combinations(n, k, v + 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::vector<int>> naive_combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  naive_combinations(n, k, 0, cur, out);
  return out;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) / scale;
}

}  // namespace hoi::test
