#pragma once
// Dense vector helpers. Embeddings are plain std::vector<double>.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "stylespace/error.hpp"

namespace stylespace {

using Vector = std::vector<double>;

inline void require_same_dim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ComputeError("dimension mismatch: " + std::to_string(u.size()) + " vs " +
                       std::to_string(v.size()));
  }
}

inline double dot(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

inline double l2_norm(std::span<const double> u) { return std::sqrt(dot(u, u)); }

inline double squared_euclidean(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return s;
}

inline Vector normalized(std::span<const double> u) {
  const double n = l2_norm(u);
  if (n == 0.0) throw ComputeError("cannot normalize a zero vector");
  Vector out(u.begin(), u.end());
  for (double& x : out) x /= n;
  return out;
}

// Unweighted arithmetic mean of equally sized vectors.
inline Vector mean_of(const std::vector<std::span<const double>>& rows) {
  if (rows.empty()) throw ComputeError("mean of an empty set of vectors");
  Vector acc(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    require_same_dim(acc, r);
    for (std::size_t i = 0; i < r.size(); ++i) acc[i] += r[i];
  }
  for (double& x : acc) x /= static_cast<double>(rows.size());
  return acc;
}

inline Vector mean_of(const std::vector<Vector>& rows) {
  std::vector<std::span<const double>> views(rows.begin(), rows.end());
  return mean_of(views);
}

}  // namespace stylespace
