#pragma once
// Brute-force reference implementations shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stylespace/stylegen.hpp"

namespace oracle {

// Every threshold of the sweep, with FPR and FNR counted from scratch.
inline double eer(const std::vector<double>& s, const std::vector<bool>& y) {
  std::vector<double> u(s);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  std::vector<double> th{-INFINITY};
  for (std::size_t i = 0; i + 1 < u.size(); ++i) th.push_back((u[i] + u[i + 1]) / 2.0);
  th.push_back(INFINITY);
  double P = 0, N = 0;
  for (bool b : y) (b ? P : N) += 1;
  std::vector<double> fpr, fnr;
  for (double t : th) {
    double fp = 0, fn = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const bool pred = s[i] >= t;
      if (pred && !y[i]) ++fp;
      if (!pred && y[i]) ++fn;
    }
    fpr.push_back(fp / N);
    fnr.push_back(fn / P);
  }
  for (std::size_t i = 0; i < th.size(); ++i) {
    if (fpr[i] == fnr[i]) return fpr[i];
    if (fpr[i] < fnr[i]) {
      // Linear crossing between threshold i-1 and i.
      const double d0 = fpr[i - 1] - fnr[i - 1], d1 = fpr[i] - fnr[i];
      const double a = d0 / (d0 - d1);
      const double f = fpr[i - 1] + a * (fpr[i] - fpr[i - 1]);
      const double g = fnr[i - 1] + a * (fnr[i] - fnr[i - 1]);
      return (f + g) / 2.0;
    }
  }
  return NAN;
}

inline double average_precision(const std::vector<double>& s, const std::vector<bool>& y) {
  double sum = 0, P = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    ++P;
    auto rank_of = [&](std::size_t j) {
      std::size_t r = 1;
      for (std::size_t m = 0; m < s.size(); ++m) r += s[m] > s[j] || (s[m] == s[j] && m < j);
      return r;
    };
    const std::size_t r = rank_of(i);
    double hits = 0;
    for (std::size_t j = 0; j < s.size(); ++j) hits += y[j] && rank_of(j) <= r;
    sum += hits / static_cast<double>(r);
  }
  return sum / P;
}

inline double dcor(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const auto n = x.rows();
  auto center = [n](const Eigen::MatrixXd& d) {
    Eigen::MatrixXd a(n, n);
    double grand = 0;
    std::vector<double> row(static_cast<std::size_t>(n), 0.0), col(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        row[static_cast<std::size_t>(i)] += d(i, j) / static_cast<double>(n);
        col[static_cast<std::size_t>(j)] += d(i, j) / static_cast<double>(n);
        grand += d(i, j) / static_cast<double>(n * n);
      }
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        a(i, j) = d(i, j) - row[static_cast<std::size_t>(i)] - col[static_cast<std::size_t>(j)] + grand;
    return a;
  };
  const auto a = center(x), b = center(y);
  double xy = 0, xx = 0, yy = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      xy += a(i, j) * b(i, j);
      xx += a(i, j) * a(i, j);
      yy += b(i, j) * b(i, j);
    }
  return std::sqrt(xy / std::sqrt(xx * yy));
}

// Direct summation of both KL directions after the same additive smoothing.
inline double sym_kl(std::vector<double> p, std::vector<double> q, double eps) {
  double sp = 0.0, sq = 0.0;
  for (auto& x : p) sp += (x += eps);
  for (auto& x : q) sq += (x += eps);
  double pq = 0.0, qp = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i] / sp, b = q[i] / sq;
    pq += a * std::log(a / b);
    qp += b * std::log(b / a);
  }
  return 0.5 * (pq + qp);
}

// Similarity given by an explicit table; unlisted pairs score 0.
class TableProvider : public stylespace::SimilarityProvider {
 public:
  void set(const std::string& a, const std::string& b, double s) {
    table_[{a, b}] = s;
    table_[{b, a}] = s;
  }
  double score(std::string_view a, std::string_view b) const override {
    if (a == b) return 1.0;
    auto it = table_.find({std::string(a), std::string(b)});
    return it == table_.end() ? 0.0 : it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, double> table_;
};

// Transitive closure over the thresholded similarity graph, by repeated relaxation.
inline std::vector<std::set<std::size_t>> closure(const std::vector<std::string>& s, const stylespace::SimilarityProvider& p,
                                                  double threshold) {
  const std::size_t n = s.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] = i == j || s[i] == s[j] || p.score(s[i], s[j]) >= threshold;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
  std::vector<std::set<std::size_t>> groups;
  std::vector<bool> done(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::set<std::size_t> g;
    for (std::size_t j = 0; j < n; ++j)
      if (r[i][j]) {
        g.insert(j);
        done[j] = true;
      }
    groups.push_back(g);
  }
  return groups;
}

}  // namespace oracle
