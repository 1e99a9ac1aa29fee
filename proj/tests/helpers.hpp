#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bayesdiff/dataset.hpp"

namespace testutil {

inline bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Group with all cells observed; values laid out row-major per peptide
// column: values[j] holds column j.
inline bayesdiff::GroupData make_group(
    const std::string& id, const std::vector<std::vector<double>>& columns,
    const std::vector<std::string>& peptides,
    const std::vector<std::string>& proteins = {}) {
  bayesdiff::GroupData g;
  g.group_id = id;
  g.peptide_ids = peptides;
  g.protein_ids = proteins;
  const Eigen::Index n = Eigen::Index(columns.at(0).size());
  const Eigen::Index p = Eigen::Index(columns.size());
  g.values.resize(n, p);
  g.missing = bayesdiff::BoolMask::Constant(n, p, false);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      g.values(i, j) = columns[std::size_t(j)][std::size_t(i)];
  return g;
}

inline void mask_cell(bayesdiff::GroupData& g, Eigen::Index row,
                      Eigen::Index col) {
  g.missing(row, col) = true;
  g.values(row, col) = std::numeric_limits<double>::quiet_NaN();
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

inline double variance(const std::vector<double>& v) {
  double m = mean(v), s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size() - 1);
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    double fa = double(i) / double(a.size());
    double fb = double(j) / double(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

// Critical value of the two-sample KS test at significance alpha.
inline double ks_critical(double alpha, std::size_t n, std::size_t m) {
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt(double(n + m) / double(n * m));
}

}  // namespace testutil
