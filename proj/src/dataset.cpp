#include "bayesdiff/dataset.hpp"

#include <cmath>
#include <unordered_set>

#include "bayesdiff/errors.hpp"

namespace bayesdiff {

std::vector<double> GroupData::observed(Eigen::Index col) const {
  std::vector<double> out;
  out.reserve(std::size_t(n()));
  for (Eigen::Index row = 0; row < n(); ++row)
    if (!missing(row, col)) out.push_back(values(row, col));
  return out;
}

Eigen::Index GroupData::observed_count(Eigen::Index col) const {
  Eigen::Index c = 0;
  for (Eigen::Index row = 0; row < n(); ++row)
    if (!missing(row, col)) ++c;
  return c;
}

void GroupData::validate() const {
  if (values.rows() < 1) throw InvalidInput("group '" + group_id + "' is empty");
  if (missing.rows() != values.rows() || missing.cols() != values.cols())
    throw DimensionError("mask shape must match values");
  if (peptide_ids.size() != std::size_t(values.cols()))
    throw DimensionError("one peptide id per column required");
  if (!protein_ids.empty() && protein_ids.size() != peptide_ids.size())
    throw DimensionError("protein ids must be empty or one per peptide");
  std::unordered_set<std::string> seen;
  for (const auto& id : peptide_ids)
    if (!seen.insert(id).second)
      throw InvalidInput("duplicate peptide id '" + id + "'");
  for (Eigen::Index c = 0; c < p(); ++c)
    for (Eigen::Index r = 0; r < n(); ++r)
      if (!missing(r, c) && !std::isfinite(values(r, c)))
        throw InvalidInput("non-finite observed value at row " +
                           std::to_string(r) + ", peptide '" +
                           peptide_ids[std::size_t(c)] + "'");
}

}  // namespace bayesdiff
