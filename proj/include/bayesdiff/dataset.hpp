#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bayesdiff {

using BoolMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One experimental condition: N_k samples by P peptides. Missing cells are
// true in the mask and NaN in values; observed cells are finite.
struct GroupData {
  std::string group_id;
  Eigen::MatrixXd values;               // N_k x P
  BoolMask missing;                     // N_k x P
  std::vector<std::string> peptide_ids; // length P
  std::vector<std::string> protein_ids; // empty, or length P
  bool declared_imputed = false;        // user says cells were filled upstream

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }
  bool has_proteins() const { return !protein_ids.empty(); }

  // Observed values of one peptide column, in row order.
  std::vector<double> observed(Eigen::Index col) const;
  Eigen::Index observed_count(Eigen::Index col) const;

  // Shape/consistency checks; throws InvalidInput.
  void validate() const;
};

}  // namespace bayesdiff
