#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace kbal {

// One sample: covariates X, group labels W (0 = observation group, the units
// whose outcomes are recorded), outcomes Y, and target membership T.
// Y entries for units outside the observation group are NaN and must never
// be read; y_observed tracks which entries are real. In particular a missing
// outcome is never stored as 0.
struct Dataset {
  Eigen::MatrixXd x;                 // n x d
  Eigen::VectorXi w;                 // n
  Eigen::VectorXd y;                 // n, NaN where unobserved
  Eigen::VectorXi t;                 // n, 0/1 target membership
  std::vector<unsigned char> y_observed;
  std::vector<std::string> column_names;  // covariate names; may be empty

  int n() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
  int n_obs() const;
  int n_target() const;
  std::vector<int> obs_index() const;     // indices with w == 0
  std::vector<int> target_index() const;  // indices with t == 1

  Eigen::VectorXd y_obs() const;  // outcomes of the observation group, in index order

  // Throws SchemaError on size mismatches or a missing outcome in the
  // observation group; throws DomainError when either group is empty.
  void validate() const;
};

// How the target column is derived when a file has none.
enum class TargetRule { all, w1, column };

// Center every column at its full-sample mean and divide by the full-sample
// standard deviation (divisor n-1). Constant columns are centered only.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x);

}  // namespace kbal
