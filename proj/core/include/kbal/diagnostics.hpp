#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "kbal/dataset.hpp"
#include "kbal/kernels.hpp"

namespace kbal {

// Eigenvalues of (block Gram)/n_block, sorted decreasing, plus a power-decay
// exponent: least squares of log lambda_j on log j over j in [3, j_max],
// skipping the top two eigenvalues and the noise floor (lambda_j below
// 1e-10 * lambda_1; relaxed to 1e-12 * lambda_1 if that leaves fewer than two
// points). fitted_alpha is NaN when no usable fit range exists (for example
// blocks smaller than 5). fit_lo/fit_hi are 1-based eigenvalue indices, 0
// when unset.
struct SpectrumReport {
  Eigen::VectorXd eigenvalues;
  double fitted_alpha = 0.0;
  int fit_lo = 0;
  int fit_hi = 0;
};

enum class GramSide { treated, target };

SpectrumReport spectrum(const GramBlocks& blocks, GramSide side);

// Empirical mean squared distance between two weight sequences over the
// observation group: mean((gamma_i - g_i)^2).
double riesz_mse(const Eigen::VectorXd& gamma, const Eigen::VectorXd& g_values);

// Solves for the minimax weights and measures how closely they recover the
// functional's representer g evaluated at the observation units' covariates
// (raw, unstandardized rows).
double riesz_recovery(const Dataset& data, const KernelSpec& spec, double sigma,
                      const std::function<double(const Eigen::RowVectorXd&)>& g_true);

struct ImbalanceRow {
  std::string name;
  double imbalance = 0.0;   // I_F
  double l2_norm = 0.0;
  double objective = 0.0;   // I_F^2 + sigma^2/n^2 * |gamma|^2
  bool valid = true;
  std::string note;
};

// First row is always the minimax solution; the named sets follow in order.
// A set whose length does not match the observation group is flagged invalid
// with a note instead of aborting the table.
std::vector<ImbalanceRow> compare_imbalance(
    const Dataset& data, const KernelSpec& spec, double sigma,
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& weight_sets);

}  // namespace kbal
