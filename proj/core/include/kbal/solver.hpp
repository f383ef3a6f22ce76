#pragma once

#include <Eigen/Dense>

#include "kbal/kernels.hpp"

namespace kbal {

// Minimax weights over the observation group. gamma solves
//   (K_ZZ + sigma2 I) gamma = K_ZT 1,
// the first-order condition of
//   objective(gamma) = imbalance(gamma)^2 + (sigma2 / n^2) ||gamma||^2,
// where imbalance is the worst-case mean discrepancy over the kernel's unit
// ball (see balance_norm). Weights for units outside the observation group
// are identically zero and are not stored.
struct BalanceWeights {
  Eigen::VectorXd gamma;  // n_obs
  double imbalance = 0.0;
  double objective = 0.0;
  double jitter_added = 0.0;  // diagonal shift needed to factorize, 0 if none
};

BalanceWeights solve_weights(const GramBlocks& blocks, int n_total, double sigma2);

// I_F(gamma) = n^{-1} sqrt(1'K_TT 1 - 2 gamma'K_ZT 1 + gamma'K_ZZ gamma),
// the supremum of the weighted-mean error over unit-norm functions in the
// kernel's space. Tiny negative quadratic forms from roundoff are clamped
// to zero before the square root.
double balance_norm(const GramBlocks& blocks, const Eigen::VectorXd& gamma, int n_total);

// Kernel ridge regression on the observation group: dual coefficients
// (K_ZZ + sigma2 I)^{-1} y_obs, minimizing the mean squared error plus
// (sigma2 / n_obs) times the squared function norm.
struct RidgeFit {
  Eigen::VectorXd coef;  // n_obs dual coefficients
  double sigma2 = 0.0;
  double jitter_added = 0.0;
};

RidgeFit ridge_fit(const GramBlocks& blocks, const Eigen::VectorXd& y_obs, double sigma2);

// Fitted values at the observation points: K_ZZ coef.
Eigen::VectorXd ridge_predict_obs(const GramBlocks& blocks, const RidgeFit& fit);
// Fitted values at the target points: K_ZT' coef.
Eigen::VectorXd ridge_predict_target(const GramBlocks& blocks, const RidgeFit& fit);

// The weighting estimate n^{-1} gamma'y_obs and the regression estimate
// n^{-1} sum over targets of the ridge fit are equal in exact arithmetic;
// both are computed from their own factorization as a self-check.
struct DualityReport {
  double weighting_estimate = 0.0;
  double regression_estimate = 0.0;
  double gap = 0.0;  // absolute difference
};

DualityReport check_duality(const GramBlocks& blocks, const Eigen::VectorXd& y_obs, int n_total, double sigma2);

}  // namespace kbal
