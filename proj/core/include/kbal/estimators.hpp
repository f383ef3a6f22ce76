#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kbal/dataset.hpp"
#include "kbal/kernels.hpp"
#include "kbal/solver.hpp"

namespace kbal {

struct EstimateOptions {
  KernelSpec kernel;
  double sigma = 0.1;  // ridge scale; sigma^2 enters the weight solve
  double level = 0.95;
  bool scaled = true;  // report psi^c = (n / n_target) * psi
};

struct EstimateReport {
  std::string estimator;
  double point = 0.0;
  double variance = 0.0;  // V-hat; the CI applies the scaling adjustment
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  bool scaled = true;
  int n = 0;
  int n_obs = 0;
  int n_target = 0;
  double sigma = 0.0;              // ridge scale, kernel estimators only
  double jitter_added = 0.0;       // diagonal jitter from the weight solve
  double max_abs_weight = 0.0;     // largest |weight| this estimator put on a unit
  bool propensity_converged = true;
};

// Logistic regression of 1{W = 0} on X with an intercept, fit by Newton
// iterations from zero. Converged means the score's largest component fell
// to 1e-10 within 100 iterations; separation or a singular Hessian leaves
// converged false and the last finite iterate in place. Fitted probabilities
// are clipped to [1e-6, 1 - 1e-6] for downstream weighting.
struct PropensityFit {
  Eigen::VectorXd coef;    // intercept first
  Eigen::VectorXd fitted;  // all n units, clipped
  bool converged = false;
  int iterations = 0;
  double clip = 1e-6;
};

PropensityFit fit_propensity(const Eigen::MatrixXd& x, const Eigen::VectorXi& w);

// Least squares of y_obs on [1 X] over the observation group. Collinear
// columns are dropped deterministically, scanning left to right with the
// intercept first.
struct OlsFit {
  Eigen::VectorXd coef;       // over kept design columns
  std::vector<int> kept;      // kept design-column indices; 0 is the intercept
  Eigen::VectorXd fitted_all; // predictions for every unit
};

OlsFit ols_fit(const Dataset& data);

// V-hat for a weighting estimator with the given weights on the observation
// group: the spread of an auxiliary OLS regression's predictions over the
// target around the (unscaled) point, plus the weighted squared residuals
// averaged over the observation group:
//   V = n^{-1} sum_{T=1} (m(X_i) - psi)^2
//     + n_obs^{-1} sum_{W=0} gamma_i^2 (Y_i - m(X_i))^2.
// The residual term is averaged over the observation group, not the full
// sample; this is the normalization that reproduces published reference
// results for this family of estimators.
// CI: point +- z * adj * sqrt(V / n), adj = n / n_target when scaled.
struct VarianceReport {
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

VarianceReport estimate_variance(const Dataset& data, const Eigen::VectorXd& gamma_obs, double point_unscaled,
                                 bool scaled, double level);

// Shared-work session: one Gram build, one weight solve, one OLS fit and one
// propensity fit serve every estimator requested on the same data. The free
// estimate_* functions below construct a fresh session, so batching through
// a session changes cost, never values.
class EstimateSession {
 public:
  EstimateSession(const Dataset& data, const EstimateOptions& opts);
  ~EstimateSession();
  EstimateSession(EstimateSession&&) noexcept;
  EstimateSession& operator=(EstimateSession&&) noexcept;

  // name is one of ml, mlt, ols, ipw, aipw.
  EstimateReport estimate(const std::string& name);
  std::vector<EstimateReport> estimate_all(const std::vector<std::string>& names);

  const GramBlocks& blocks();
  const BalanceWeights& weights();
  const PropensityFit& propensity();
  const OlsFit& ols();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

EstimateReport estimate_ml(const Dataset& data, const EstimateOptions& opts);
EstimateReport estimate_mlt(const Dataset& data, const EstimateOptions& opts);
EstimateReport estimate_ols(const Dataset& data, const EstimateOptions& opts);   // kernel fields unused
EstimateReport estimate_ipw(const Dataset& data, const EstimateOptions& opts);   // kernel fields unused
EstimateReport estimate_aipw(const Dataset& data, const EstimateOptions& opts);  // kernel fields unused

// Average effect on the W=1 group: the W=1 outcome mean minus the scaled
// minimax estimate retargeted at the W=1 units (the target rule is forced to
// T = 1{W = 1}; outcomes must be recorded for both groups). The variance adds
// the W=1 outcome variance to the weighting variance, both per target unit,
// and the CI uses sqrt(V / n_target).
EstimateReport estimate_att(const Dataset& data, const EstimateOptions& opts);

// Names accepted by estimate()/estimate_all, in canonical order.
const std::vector<std::string>& estimator_names();

}  // namespace kbal
