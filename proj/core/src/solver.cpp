#include "kbal/solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "kbal/errors.hpp"

namespace kbal {

namespace {

struct SpdSolve {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

// Cholesky of K + sigma2 I with an escalating diagonal jitter fallback.
// The ladder starts at 1e-12 tr(K)/m and grows tenfold up to 1e-6 tr(K)/m.
SpdSolve factor_spd(const Eigen::MatrixXd& k, double sigma2) {
  const auto m = k.rows();
  if (m == 0) throw DomainError("empty system");
  if (sigma2 < 0.0) throw ConfigError("sigma2 must be nonnegative");
  Eigen::MatrixXd a = k;
  a.diagonal().array() += sigma2;
  SpdSolve s;
  s.llt.compute(a);
  if (s.llt.info() == Eigen::Success) return s;
  const double scale = k.trace() / static_cast<double>(m);
  for (double mult = 1e-12; mult <= 1e-6 * 1.5; mult *= 10.0) {
    const double jitter = mult * scale;
    Eigen::MatrixXd aj = a;
    aj.diagonal().array() += jitter;
    s.llt.compute(aj);
    if (s.llt.info() == Eigen::Success) {
      s.jitter = jitter;
      return s;
    }
  }
  throw NumericalError("Cholesky failed up to jitter 1e-6 tr/m (rcond ~ " + std::to_string(s.llt.rcond()) + ")");
}

}  // namespace

double balance_norm(const GramBlocks& blocks, const Eigen::VectorXd& gamma, int n_total) {
  if (gamma.size() != blocks.zz.rows()) throw DomainError("gamma length does not match the observation group");
  const double tt = blocks.tt.sum();
  const double zt = gamma.dot(blocks.zt.rowwise().sum());
  const double zz = gamma.dot(blocks.zz * gamma);
  const double q = tt - 2.0 * zt + zz;
  return std::sqrt(q > 0.0 ? q : 0.0) / static_cast<double>(n_total);
}

BalanceWeights solve_weights(const GramBlocks& blocks, int n_total, double sigma2) {
  if (n_total <= 0) throw DomainError("n_total must be positive");
  const SpdSolve s = factor_spd(blocks.zz, sigma2);
  BalanceWeights w;
  w.gamma = s.llt.solve(blocks.zt.rowwise().sum());
  w.jitter_added = s.jitter;
  w.imbalance = balance_norm(blocks, w.gamma, n_total);
  const double n2 = static_cast<double>(n_total) * static_cast<double>(n_total);
  w.objective = w.imbalance * w.imbalance + sigma2 / n2 * w.gamma.squaredNorm();
  return w;
}

RidgeFit ridge_fit(const GramBlocks& blocks, const Eigen::VectorXd& y_obs, double sigma2) {
  if (y_obs.size() != blocks.zz.rows()) throw DomainError("y_obs length does not match the observation group");
  const SpdSolve s = factor_spd(blocks.zz, sigma2);
  RidgeFit fit;
  fit.coef = s.llt.solve(y_obs);
  fit.sigma2 = sigma2;
  fit.jitter_added = s.jitter;
  return fit;
}

Eigen::VectorXd ridge_predict_obs(const GramBlocks& blocks, const RidgeFit& fit) { return blocks.zz * fit.coef; }

Eigen::VectorXd ridge_predict_target(const GramBlocks& blocks, const RidgeFit& fit) {
  return blocks.zt.transpose() * fit.coef;
}

DualityReport check_duality(const GramBlocks& blocks, const Eigen::VectorXd& y_obs, int n_total, double sigma2) {
  DualityReport rep;
  const BalanceWeights w = solve_weights(blocks, n_total, sigma2);
  rep.weighting_estimate = w.gamma.dot(y_obs) / static_cast<double>(n_total);
  const RidgeFit fit = ridge_fit(blocks, y_obs, sigma2);
  rep.regression_estimate = ridge_predict_target(blocks, fit).sum() / static_cast<double>(n_total);
  rep.gap = std::abs(rep.weighting_estimate - rep.regression_estimate);
  return rep;
}

}  // namespace kbal
