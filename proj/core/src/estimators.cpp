#include "kbal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kbal/errors.hpp"
#include "kbal/normal.hpp"

namespace kbal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::MatrixXd design_with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd d(x.rows(), x.cols() + 1);
  d.col(0).setOnes();
  if (x.cols() > 0) d.rightCols(x.cols()) = x;
  return d;
}

}  // namespace

PropensityFit fit_propensity(const Eigen::MatrixXd& x, const Eigen::VectorXi& w) {
  const Eigen::Index n = x.rows();
  if (w.size() != n) throw SchemaError("fit_propensity: w length does not match x rows");
  Eigen::MatrixXd d = design_with_intercept(x);
  const Eigen::Index p = d.cols();
  Eigen::VectorXd resp(n);
  for (Eigen::Index i = 0; i < n; ++i) resp[i] = (w[i] == 0) ? 1.0 : 0.0;

  PropensityFit fit;
  fit.coef = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd prob(n);
  for (int it = 1; it <= 100; ++it) {
    fit.iterations = it;
    Eigen::VectorXd eta = d * fit.coef;
    for (Eigen::Index i = 0; i < n; ++i) prob[i] = expit(eta[i]);
    Eigen::VectorXd score = d.transpose() * (resp - prob);
    if (score.lpNorm<Eigen::Infinity>() <= 1e-10) {
      // A score that vanishes at saturated probabilities (|eta| >= 30) is
      // the signature of separation, not of a finite optimum.
      fit.converged = eta.lpNorm<Eigen::Infinity>() < 30.0;
      break;
    }
    Eigen::VectorXd wt = prob.array() * (1.0 - prob.array());
    Eigen::MatrixXd hess = d.transpose() * wt.asDiagonal() * d;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) break;
    Eigen::VectorXd step = ldlt.solve(score);
    if (!step.allFinite()) break;
    Eigen::VectorXd next = fit.coef + step;
    if (!next.allFinite() || next.lpNorm<Eigen::Infinity>() > 1e8) break;
    fit.coef = next;
  }

  Eigen::VectorXd eta = d * fit.coef;
  fit.fitted.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    fit.fitted[i] = std::clamp(expit(eta[i]), fit.clip, 1.0 - fit.clip);
  }
  return fit;
}

OlsFit ols_fit(const Dataset& data) {
  const std::vector<int> obs = data.obs_index();
  const Eigen::Index n_obs = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd d_all = design_with_intercept(data.x);
  const Eigen::Index p = d_all.cols();
  Eigen::MatrixXd d_obs(n_obs, p);
  Eigen::VectorXd y_obs(n_obs);
  for (Eigen::Index k = 0; k < n_obs; ++k) {
    d_obs.row(k) = d_all.row(obs[static_cast<size_t>(k)]);
    y_obs[k] = data.y[obs[static_cast<size_t>(k)]];
  }

  Eigen::MatrixXd gram = d_obs.transpose() * d_obs;

  // Incremental Cholesky over design columns, left to right. A column whose
  // pivot falls below 1e-10 of its raw squared norm is collinear with the
  // columns already kept and is dropped.
  OlsFit fit;
  Eigen::MatrixXd chol(p, p);  // lower triangle over kept columns
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index m = static_cast<Eigen::Index>(fit.kept.size());
    Eigen::VectorXd g(m);
    for (Eigen::Index r = 0; r < m; ++r) g[r] = gram(fit.kept[static_cast<size_t>(r)], j);
    Eigen::VectorXd c =
        m > 0 ? chol.topLeftCorner(m, m).triangularView<Eigen::Lower>().solve(g) : Eigen::VectorXd(0);
    double pivot2 = gram(j, j) - c.squaredNorm();
    if (!(gram(j, j) > 0.0) || pivot2 <= 1e-10 * gram(j, j)) continue;
    chol.row(m).head(m) = c.transpose();
    chol(m, m) = std::sqrt(pivot2);
    fit.kept.push_back(static_cast<int>(j));
  }

  const Eigen::Index m = static_cast<Eigen::Index>(fit.kept.size());
  if (m == 0) throw NumericalError("ols_fit: no usable design columns");
  Eigen::MatrixXd d_kept(n_obs, m);
  for (Eigen::Index r = 0; r < m; ++r) d_kept.col(r) = d_obs.col(fit.kept[static_cast<size_t>(r)]);
  Eigen::VectorXd rhs = d_kept.transpose() * y_obs;
  auto lower = chol.topLeftCorner(m, m).triangularView<Eigen::Lower>();
  fit.coef = lower.transpose().solve(lower.solve(rhs));

  Eigen::MatrixXd d_all_kept(data.n(), m);
  for (Eigen::Index r = 0; r < m; ++r) d_all_kept.col(r) = d_all.col(fit.kept[static_cast<size_t>(r)]);
  fit.fitted_all = d_all_kept * fit.coef;
  return fit;
}

namespace {

// Linear-smoother weights of the averaged OLS prediction over the target:
// gamma_i = d_i' (D'D)^{-1} sum_{T=1} d_j, one entry per observation unit.
Eigen::VectorXd ols_weights(const Dataset& data, const OlsFit& fit) {
  const std::vector<int> obs = data.obs_index();
  const std::vector<int> target = data.target_index();
  Eigen::MatrixXd d_all = design_with_intercept(data.x);
  const Eigen::Index m = static_cast<Eigen::Index>(fit.kept.size());
  Eigen::MatrixXd d_obs(static_cast<Eigen::Index>(obs.size()), m);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (size_t k = 0; k < obs.size(); ++k) {
      d_obs(static_cast<Eigen::Index>(k), r) = d_all(obs[k], fit.kept[static_cast<size_t>(r)]);
    }
  }
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
  for (int i : target) {
    for (Eigen::Index r = 0; r < m; ++r) s[r] += d_all(i, fit.kept[static_cast<size_t>(r)]);
  }
  Eigen::MatrixXd gram = d_obs.transpose() * d_obs;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("ols_weights: singular design gram");
  Eigen::VectorXd u = ldlt.solve(s);
  return d_obs * u;
}

VarianceReport variance_from_parts(const Dataset& data, const Eigen::VectorXd& gamma_obs,
                                   const Eigen::VectorXd& fitted_all, double point_unscaled, bool scaled,
                                   double level) {
  const std::vector<int> obs = data.obs_index();
  const std::vector<int> target = data.target_index();
  if (gamma_obs.size() != static_cast<Eigen::Index>(obs.size())) {
    throw SchemaError("estimate_variance: gamma length does not match the observation group");
  }
  const double n = static_cast<double>(data.n());
  const double n_obs = static_cast<double>(obs.size());
  const double n_target = static_cast<double>(target.size());

  double fit_spread = 0.0;
  for (int i : target) {
    const double d = fitted_all[i] - point_unscaled;
    fit_spread += d * d;
  }
  fit_spread /= n;

  double resid = 0.0;
  for (size_t k = 0; k < obs.size(); ++k) {
    const double r = data.y[obs[k]] - fitted_all[obs[k]];
    const double g = gamma_obs[static_cast<Eigen::Index>(k)];
    resid += g * g * r * r;
  }
  resid /= n_obs;

  VarianceReport rep;
  rep.variance = fit_spread + resid;
  const double adj = scaled ? n / n_target : 1.0;
  const double point = scaled ? point_unscaled * n / n_target : point_unscaled;
  const double hw = z_quantile(level) * adj * std::sqrt(rep.variance / n);
  rep.ci_low = point - hw;
  rep.ci_high = point + hw;
  return rep;
}

}  // namespace

VarianceReport estimate_variance(const Dataset& data, const Eigen::VectorXd& gamma_obs, double point_unscaled,
                                 bool scaled, double level) {
  OlsFit fit = ols_fit(data);
  return variance_from_parts(data, gamma_obs, fit.fitted_all, point_unscaled, scaled, level);
}

struct EstimateSession::Impl {
  const Dataset& data;
  EstimateOptions opts;
  std::optional<GramBlocks> blocks;
  std::optional<BalanceWeights> weights;
  std::optional<OlsFit> ols;
  std::optional<PropensityFit> propensity;

  Impl(const Dataset& d, const EstimateOptions& o) : data(d), opts(o) { data.validate(); }

  const GramBlocks& get_blocks() {
    if (!blocks) blocks = gram_blocks(data, opts.kernel);
    return *blocks;
  }

  const BalanceWeights& get_weights() {
    if (!weights) {
      weights = solve_weights(get_blocks(), static_cast<int>(data.n()), opts.sigma * opts.sigma);
    }
    return *weights;
  }

  const OlsFit& get_ols() {
    if (!ols) ols = ols_fit(data);
    return *ols;
  }

  const PropensityFit& get_propensity() {
    if (!propensity) propensity = fit_propensity(data.x, data.w);
    return *propensity;
  }

  EstimateReport base_report(const std::string& name) const {
    EstimateReport rep;
    rep.estimator = name;
    rep.level = opts.level;
    rep.scaled = opts.scaled;
    rep.n = static_cast<int>(data.n());
    rep.n_obs = static_cast<int>(data.n_obs());
    rep.n_target = static_cast<int>(data.n_target());
    rep.sigma = kNaN;
    return rep;
  }

  void finish(EstimateReport& rep, const Eigen::VectorXd& gamma_obs, double point_unscaled) {
    const double n = static_cast<double>(data.n());
    const double n_target = static_cast<double>(data.n_target());
    rep.point = opts.scaled ? point_unscaled * n / n_target : point_unscaled;
    rep.max_abs_weight = gamma_obs.size() > 0 ? gamma_obs.lpNorm<Eigen::Infinity>() : 0.0;
    VarianceReport var = variance_from_parts(data, gamma_obs, get_ols().fitted_all, point_unscaled,
                                             opts.scaled, opts.level);
    rep.variance = var.variance;
    rep.ci_low = var.ci_low;
    rep.ci_high = var.ci_high;
  }

  EstimateReport ml() {
    EstimateReport rep = base_report("ml");
    rep.sigma = opts.sigma;
    const BalanceWeights& bw = get_weights();
    rep.jitter_added = bw.jitter_added;
    const std::vector<int> obs = data.obs_index();
    double acc = 0.0;
    for (size_t k = 0; k < obs.size(); ++k) acc += bw.gamma[static_cast<Eigen::Index>(k)] * data.y[obs[k]];
    finish(rep, bw.gamma, acc / static_cast<double>(data.n()));
    return rep;
  }

  EstimateReport mlt() {
    EstimateReport rep = base_report("mlt");
    rep.sigma = opts.sigma;
    const BalanceWeights& bw = get_weights();
    rep.jitter_added = bw.jitter_added;
    const std::vector<int> obs = data.obs_index();
    double ybar = 0.0;
    for (int i : obs) ybar += data.y[i];
    ybar /= static_cast<double>(obs.size());
    double acc = 0.0;
    for (size_t k = 0; k < obs.size(); ++k) {
      acc += bw.gamma[static_cast<Eigen::Index>(k)] * (data.y[obs[k]] - ybar);
    }
    const double n = static_cast<double>(data.n());
    const double point = static_cast<double>(data.n_target()) / n * ybar + acc / n;
    finish(rep, bw.gamma, point);
    return rep;
  }

  EstimateReport ols_report() {
    EstimateReport rep = base_report("ols");
    const OlsFit& fit = get_ols();
    const std::vector<int> target = data.target_index();
    double acc = 0.0;
    for (int i : target) acc += fit.fitted_all[i];
    finish(rep, ols_weights(data, fit), acc / static_cast<double>(data.n()));
    return rep;
  }

  EstimateReport ipw() {
    EstimateReport rep = base_report("ipw");
    const PropensityFit& pf = get_propensity();
    rep.propensity_converged = pf.converged;
    const std::vector<int> obs = data.obs_index();
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(obs.size()));
    double acc = 0.0;
    for (size_t k = 0; k < obs.size(); ++k) {
      gamma[static_cast<Eigen::Index>(k)] = 1.0 / pf.fitted[obs[k]];
      acc += data.y[obs[k]] / pf.fitted[obs[k]];
    }
    finish(rep, gamma, acc / static_cast<double>(data.n()));
    return rep;
  }

  EstimateReport aipw() {
    EstimateReport rep = base_report("aipw");
    const PropensityFit& pf = get_propensity();
    rep.propensity_converged = pf.converged;
    const OlsFit& fit = get_ols();
    const std::vector<int> obs = data.obs_index();
    Eigen::VectorXd gamma(static_cast<Eigen::Index>(obs.size()));
    double acc = fit.fitted_all.sum();
    for (size_t k = 0; k < obs.size(); ++k) {
      gamma[static_cast<Eigen::Index>(k)] = 1.0 / pf.fitted[obs[k]];
      acc += (data.y[obs[k]] - fit.fitted_all[obs[k]]) / pf.fitted[obs[k]];
    }
    finish(rep, gamma, acc / static_cast<double>(data.n()));
    return rep;
  }
};

EstimateSession::EstimateSession(const Dataset& data, const EstimateOptions& opts)
    : impl_(std::make_unique<Impl>(data, opts)) {}
EstimateSession::~EstimateSession() = default;
EstimateSession::EstimateSession(EstimateSession&&) noexcept = default;
EstimateSession& EstimateSession::operator=(EstimateSession&&) noexcept = default;

EstimateReport EstimateSession::estimate(const std::string& name) {
  if (name == "ml") return impl_->ml();
  if (name == "mlt") return impl_->mlt();
  if (name == "ols") return impl_->ols_report();
  if (name == "ipw") return impl_->ipw();
  if (name == "aipw") return impl_->aipw();
  throw ConfigError("unknown estimator: " + name);
}

std::vector<EstimateReport> EstimateSession::estimate_all(const std::vector<std::string>& names) {
  std::vector<EstimateReport> out;
  out.reserve(names.size());
  for (const auto& name : names) out.push_back(estimate(name));
  return out;
}

const GramBlocks& EstimateSession::blocks() { return impl_->get_blocks(); }
const BalanceWeights& EstimateSession::weights() { return impl_->get_weights(); }
const PropensityFit& EstimateSession::propensity() { return impl_->get_propensity(); }
const OlsFit& EstimateSession::ols() { return impl_->get_ols(); }

EstimateReport estimate_ml(const Dataset& data, const EstimateOptions& opts) {
  return EstimateSession(data, opts).estimate("ml");
}
EstimateReport estimate_mlt(const Dataset& data, const EstimateOptions& opts) {
  return EstimateSession(data, opts).estimate("mlt");
}
EstimateReport estimate_ols(const Dataset& data, const EstimateOptions& opts) {
  return EstimateSession(data, opts).estimate("ols");
}
EstimateReport estimate_ipw(const Dataset& data, const EstimateOptions& opts) {
  return EstimateSession(data, opts).estimate("ipw");
}
EstimateReport estimate_aipw(const Dataset& data, const EstimateOptions& opts) {
  return EstimateSession(data, opts).estimate("aipw");
}

EstimateReport estimate_att(const Dataset& data, const EstimateOptions& opts) {
  Dataset att = data;
  for (Eigen::Index i = 0; i < att.n(); ++i) att.t[i] = (att.w[i] == 1) ? 1 : 0;
  for (Eigen::Index i = 0; i < att.n(); ++i) {
    if (att.w[i] == 1 && !att.y_observed[static_cast<size_t>(i)]) {
      throw SchemaError("estimate_att: outcomes must be recorded for the W=1 group");
    }
  }
  att.validate();

  EstimateSession session(att, opts);
  const BalanceWeights& bw = session.weights();
  const std::vector<int> obs = att.obs_index();
  const std::vector<int> treated = att.target_index();
  const double n = static_cast<double>(att.n());
  const double n_treated = static_cast<double>(treated.size());

  double psi_unscaled = 0.0;
  for (size_t k = 0; k < obs.size(); ++k) psi_unscaled += bw.gamma[static_cast<Eigen::Index>(k)] * att.y[obs[k]];
  psi_unscaled /= n;
  const double psi_scaled = psi_unscaled * n / n_treated;

  double ybar1 = 0.0;
  for (int i : treated) ybar1 += att.y[i];
  ybar1 /= n_treated;
  const double tau = ybar1 - psi_scaled;

  double v1 = 0.0;
  for (int i : treated) {
    const double d = att.y[i] - ybar1;
    v1 += d * d;
  }
  v1 /= n_treated;

  const OlsFit& fit = session.ols();
  double v2_fit = 0.0;
  for (int i : treated) {
    const double d = fit.fitted_all[i] - psi_unscaled;
    v2_fit += d * d;
  }
  v2_fit /= n_treated;
  double v2_resid = 0.0;
  for (size_t k = 0; k < obs.size(); ++k) {
    const double r = att.y[obs[k]] - fit.fitted_all[obs[k]];
    const double g = bw.gamma[static_cast<Eigen::Index>(k)];
    v2_resid += g * g * r * r;
  }
  v2_resid /= n_treated;

  EstimateReport rep;
  rep.estimator = "att";
  rep.level = opts.level;
  rep.scaled = false;
  rep.n = static_cast<int>(att.n());
  rep.n_obs = static_cast<int>(obs.size());
  rep.n_target = static_cast<int>(treated.size());
  rep.sigma = opts.sigma;
  rep.jitter_added = bw.jitter_added;
  rep.max_abs_weight = bw.gamma.size() > 0 ? bw.gamma.lpNorm<Eigen::Infinity>() : 0.0;
  rep.point = tau;
  rep.variance = v1 + v2_fit + v2_resid;
  const double hw = z_quantile(opts.level) * std::sqrt(rep.variance / n_treated);
  rep.ci_low = tau - hw;
  rep.ci_high = tau + hw;
  return rep;
}

const std::vector<std::string>& estimator_names() {
  static const std::vector<std::string> names = {"ml", "mlt", "ols", "ipw", "aipw"};
  return names;
}

}  // namespace kbal
