#include "kbal/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "kbal/errors.hpp"
#include "kbal/solver.hpp"

namespace kbal {

SpectrumReport spectrum(const GramBlocks& blocks, GramSide side) {
  const Eigen::MatrixXd& k = side == GramSide::treated ? blocks.zz : blocks.tt;
  const Eigen::Index m = k.rows();
  if (m == 0) throw DomainError("spectrum: empty block");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k / static_cast<double>(m));
  if (eig.info() != Eigen::Success) throw NumericalError("spectrum: eigendecomposition failed");

  SpectrumReport rep;
  rep.eigenvalues = eig.eigenvalues().reverse();
  rep.fitted_alpha = std::numeric_limits<double>::quiet_NaN();

  const double top = rep.eigenvalues[0];
  if (m < 5 || !(top > 0.0)) return rep;

  auto fit_range = [&](double floor_mult) {
    int hi = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (rep.eigenvalues[j] > floor_mult * top) hi = static_cast<int>(j) + 1;
    }
    return hi;
  };
  int hi = fit_range(1e-10);
  if (hi - 3 + 1 < 2) hi = fit_range(1e-12);
  if (hi - 3 + 1 < 2) return rep;

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double cnt = static_cast<double>(hi - 3 + 1);
  for (int j = 3; j <= hi; ++j) {
    const double lx = std::log(static_cast<double>(j));
    const double ly = std::log(rep.eigenvalues[j - 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = cnt * sxx - sx * sx;
  if (!(denom > 0.0)) return rep;
  const double slope = (cnt * sxy - sx * sy) / denom;
  rep.fitted_alpha = -slope;
  rep.fit_lo = 3;
  rep.fit_hi = hi;
  return rep;
}

double riesz_mse(const Eigen::VectorXd& gamma, const Eigen::VectorXd& g_values) {
  if (gamma.size() != g_values.size()) throw SchemaError("riesz_mse: length mismatch");
  if (gamma.size() == 0) throw DomainError("riesz_mse: empty sequences");
  return (gamma - g_values).squaredNorm() / static_cast<double>(gamma.size());
}

double riesz_recovery(const Dataset& data, const KernelSpec& spec, double sigma,
                      const std::function<double(const Eigen::RowVectorXd&)>& g_true) {
  data.validate();
  GramBlocks blocks = gram_blocks(data, spec);
  BalanceWeights bw = solve_weights(blocks, data.n(), sigma * sigma);
  const std::vector<int> obs = data.obs_index();
  Eigen::VectorXd g(static_cast<Eigen::Index>(obs.size()));
  for (size_t k = 0; k < obs.size(); ++k) {
    g[static_cast<Eigen::Index>(k)] = g_true(data.x.row(obs[k]));
  }
  return riesz_mse(bw.gamma, g);
}

std::vector<ImbalanceRow> compare_imbalance(
    const Dataset& data, const KernelSpec& spec, double sigma,
    const std::vector<std::pair<std::string, Eigen::VectorXd>>& weight_sets) {
  data.validate();
  GramBlocks blocks = gram_blocks(data, spec);
  BalanceWeights bw = solve_weights(blocks, data.n(), sigma * sigma);
  const double n = static_cast<double>(data.n());
  const double penalty = sigma * sigma / (n * n);

  std::vector<ImbalanceRow> rows;
  ImbalanceRow mini;
  mini.name = "minimax";
  mini.imbalance = bw.imbalance;
  mini.l2_norm = bw.gamma.norm();
  mini.objective = bw.objective;
  rows.push_back(std::move(mini));

  for (const auto& [name, gamma] : weight_sets) {
    ImbalanceRow row;
    row.name = name;
    if (gamma.size() != blocks.zz.rows()) {
      row.valid = false;
      row.note = "expected " + std::to_string(blocks.zz.rows()) + " weights, got " +
                 std::to_string(gamma.size());
      rows.push_back(std::move(row));
      continue;
    }
    row.imbalance = balance_norm(blocks, gamma, data.n());
    row.l2_norm = gamma.norm();
    row.objective = row.imbalance * row.imbalance + penalty * gamma.squaredNorm();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace kbal
