#include "kbal/dataset.hpp"

#include <cmath>
#include <string>

#include "kbal/errors.hpp"

namespace kbal {

int Dataset::n_obs() const {
  int c = 0;
  for (int i = 0; i < w.size(); ++i) c += (w[i] == 0);
  return c;
}

int Dataset::n_target() const {
  int c = 0;
  for (int i = 0; i < t.size(); ++i) c += (t[i] == 1);
  return c;
}

std::vector<int> Dataset::obs_index() const {
  std::vector<int> idx;
  idx.reserve(w.size());
  for (int i = 0; i < w.size(); ++i)
    if (w[i] == 0) idx.push_back(i);
  return idx;
}

std::vector<int> Dataset::target_index() const {
  std::vector<int> idx;
  idx.reserve(t.size());
  for (int i = 0; i < t.size(); ++i)
    if (t[i] == 1) idx.push_back(i);
  return idx;
}

Eigen::VectorXd Dataset::y_obs() const {
  const auto idx = obs_index();
  Eigen::VectorXd out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = y[idx[k]];
  return out;
}

void Dataset::validate() const {
  const int nn = n();
  if (nn < 2) throw DomainError("need at least 2 units");
  if (w.size() != nn || y.size() != nn || t.size() != nn || static_cast<int>(y_observed.size()) != nn)
    throw SchemaError("dataset columns disagree on length");
  for (int i = 0; i < nn; ++i) {
    if (w[i] < 0) throw SchemaError("unit " + std::to_string(i) + " has a negative group label");
    if (t[i] != 0 && t[i] != 1)
      throw SchemaError("unit " + std::to_string(i) + " has a non-binary target flag");
    if (w[i] == 0 && !y_observed[i])
      throw SchemaError("unit " + std::to_string(i) + " is in the observation group but has no outcome");
    if (y_observed[i] && !std::isfinite(y[i]))
      throw SchemaError("unit " + std::to_string(i) + " has a non-finite outcome");
    if (!y_observed[i] && !std::isnan(y[i]))
      throw SchemaError("unit " + std::to_string(i) + " is marked missing but stores an outcome value");
  }
  if (!x.allFinite()) throw SchemaError("covariates contain non-finite values");
  if (n_obs() == 0) throw DomainError("no observation units (w == 0)");
  if (n_target() == 0) throw DomainError("no target units (t == 1)");
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& x) {
  const auto n = x.rows();
  Eigen::MatrixXd out = x;
  if (n < 2) return out;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    out.col(j).array() -= mean;
    const double sd = std::sqrt(out.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (sd > 0.0) out.col(j) /= sd;
  }
  return out;
}

}  // namespace kbal
