#pragma once

#include <Eigen/Dense>

#include "kbal/dataset.hpp"

namespace kbal {

enum class KernelFamily { matern, gaussian, linear };

// Kernel configuration. Matern smoothness nu is restricted to the
// half-integers 1/2, 3/2, 5/2, which admit closed forms:
//   nu = 1/2:  exp(-r)
//   nu = 3/2:  (1 + sqrt(3) r) exp(-sqrt(3) r)
//   nu = 5/2:  (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r)
// with r the Euclidean distance divided by the lengthscale. The gaussian
// kernel is exp(-r^2 / 2); the linear kernel is the inner product of the
// lengthscale-divided inputs. When standardize is set, columns are centered
// and scaled on the full sample before any distance is computed.
struct KernelSpec {
  KernelFamily family = KernelFamily::matern;
  double nu = 1.5;
  double lengthscale = 1.0;
  bool standardize = true;
};

// Stationary profile k(r) at distance r >= 0 for the matern family.
// Throws ConfigError for unsupported nu.
double matern_kernel(double r, double nu);

// K(x, y) for one pair of (already preprocessed) points.
double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Gram blocks between the observation group Z (w == 0) and target group T
// (t == 1). Units appearing in both groups index both blocks.
struct GramBlocks {
  Eigen::MatrixXd zz;  // n_obs x n_obs
  Eigen::MatrixXd zt;  // n_obs x n_target
  Eigen::MatrixXd tt;  // n_target x n_target
};

GramBlocks gram_blocks(const Dataset& data, const KernelSpec& spec);

// Full n x n Gram over one point set (rows of x), for diagnostics.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec);

}  // namespace kbal
