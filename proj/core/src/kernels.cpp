#include "kbal/kernels.hpp"

#include <cmath>
#include <string>

#include "kbal/errors.hpp"

namespace kbal {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.2360679774997896;

double profile(const KernelSpec& spec, double r) {
  switch (spec.family) {
    case KernelFamily::matern:
      return matern_kernel(r, spec.nu);
    case KernelFamily::gaussian:
      return std::exp(-0.5 * r * r);
    case KernelFamily::linear:
      throw ConfigError("linear kernel has no stationary profile");
  }
  throw ConfigError("unknown kernel family");
}

void check_lengthscale(const KernelSpec& spec) {
  if (!(spec.lengthscale > 0.0)) throw ConfigError("lengthscale must be positive");
}

// Fills a block of kernel values between row sets a and b of xs. Distances
// use explicit difference norms so identical points give exactly r = 0.
Eigen::MatrixXd cross_block(const Eigen::MatrixXd& xs, const std::vector<int>& a, const std::vector<int>& b,
                            const KernelSpec& spec) {
  Eigen::MatrixXd out(a.size(), b.size());
  const double inv_ell = 1.0 / spec.lengthscale;
  if (spec.family == KernelFamily::linear) {
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        out(i, j) = xs.row(a[i]).dot(xs.row(b[j])) * inv_ell * inv_ell;
    return out;
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out(i, j) = profile(spec, (xs.row(a[i]) - xs.row(b[j])).norm() * inv_ell);
  return out;
}

// Symmetric variant: computes the upper triangle and mirrors it.
Eigen::MatrixXd self_block(const Eigen::MatrixXd& xs, const std::vector<int>& a, const KernelSpec& spec) {
  Eigen::MatrixXd out(a.size(), a.size());
  const double inv_ell = 1.0 / spec.lengthscale;
  const bool lin = spec.family == KernelFamily::linear;
  const double diag_one = lin ? 0.0 : profile(spec, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    out(i, i) = lin ? xs.row(a[i]).squaredNorm() * inv_ell * inv_ell : diag_one;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double v = lin ? xs.row(a[i]).dot(xs.row(a[j])) * inv_ell * inv_ell
                           : profile(spec, (xs.row(a[i]) - xs.row(a[j])).norm() * inv_ell);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

}  // namespace

double matern_kernel(double r, double nu) {
  if (r < 0.0) throw DomainError("matern_kernel: negative distance");
  if (nu == 0.5) return std::exp(-r);
  if (nu == 1.5) {
    const double s = kSqrt3 * r;
    return (1.0 + s) * std::exp(-s);
  }
  if (nu == 2.5) {
    const double s = kSqrt5 * r;
    return (1.0 + s + s * s / 3.0) * std::exp(-s);
  }
  throw ConfigError("matern nu=" + std::to_string(nu) + " unsupported; use 0.5, 1.5 or 2.5");
}

double kernel_value(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  check_lengthscale(spec);
  const double inv_ell = 1.0 / spec.lengthscale;
  if (spec.family == KernelFamily::linear) return x.dot(y) * inv_ell * inv_ell;
  return profile(spec, (x - y).norm() * inv_ell);
}

GramBlocks gram_blocks(const Dataset& data, const KernelSpec& spec) {
  check_lengthscale(spec);
  data.validate();
  const Eigen::MatrixXd xs = spec.standardize ? standardize_columns(data.x) : data.x;
  const auto zi = data.obs_index();
  const auto ti = data.target_index();
  GramBlocks blocks;
  blocks.zz = self_block(xs, zi, spec);
  blocks.zt = cross_block(xs, zi, ti, spec);
  blocks.tt = self_block(xs, ti, spec);
  return blocks;
}

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const KernelSpec& spec) {
  check_lengthscale(spec);
  const Eigen::MatrixXd xs = spec.standardize ? standardize_columns(x) : x;
  std::vector<int> all(xs.rows());
  for (int i = 0; i < static_cast<int>(xs.rows()); ++i) all[i] = i;
  return self_block(xs, all, spec);
}

}  // namespace kbal
