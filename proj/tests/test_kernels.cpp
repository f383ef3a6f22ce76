#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kbal/dataset.hpp"
#include "kbal/errors.hpp"
#include "kbal/kernels.hpp"
#include "kbal/rng.hpp"

using kbal::Dataset;
using kbal::GramBlocks;
using kbal::KernelFamily;
using kbal::KernelSpec;

namespace {

// Independent oracle: the general Matern form through the standard library's
// modified Bessel function, k(r) = 2^{1-nu}/Gamma(nu) (sqrt(2 nu) r)^nu
// K_nu(sqrt(2 nu) r). The closed forms under test never call this path.
double matern_bessel(double r, double nu) {
  const double s = std::sqrt(2.0 * nu) * r;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(s, nu) * std::cyl_bessel_k(nu, s);
}

Dataset sample_data(int n, int d, std::uint64_t seed) {
  kbal::RngStream rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.w.resize(n);
  data.y.resize(n);
  data.t.resize(n);
  data.y_observed.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal() * (j + 1.0);
    data.w[i] = rng.bernoulli(0.5) ? 0 : 1;
    data.t[i] = 1;
    if (data.w[i] == 0) {
      data.y[i] = rng.normal();
      data.y_observed[i] = 1;
    } else {
      data.y[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  data.w[0] = 0;
  data.y[0] = 0.3;
  data.y_observed[0] = 1;
  data.w[1] = 1;
  data.y[1] = std::numeric_limits<double>::quiet_NaN();
  data.y_observed[1] = 0;
  return data;
}

}  // namespace

TEST_CASE("matern closed forms match the Bessel-function oracle") {
  for (double nu : {0.5, 1.5, 2.5}) {
    for (double r = 1e-3; r < 12.0; r *= 1.7) {
      const double got = kbal::matern_kernel(r, nu);
      const double want = matern_bessel(r, nu);
      CHECK(std::abs(got - want) <= 1e-10 * (1.0 + std::abs(want)));
    }
    CHECK(kbal::matern_kernel(0.0, nu) == 1.0);
  }
}

TEST_CASE("matern values decay from one toward zero") {
  for (double nu : {0.5, 1.5, 2.5}) {
    double prev = 1.0;
    for (double r = 0.1; r < 20.0; r += 0.1) {
      const double k = kbal::matern_kernel(r, nu);
      CHECK(k < prev);
      CHECK(k > 0.0);
      prev = k;
    }
  }
}

TEST_CASE("matern rejects bad arguments") {
  CHECK_THROWS_AS(kbal::matern_kernel(-0.1, 1.5), kbal::DomainError);
  CHECK_THROWS_AS(kbal::matern_kernel(1.0, 2.0), kbal::ConfigError);
  KernelSpec bad;
  bad.lengthscale = 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(kbal::kernel_value(bad, v, v), kbal::ConfigError);
}

TEST_CASE("kernel_value handles the three families") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 3.0, -1.0;
  const double r = (a - b).norm();

  KernelSpec spec;
  spec.standardize = false;

  spec.family = KernelFamily::matern;
  spec.nu = 1.5;
  spec.lengthscale = 2.0;
  CHECK(kbal::kernel_value(spec, a, b) ==
        doctest::Approx(kbal::matern_kernel(r / 2.0, 1.5)).epsilon(1e-15));

  spec.family = KernelFamily::gaussian;
  CHECK(kbal::kernel_value(spec, a, b) ==
        doctest::Approx(std::exp(-0.5 * (r / 2.0) * (r / 2.0))).epsilon(1e-15));

  spec.family = KernelFamily::linear;
  CHECK(kbal::kernel_value(spec, a, b) == doctest::Approx(a.dot(b) / 4.0).epsilon(1e-15));
}

TEST_CASE("gram blocks match a brute-force double loop") {
  Dataset data = sample_data(40, 3, 11);
  KernelSpec spec;  // matern 1.5, lengthscale 1, standardized
  GramBlocks blocks = kbal::gram_blocks(data, spec);

  Eigen::MatrixXd xs = kbal::standardize_columns(data.x);
  const auto zi = data.obs_index();
  const auto ti = data.target_index();
  CHECK(blocks.zz.rows() == static_cast<Eigen::Index>(zi.size()));
  CHECK(blocks.zt.cols() == static_cast<Eigen::Index>(ti.size()));
  CHECK(blocks.tt.rows() == static_cast<Eigen::Index>(ti.size()));

  double max_err = 0.0;
  for (size_t i = 0; i < zi.size(); ++i) {
    for (size_t j = 0; j < zi.size(); ++j) {
      const double want = kbal::matern_kernel((xs.row(zi[i]) - xs.row(zi[j])).norm(), 1.5);
      max_err = std::max(max_err, std::abs(blocks.zz(i, j) - want));
    }
    for (size_t j = 0; j < ti.size(); ++j) {
      const double want = kbal::matern_kernel((xs.row(zi[i]) - xs.row(ti[j])).norm(), 1.5);
      max_err = std::max(max_err, std::abs(blocks.zt(i, j) - want));
    }
  }
  for (size_t i = 0; i < ti.size(); ++i) {
    for (size_t j = 0; j < ti.size(); ++j) {
      const double want = kbal::matern_kernel((xs.row(ti[i]) - xs.row(ti[j])).norm(), 1.5);
      max_err = std::max(max_err, std::abs(blocks.tt(i, j) - want));
    }
  }
  CHECK(max_err <= 1e-12);
}

TEST_CASE("stationary grams have unit diagonal, symmetry, and near-PSD spectra") {
  Dataset data = sample_data(60, 4, 5);
  for (KernelFamily fam : {KernelFamily::matern, KernelFamily::gaussian}) {
    KernelSpec spec;
    spec.family = fam;
    Eigen::MatrixXd k = kbal::gram_matrix(data.x, spec);
    CHECK((k.diagonal().array() - 1.0).abs().maxCoeff() == 0.0);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * k.trace());
  }
}

TEST_CASE("identical points give exactly unit kernel value") {
  Dataset data = sample_data(20, 3, 77);
  data.x.row(4) = data.x.row(9);
  KernelSpec spec;
  Eigen::MatrixXd k = kbal::gram_matrix(data.x, spec);
  CHECK(k(4, 9) == 1.0);
}

TEST_CASE("standardization makes grams scale-invariant") {
  Dataset data = sample_data(30, 3, 13);
  KernelSpec spec;  // standardize = true
  Eigen::MatrixXd k1 = kbal::gram_matrix(data.x, spec);
  Eigen::MatrixXd x2 = data.x;
  x2.col(0) *= 1000.0;
  x2.col(2) /= 500.0;
  Eigen::MatrixXd k2 = kbal::gram_matrix(x2, spec);
  CHECK((k1 - k2).cwiseAbs().maxCoeff() <= 1e-12);

  spec.standardize = false;
  Eigen::MatrixXd k3 = kbal::gram_matrix(data.x, spec);
  Eigen::MatrixXd k4 = kbal::gram_matrix(x2, spec);
  CHECK((k3 - k4).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("linear-kernel gram has rank at most d") {
  Dataset data = sample_data(50, 3, 21);
  KernelSpec spec;
  spec.family = KernelFamily::linear;
  Eigen::MatrixXd k = kbal::gram_matrix(data.x, spec);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  const double top = eig.eigenvalues().maxCoeff();
  int rank = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    if (eig.eigenvalues()[i] > 1e-10 * top) ++rank;
  }
  CHECK(rank <= 3);
}

TEST_CASE("lengthscale rescales distances") {
  Eigen::VectorXd a(1), b(1);
  a << 0.0;
  b << 2.0;
  KernelSpec s1, s2;
  s1.standardize = s2.standardize = false;
  s1.lengthscale = 1.0;
  s2.lengthscale = 2.0;
  CHECK(kbal::kernel_value(s2, a, b) ==
        doctest::Approx(kbal::matern_kernel(1.0, 1.5)).epsilon(1e-15));
  CHECK(kbal::kernel_value(s1, a, b) ==
        doctest::Approx(kbal::matern_kernel(2.0, 1.5)).epsilon(1e-15));
}
