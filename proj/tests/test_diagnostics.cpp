#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "kbal/dataset.hpp"
#include "kbal/diagnostics.hpp"
#include "kbal/errors.hpp"
#include "kbal/kernels.hpp"
#include "kbal/rng.hpp"
#include "kbal/solver.hpp"

using kbal::Dataset;
using kbal::GramBlocks;
using kbal::GramSide;
using kbal::KernelSpec;
using kbal::SpectrumReport;

namespace {

Dataset sample_data(int n, int d, std::uint64_t seed) {
  kbal::RngStream rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.w.resize(n);
  data.y.resize(n);
  data.t = Eigen::VectorXi::Ones(n);
  data.y_observed.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) data.x(i, j) = rng.normal();
    data.w[i] = rng.bernoulli(0.5) ? 0 : 1;
  }
  data.w[0] = 0;
  data.w[1] = 1;
  for (int i = 0; i < n; ++i) {
    if (data.w[i] == 0) {
      data.y[i] = data.x(i, 0) + 0.5 * rng.normal();
      data.y_observed[i] = 1;
    } else {
      data.y[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return data;
}

// Gram over explicit 1-d points, wrapped as blocks for spectrum().
GramBlocks grid_blocks(const Eigen::VectorXd& points, const KernelSpec& spec) {
  Eigen::MatrixXd x = points;
  GramBlocks blocks;
  blocks.zz = kbal::gram_matrix(x, spec);
  blocks.zt = Eigen::MatrixXd::Ones(points.size(), 1);
  blocks.tt = Eigen::MatrixXd::Ones(1, 1);
  return blocks;
}

}  // namespace

TEST_CASE("eigenvalue total equals the scaled trace") {
  KernelSpec spec;
  Dataset data = sample_data(60, 3, 7);
  GramBlocks blocks = kbal::gram_blocks(data, spec);
  for (GramSide side : {GramSide::treated, GramSide::target}) {
    SpectrumReport rep = kbal::spectrum(blocks, side);
    const Eigen::MatrixXd& k = side == GramSide::treated ? blocks.zz : blocks.tt;
    CHECK(rep.eigenvalues.sum() ==
          doctest::Approx(k.trace() / static_cast<double>(k.rows())).epsilon(1e-8));
    // standardized matern diagonal is exactly 1
    CHECK(rep.eigenvalues.sum() == doctest::Approx(1.0).epsilon(1e-8));
    for (Eigen::Index j = 1; j < rep.eigenvalues.size(); ++j) {
      CHECK(rep.eigenvalues[j] <= rep.eigenvalues[j - 1] + 1e-14);
    }
  }
}

TEST_CASE("linear kernels expose at most d eigen-directions") {
  KernelSpec spec;
  spec.family = kbal::KernelFamily::linear;
  Dataset data = sample_data(50, 3, 15);
  GramBlocks blocks = kbal::gram_blocks(data, spec);
  SpectrumReport rep = kbal::spectrum(blocks, GramSide::treated);
  const double top = rep.eigenvalues[0];
  int above = 0;
  for (Eigen::Index j = 0; j < rep.eigenvalues.size(); ++j) {
    if (rep.eigenvalues[j] > 1e-10 * top) ++above;
  }
  CHECK(above <= 3);
}

TEST_CASE("duplicating every point preserves the nonzero spectrum") {
  KernelSpec spec;
  spec.standardize = false;
  kbal::RngStream rng(31);
  const int m = 20;
  Eigen::VectorXd pts(m);
  for (int i = 0; i < m; ++i) pts[i] = rng.normal();
  Eigen::VectorXd dup(2 * m);
  dup << pts, pts;

  SpectrumReport base = kbal::spectrum(grid_blocks(pts, spec), GramSide::treated);
  SpectrumReport doubled = kbal::spectrum(grid_blocks(dup, spec), GramSide::treated);

  // [[K,K],[K,K]]/(2m) has eigenvalues lambda_i(K/m) plus m zeros.
  const double top = base.eigenvalues[0];
  for (int j = 0; j < m; ++j) {
    CHECK(doubled.eigenvalues[j] == doctest::Approx(base.eigenvalues[j]).epsilon(1e-9).scale(top));
  }
  for (int j = m; j < 2 * m; ++j) {
    CHECK(std::abs(doubled.eigenvalues[j]) <= 1e-10 * top);
  }
}

TEST_CASE("grid spectrum matches the integral operator's closed form") {
  // exp(-|s-t|) on [0,1]: eigenvalues 2/(1+w^2) with (w^2-1)sin w = 2w cos w.
  const int m = 500;
  Eigen::VectorXd pts(m);
  for (int i = 0; i < m; ++i) pts[i] = (i + 0.5) / m;
  KernelSpec spec;
  spec.nu = 0.5;
  spec.standardize = false;
  SpectrumReport rep = kbal::spectrum(grid_blocks(pts, spec), GramSide::treated);

  const double want[5] = {0.7388108094164552, 0.13800377535426286, 0.045088487289781126,
                          0.021328931287301206, 0.012278913854516984};
  for (int j = 0; j < 5; ++j) {
    CHECK(rep.eigenvalues[j] == doctest::Approx(want[j]).epsilon(1e-3));
  }
}

TEST_CASE("smooth kernels fit their expected power decay") {
  const int m = 500;
  Eigen::VectorXd pts(m);
  for (int i = 0; i < m; ++i) pts[i] = (i + 0.5) / m;
  KernelSpec spec;  // matern 3/2: decay exponent 2 nu + 1 = 4 in one dimension
  spec.standardize = false;
  SpectrumReport rep = kbal::spectrum(grid_blocks(pts, spec), GramSide::treated);
  CHECK(std::isfinite(rep.fitted_alpha));
  CHECK(rep.fitted_alpha > 3.0);
  CHECK(rep.fitted_alpha < 5.0);
  CHECK(rep.fit_lo == 3);
  CHECK(rep.fit_hi >= 5);
}

TEST_CASE("tiny blocks skip the decay fit") {
  KernelSpec spec;
  spec.standardize = false;
  Eigen::VectorXd pts(4);
  pts << 0.1, 0.4, 0.6, 0.9;
  SpectrumReport rep = kbal::spectrum(grid_blocks(pts, spec), GramSide::treated);
  CHECK(std::isnan(rep.fitted_alpha));
  CHECK(rep.fit_lo == 0);
  CHECK(rep.fit_hi == 0);
  CHECK(rep.eigenvalues.size() == 4);
}

TEST_CASE("weight-sequence mse") {
  Eigen::VectorXd a(2), b(2);
  a << 1.0, 2.0;
  b << 0.0, 0.0;
  CHECK(kbal::riesz_mse(a, a) == 0.0);
  CHECK(kbal::riesz_mse(a, b) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK_THROWS_AS(kbal::riesz_mse(a, Eigen::VectorXd::Zero(3)), kbal::SchemaError);
  CHECK_THROWS_AS(kbal::riesz_mse(Eigen::VectorXd(), Eigen::VectorXd()), kbal::DomainError);
}

TEST_CASE("weights recover a constant representer under random selection") {
  // W and T independent of X, each group hit with probability 1/2, makes the
  // representer the constant P{T=1} / P{W=0} = 1.
  kbal::RngStream rng(12);
  const int n = 400;
  Dataset data;
  data.x.resize(n, 2);
  data.w.resize(n);
  data.y.resize(n);
  data.t.resize(n);
  data.y_observed.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    data.x(i, 0) = rng.uniform();
    data.x(i, 1) = rng.uniform();
    data.w[i] = rng.bernoulli(0.5) ? 0 : 1;
    data.t[i] = rng.bernoulli(0.5) ? 1 : 0;
    if (data.w[i] == 0) {
      data.y[i] = 1.0;
      data.y_observed[i] = 1;
    } else {
      data.y[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  KernelSpec spec;
  spec.standardize = false;
  const double mse =
      kbal::riesz_recovery(data, spec, 0.1, [](const Eigen::RowVectorXd&) { return 1.0; });
  CHECK(mse < 0.4);
}

TEST_CASE("imbalance table leads with the minimax row and its optimal objective") {
  KernelSpec spec;
  const double sigma = 0.2;
  Dataset data = sample_data(50, 2, 44);
  const int n_obs = data.n_obs();

  kbal::RngStream rng(3);
  std::vector<std::pair<std::string, Eigen::VectorXd>> sets;
  sets.emplace_back("zeros", Eigen::VectorXd::Zero(n_obs));
  sets.emplace_back("ones", Eigen::VectorXd::Ones(n_obs));
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd g(n_obs);
    for (int i = 0; i < n_obs; ++i) g[i] = 2.0 * rng.normal();
    sets.emplace_back("rand" + std::to_string(k), std::move(g));
  }
  sets.emplace_back("short", Eigen::VectorXd::Zero(3));

  std::vector<kbal::ImbalanceRow> rows = kbal::compare_imbalance(data, spec, sigma, sets);
  REQUIRE(rows.size() == sets.size() + 1);
  CHECK(rows[0].name == "minimax");
  CHECK(rows[0].valid);
  for (size_t r = 1; r < rows.size(); ++r) {
    CHECK(rows[r].name == sets[r - 1].first);
    if (rows[r].valid) {
      CHECK(rows[0].objective <= rows[r].objective + 1e-10);
    }
  }

  // zeros row: the pure target term, no weight mass.
  GramBlocks blocks = kbal::gram_blocks(data, spec);
  const double want_zero = std::sqrt(blocks.tt.sum()) / data.n();
  CHECK(rows[1].imbalance == doctest::Approx(want_zero).epsilon(1e-12));
  CHECK(rows[1].l2_norm == 0.0);
  CHECK(rows[1].objective == doctest::Approx(want_zero * want_zero).epsilon(1e-12));

  // mismatched length is reported, not fatal
  const kbal::ImbalanceRow& bad = rows.back();
  CHECK_FALSE(bad.valid);
  CHECK(bad.note.find(std::to_string(n_obs)) != std::string::npos);
  CHECK(bad.note.find("3") != std::string::npos);
}

TEST_CASE("unit weights balance a group against itself") {
  Dataset data = sample_data(40, 2, 9);
  for (int i = 0; i < data.n(); ++i) data.t[i] = data.w[i] == 0 ? 1 : 0;
  KernelSpec spec;
  std::vector<std::pair<std::string, Eigen::VectorXd>> sets;
  sets.emplace_back("ones", Eigen::VectorXd::Ones(data.n_obs()));
  std::vector<kbal::ImbalanceRow> rows = kbal::compare_imbalance(data, spec, 0.1, sets);
  CHECK(rows[1].imbalance == 0.0);
}
