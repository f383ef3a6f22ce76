#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "kbal/dataset.hpp"
#include "kbal/errors.hpp"

using kbal::Dataset;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Dataset small_data() {
  Dataset d;
  d.x.resize(4, 2);
  d.x << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0;
  d.w.resize(4);
  d.w << 0, 1, 0, 1;
  d.y.resize(4);
  d.y << 1.5, kNaN, -0.5, kNaN;
  d.t.resize(4);
  d.t << 1, 1, 0, 1;
  d.y_observed = {1, 0, 1, 0};
  return d;
}

}  // namespace

TEST_CASE("valid data passes and indexes correctly") {
  Dataset d = small_data();
  CHECK_NOTHROW(d.validate());
  CHECK(d.n() == 4);
  CHECK(d.dim() == 2);
  CHECK(d.n_obs() == 2);
  CHECK(d.n_target() == 3);
  CHECK(d.obs_index() == std::vector<int>{0, 2});
  CHECK(d.target_index() == std::vector<int>{0, 1, 3});
  Eigen::VectorXd yo = d.y_obs();
  CHECK(yo.size() == 2);
  CHECK(yo[0] == 1.5);
  CHECK(yo[1] == -0.5);
}

TEST_CASE("size mismatches are schema errors") {
  Dataset d = small_data();
  d.w.resize(3);
  d.w << 0, 1, 0;
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);

  d = small_data();
  d.y_observed.pop_back();
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);
}

TEST_CASE("outcome bookkeeping is enforced") {
  // Observation unit without an outcome.
  Dataset d = small_data();
  d.y_observed[0] = 0;
  d.y[0] = kNaN;
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);

  // Non-finite recorded outcome.
  d = small_data();
  d.y[2] = kNaN;
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);

  // Missing slot must hold NaN, never a number.
  d = small_data();
  d.y[1] = 0.0;
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);

  // Non-finite covariate.
  d = small_data();
  d.x(1, 1) = kNaN;
  CHECK_THROWS_AS(d.validate(), kbal::SchemaError);
}

TEST_CASE("empty groups are domain errors") {
  Dataset d = small_data();
  d.w << 1, 1, 1, 1;
  d.y << kNaN, kNaN, kNaN, kNaN;
  d.y_observed = {0, 0, 0, 0};
  CHECK_THROWS_AS(d.validate(), kbal::DomainError);

  d = small_data();
  d.t << 0, 0, 0, 0;
  CHECK_THROWS_AS(d.validate(), kbal::DomainError);
}

TEST_CASE("standardize centers and scales with divisor n-1") {
  Eigen::MatrixXd x(3, 3);
  x << 1.0, 10.0, 5.0,
       2.0, 10.0, 7.0,
       3.0, 10.0, 12.0;
  Eigen::MatrixXd s = kbal::standardize_columns(x);

  // Column 0: mean 2, sd 1.
  CHECK(s(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(s(1, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s(2, 0) == doctest::Approx(1.0).epsilon(1e-15));

  // Constant column: centered only.
  CHECK(s(0, 1) == 0.0);
  CHECK(s(1, 1) == 0.0);
  CHECK(s(2, 1) == 0.0);

  // Column 2: mean 8, sd sqrt(13).
  const double sd = std::sqrt(13.0);
  CHECK(s(0, 2) == doctest::Approx(-3.0 / sd).epsilon(1e-15));
  CHECK(s(2, 2) == doctest::Approx(4.0 / sd).epsilon(1e-15));
}

TEST_CASE("standardized columns have zero mean and unit sd") {
  Eigen::MatrixXd x(40, 3);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = 0.1 * i * i - 3.0;
    x(i, 1) = std::sin(i * 0.7) * 100.0;
    x(i, 2) = i % 5;
  }
  Eigen::MatrixXd s = kbal::standardize_columns(x);
  for (int j = 0; j < 3; ++j) {
    const double mean = s.col(j).mean();
    const double var = (s.col(j).array() - mean).square().sum() / 39.0;
    CHECK(std::abs(mean) < 1e-13);
    CHECK(std::abs(var - 1.0) < 1e-12);
  }
  // Standardizing a standardized matrix changes nothing.
  Eigen::MatrixXd s2 = kbal::standardize_columns(s);
  CHECK((s2 - s).cwiseAbs().maxCoeff() < 1e-12);
}
