#include "kbal/simbench.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

#include "kbal/errors.hpp"
#include "kbal/normal.hpp"

namespace kbal {

int thread_budget(int jobs) {
  if (jobs < 1) jobs = 1;
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  int cap = hw;
  if (const char* env = std::getenv("KB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw ConfigError("KB_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    cap = static_cast<int>(v);
  }
  return std::min(cap, jobs);
}

namespace {

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kSqrt2 = 1.41421356237309504880;

UnitDraw draw_ks(const DgpSpec& dgp, RngStream& rng) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double z3 = rng.normal();
  const double z4 = rng.normal();
  const double p_obs = expit(-z1 + 0.5 * z2 - 0.25 * z3 - 0.1 * z4);
  const double u = rng.uniform();
  const double eps = rng.normal();

  UnitDraw unit;
  unit.x.resize(4);
  unit.x[0] = std::exp(z1 / 2.0);
  unit.x[1] = z2 / (1.0 + std::exp(z1) + 10.0);
  unit.x[2] = std::pow(z1 * z3 / 25.0 + 0.06, 3.0);
  unit.x[3] = (z2 + z4 + 20.0) * (z2 + z4 + 20.0);
  unit.w = (u < p_obs) ? 0 : 1;
  unit.mean = 210.0 + 27.4 * z1 + 13.7 * (z2 + z3 + z4);
  unit.y = unit.mean + dgp.sigma_eps * eps;
  unit.p_obs = p_obs;
  return unit;
}

UnitDraw draw_hainmueller(const DgpSpec& dgp, RngStream& rng) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  const double z3 = rng.normal();
  // Cholesky factor of [[2,1,-1],[1,1,-0.5],[-1,-0.5,1]].
  const double x1 = kSqrt2 * z1;
  const double x2 = (z1 + z2) * kSqrtHalf;
  const double x3 = (z3 - z1) * kSqrtHalf;
  const double x4 = rng.uniform_range(-3.0, 3.0);
  const double x5 = rng.chisq1();
  const double x6 = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const double idx = x1 + 2.0 * x2 - 2.0 * x3 - x4 - 0.5 * x5 + x6;
  const double p_obs = normal_cdf(idx / dgp.eta);
  const double u = rng.uniform();
  const double eps = rng.normal();

  UnitDraw unit;
  unit.x.resize(6);
  unit.x << x1, x2, x3, x4, x5, x6;
  unit.w = (u < p_obs) ? 0 : 1;
  switch (dgp.design) {
    case 1:
      unit.mean = x1 + x2 + x3 - x4 + x5 + x6;
      break;
    case 2:
      unit.mean = x1 + x2 + 0.2 * x3 * x4 - std::sqrt(x5);
      break;
    case 3: {
      const double s = x1 + x2 + x5;
      unit.mean = s * s;
      break;
    }
    default:
      throw ConfigError("hainmueller design must be 1, 2, or 3");
  }
  unit.y = unit.mean + dgp.sigma_eps * eps;
  unit.p_obs = p_obs;
  return unit;
}

void check_dgp(const DgpSpec& dgp) {
  if (dgp.sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");
  if (dgp.family == Family::hainmueller) {
    if (dgp.design < 1 || dgp.design > 3) throw ConfigError("hainmueller design must be 1, 2, or 3");
    if (!(dgp.eta > 0.0)) throw ConfigError("eta must be positive");
  }
}

}  // namespace

UnitDraw draw_unit(const DgpSpec& dgp, RngStream& rng) {
  check_dgp(dgp);
  return dgp.family == Family::ks ? draw_ks(dgp, rng) : draw_hainmueller(dgp, rng);
}

Dataset gen_dataset(const DgpSpec& dgp, int n, RngStream& rng) {
  check_dgp(dgp);
  if (n < 2) throw ConfigError("n must be at least 2");
  const int d = dgp.family == Family::ks ? 4 : 6;
  Dataset data;
  data.x.resize(n, d);
  data.w.resize(n);
  data.y.resize(n);
  data.t = Eigen::VectorXi::Ones(n);
  data.y_observed.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    UnitDraw unit = draw_unit(dgp, rng);
    data.x.row(i) = unit.x.transpose();
    data.w[i] = unit.w;
    if (unit.w == 0) {
      data.y[i] = unit.y;
      data.y_observed[static_cast<size_t>(i)] = 1;
    } else {
      data.y[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return data;
}

TruthReport dgp_truth(const DgpSpec& dgp) {
  check_dgp(dgp);
  TruthReport truth;
  if (dgp.family == Family::ks) {
    truth.value = 210.0;
    return truth;
  }
  switch (dgp.design) {
    case 1:
      // E X5 + E X6; every Gaussian and uniform term is mean zero.
      truth.value = 1.5;
      break;
    case 2:
      // -E sqrt(chi^2_1) = -E|N(0,1)| = -sqrt(2/pi).
      truth.value = -std::sqrt(2.0 / M_PI);
      break;
    case 3:
      // Var(X1+X2) + Var(X5) + (E X5)^2 = 5 + 2 + 1.
      truth.value = 8.0;
      break;
  }
  return truth;
}

TruthReport dgp_truth_mc(const DgpSpec& dgp, std::int64_t mc_n, std::uint64_t seed) {
  check_dgp(dgp);
  if (mc_n < 2) throw ConfigError("mc_n must be at least 2");
  RngStream rng(seed);
  double sum = 0.0, sumsq = 0.0;
  for (std::int64_t i = 0; i < mc_n; ++i) {
    UnitDraw unit = draw_unit(dgp, rng);
    sum += unit.mean;
    sumsq += unit.mean * unit.mean;
  }
  const double m = sum / static_cast<double>(mc_n);
  const double var = std::max(0.0, sumsq / static_cast<double>(mc_n) - m * m);
  TruthReport truth;
  truth.value = m;
  truth.mc_se = std::sqrt(var / static_cast<double>(mc_n));
  truth.analytic = false;
  return truth;
}

namespace {

struct RepResult {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  unsigned char ok = 0;
};

}  // namespace

CellSummary run_cell(const CellSpec& cell) {
  check_dgp(cell.dgp);
  if (cell.reps < 1) throw ConfigError("reps must be at least 1");
  if (cell.estimators.empty()) throw ConfigError("no estimators requested");
  for (const auto& name : cell.estimators) {
    bool known = false;
    for (const auto& k : estimator_names()) known = known || k == name;
    if (!known) throw ConfigError("unknown estimator: " + name);
  }

  const int n_est = static_cast<int>(cell.estimators.size());
  std::vector<std::vector<RepResult>> slots(static_cast<size_t>(n_est),
                                            std::vector<RepResult>(static_cast<size_t>(cell.reps)));

  auto work = [&](int r_begin, int r_end) {
    for (int r = r_begin; r < r_end; ++r) {
      RngStream rng = replication_stream(cell.base_seed, static_cast<std::uint64_t>(r));
      Dataset data = gen_dataset(cell.dgp, cell.n, rng);
      EstimateSession session(data, cell.opts);
      for (int e = 0; e < n_est; ++e) {
        RepResult& slot = slots[static_cast<size_t>(e)][static_cast<size_t>(r)];
        try {
          EstimateReport rep = session.estimate(cell.estimators[static_cast<size_t>(e)]);
          slot.point = rep.point;
          slot.lo = rep.ci_low;
          slot.hi = rep.ci_high;
          slot.ok = 1;
        } catch (const std::exception&) {
          slot.ok = 0;
        }
      }
    }
  };

  const int workers = thread_budget(cell.reps);
  if (workers <= 1) {
    work(0, cell.reps);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int k = 0; k < workers; ++k) {
      const int lo = static_cast<int>(static_cast<long long>(cell.reps) * k / workers);
      const int hi = static_cast<int>(static_cast<long long>(cell.reps) * (k + 1) / workers);
      pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  CellSummary summary;
  summary.spec = cell;
  summary.truth = dgp_truth(cell.dgp);
  const double truth = summary.truth.value;

  for (int e = 0; e < n_est; ++e) {
    EstimatorSummary row;
    row.estimator = cell.estimators[static_cast<size_t>(e)];
    std::vector<double> points;
    points.reserve(static_cast<size_t>(cell.reps));
    double covered = 0.0, hw_sum = 0.0, sq_err = 0.0;
    for (int r = 0; r < cell.reps; ++r) {
      const RepResult& slot = slots[static_cast<size_t>(e)][static_cast<size_t>(r)];
      if (!slot.ok) {
        ++row.n_failed;
        continue;
      }
      points.push_back(slot.point);
      sq_err += (slot.point - truth) * (slot.point - truth);
      if (slot.lo <= truth && truth <= slot.hi) covered += 1.0;
      hw_sum += (slot.hi - slot.lo) / 2.0;
    }
    const double r_ok = static_cast<double>(points.size());
    if (r_ok > 0.0) {
      double mean = 0.0;
      for (double p : points) mean += p;
      mean /= r_ok;
      double var = 0.0;
      for (double p : points) var += (p - mean) * (p - mean);
      var /= r_ok;
      row.mean_point = mean;
      row.bias = mean - truth;
      row.rmse = std::sqrt(sq_err / r_ok);
      row.sd = std::sqrt(var);
      row.coverage = covered / r_ok;
      row.avg_halfwidth = hw_sum / r_ok;
    }
    summary.rows.push_back(std::move(row));
  }
  return summary;
}

std::string family_name(Family family) { return family == Family::ks ? "ks" : "hainmueller"; }

Family parse_family(const std::string& name) {
  if (name == "ks") return Family::ks;
  if (name == "hainmueller") return Family::hainmueller;
  throw ConfigError("unknown family: " + name + " (expected ks or hainmueller)");
}

}  // namespace kbal
