#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kbal/dataset.hpp"
#include "kbal/estimators.hpp"
#include "kbal/rng.hpp"

namespace kbal {

// Caps worker threads at the KB_THREADS environment value when set (a
// positive integer; anything else raises ConfigError), else at the hardware
// concurrency. `jobs` bounds the useful parallelism.
int thread_budget(int jobs);

enum class Family { ks, hainmueller };

struct DgpSpec {
  Family family = Family::ks;
  int design = 3;                 // hainmueller outcome designs 1..3
  double eta = 5.477225575051661; // hainmueller selection scale (sqrt 30)
  double sigma_eps = 1.0;         // outcome noise standard deviation
};

// One generated unit. y carries the noisy outcome for every unit; mean is the
// noiseless regression value (used for truth calculations); p_obs is
// P{W = 0 | X}, the oracle inverse of the Riesz representer.
struct UnitDraw {
  Eigen::VectorXd x;
  int w = 0;
  double y = 0.0;
  double mean = 0.0;
  double p_obs = 0.0;
};

// Draws consume the stream in a fixed documented order per unit.
// ks: Z1, Z2, Z3, Z4 (normals), selection uniform, outcome normal.
// hainmueller: 3 correlated normals, X4 uniform, X5 chi-square, X6 bernoulli
// uniform, selection uniform, outcome normal.
UnitDraw draw_unit(const DgpSpec& dgp, RngStream& rng);

// n units drawn in index order; T = 1 for every unit; outcomes kept only
// where W = 0, missing entries stored as NaN.
Dataset gen_dataset(const DgpSpec& dgp, int n, RngStream& rng);

struct TruthReport {
  double value = 0.0;
  double mc_se = 0.0;   // 0 for closed forms
  bool analytic = true;
};

// Population mean of the outcome regression. Closed form for every built-in
// design (ks: 210; hainmueller designs 1..3: 1.5, -sqrt(2/pi), 8).
TruthReport dgp_truth(const DgpSpec& dgp);

// Monte Carlo check of the same estimand: the average noiseless mean over
// mc_n fresh draws, with its standard error.
TruthReport dgp_truth_mc(const DgpSpec& dgp, std::int64_t mc_n, std::uint64_t seed);

struct CellSpec {
  DgpSpec dgp;
  int n = 1000;
  int reps = 1000;
  std::uint64_t base_seed = 0;
  EstimateOptions opts;
  std::vector<std::string> estimators;
};

struct EstimatorSummary {
  std::string estimator;
  double mean_point = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double sd = 0.0;
  double coverage = 0.0;
  double avg_halfwidth = 0.0;
  int n_failed = 0;
};

struct CellSummary {
  CellSpec spec;
  TruthReport truth;
  std::vector<EstimatorSummary> rows;
};

// Replication r uses the stream derived from (base_seed, r); see
// replication_stream. Replications run on up to thread_budget(reps) workers;
// per-replication results land in slots indexed by r and are reduced in
// index order, so summaries are identical for any thread count. A
// replication where an estimator throws counts toward that estimator's
// n_failed and is excluded from its averages; a non-converged propensity fit
// is not a failure, its unstable estimate enters as is.
CellSummary run_cell(const CellSpec& cell);

std::string family_name(Family family);
Family parse_family(const std::string& name);

}  // namespace kbal
