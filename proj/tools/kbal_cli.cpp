#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kbal/csv.hpp"
#include "kbal/dataset.hpp"
#include "kbal/diagnostics.hpp"
#include "kbal/errors.hpp"
#include "kbal/estimators.hpp"
#include "kbal/rng.hpp"
#include "kbal/simbench.hpp"
#include "kbal/solver.hpp"

namespace {

using kbal::ConfigError;
using kbal::SchemaError;

struct DataFlags {
  std::string path;
  std::string w_col = "w";
  std::string y_col = "y";
  std::string t_col;
  std::string t_rule = "all";
};

struct KernelFlags {
  std::string family = "matern";
  double nu = 1.5;
  double lengthscale = 1.0;
  bool standardize = true;
};

void add_data_options(CLI::App* sub, DataFlags& flags) {
  sub->add_option("--data", flags.path, "input CSV file")->required();
  sub->add_option("--w-col", flags.w_col, "group column name");
  sub->add_option("--y-col", flags.y_col, "outcome column name");
  sub->add_option("--t-col", flags.t_col, "target column name (overrides --t-rule)");
  sub->add_option("--t-rule", flags.t_rule, "target rule when no column: all | w1")
      ->check(CLI::IsMember({"all", "w1"}));
}

void add_kernel_options(CLI::App* sub, KernelFlags& flags) {
  sub->add_option("--kernel", flags.family, "kernel family: matern | gaussian | linear")
      ->check(CLI::IsMember({"matern", "gaussian", "linear"}));
  sub->add_option("--nu", flags.nu, "matern smoothness: 0.5 | 1.5 | 2.5");
  sub->add_option("--lengthscale", flags.lengthscale, "kernel lengthscale");
  sub->add_flag("--standardize,!--no-standardize", flags.standardize,
                "center/scale covariates before distances");
}

kbal::Dataset load_data(const DataFlags& flags) {
  kbal::LoadSchema schema;
  schema.w_col = flags.w_col;
  schema.y_col = flags.y_col;
  if (!flags.t_col.empty()) {
    schema.t_col = flags.t_col;
  } else {
    schema.t_rule = flags.t_rule == "w1" ? kbal::TargetRule::w1 : kbal::TargetRule::all;
  }
  return kbal::load_csv(flags.path, schema);
}

kbal::KernelSpec to_kernel_spec(const KernelFlags& flags) {
  kbal::KernelSpec spec;
  if (flags.family == "matern") {
    spec.family = kbal::KernelFamily::matern;
  } else if (flags.family == "gaussian") {
    spec.family = kbal::KernelFamily::gaussian;
  } else if (flags.family == "linear") {
    spec.family = kbal::KernelFamily::linear;
  } else {
    throw ConfigError("--kernel must be matern, gaussian, or linear");
  }
  spec.nu = flags.nu;
  spec.lengthscale = flags.lengthscale;
  spec.standardize = flags.standardize;
  if (!(spec.lengthscale > 0.0)) throw ConfigError("--lengthscale must be positive");
  return spec;
}

void check_common(double sigma, double level) {
  if (!(sigma > 0.0)) throw ConfigError("--sigma must be positive");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("--level must be inside (0, 1)");
}

std::string fmt_table(double v) {
  char buf[64];
  if (!std::isfinite(v)) return "nan";
  std::snprintf(buf, sizeof(buf), std::abs(v) >= 3.0 ? "%.1f" : "%.2f", v);
  return buf;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const DataFlags& dflags, const KernelFlags& kflags, double sigma, double level,
                 bool scaled, const std::vector<std::string>& estimators, const std::string& out) {
  check_common(sigma, level);
  kbal::Dataset data = load_data(dflags);
  kbal::EstimateOptions opts;
  opts.kernel = to_kernel_spec(kflags);
  opts.sigma = sigma;
  opts.level = level;
  opts.scaled = scaled;

  kbal::EstimateSession session(data, opts);
  std::vector<kbal::EstimateReport> reports = session.estimate_all(estimators);

  std::printf("%-6s %14s %14s %14s %12s %12s %7s %5s\n", "est", "point", "ci_low", "ci_high",
              "variance", "max|w|", "jitter", "conv");
  for (const auto& rep : reports) {
    std::printf("%-6s %14.6g %14.6g %14.6g %12.6g %12.6g %7.1g %5s\n", rep.estimator.c_str(),
                rep.point, rep.ci_low, rep.ci_high, rep.variance, rep.max_abs_weight,
                rep.jitter_added, rep.propensity_converged ? "yes" : "no");
  }

  if (!out.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& rep : reports) rows.push_back(kbal::report_row(rep));
    kbal::write_csv(out, kbal::report_header(), rows);
  }
  return 0;
}

// ------------------------------------------------------------------ weights

int cmd_weights(const DataFlags& dflags, const KernelFlags& kflags, double sigma,
                const std::string& out) {
  if (!(sigma > 0.0)) throw ConfigError("--sigma must be positive");
  kbal::Dataset data = load_data(dflags);
  kbal::GramBlocks blocks = kbal::gram_blocks(data, to_kernel_spec(kflags));
  kbal::BalanceWeights bw = kbal::solve_weights(blocks, data.n(), sigma * sigma);

  std::printf("obs units: %d  imbalance: %.6g  objective: %.6g  jitter: %.1g\n",
              static_cast<int>(bw.gamma.size()), bw.imbalance, bw.objective, bw.jitter_added);

  const std::vector<int> obs = data.obs_index();
  std::vector<std::vector<std::string>> rows;
  for (size_t k = 0; k < obs.size(); ++k) {
    rows.push_back({std::to_string(obs[k]), kbal::format_double(bw.gamma[static_cast<Eigen::Index>(k)])});
  }
  if (!out.empty()) {
    kbal::write_csv(out, {"index", "gamma"}, rows);
  } else {
    std::printf("%8s %16s\n", "index", "gamma");
    for (const auto& row : rows) std::printf("%8s %16s\n", row[0].c_str(), row[1].c_str());
  }
  return 0;
}

// ----------------------------------------------------------------- diagnose

Eigen::VectorXd read_weight_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open weight file " + path);
  std::vector<double> values;
  std::string line;
  int gamma_col = -1;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (first) {
      first = false;
      for (size_t j = 0; j < fields.size(); ++j) {
        if (fields[j] == "gamma") gamma_col = static_cast<int>(j);
      }
      if (gamma_col >= 0) continue;  // header row consumed
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;  // non-numeric header, single column
      gamma_col = fields.size() > 1 ? 1 : 0;   // headerless; index,gamma or bare column
    }
    const int col = gamma_col >= 0 ? gamma_col : 0;
    if (col >= static_cast<int>(fields.size())) throw SchemaError(path + ": short row");
    char* end = nullptr;
    double v = std::strtod(fields[static_cast<size_t>(col)].c_str(), &end);
    if (end == fields[static_cast<size_t>(col)].c_str()) {
      throw SchemaError(path + ": non-numeric weight '" + fields[static_cast<size_t>(col)] + "'");
    }
    values.push_back(v);
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
  for (size_t i = 0; i < values.size(); ++i) out[static_cast<Eigen::Index>(i)] = values[i];
  return out;
}

int cmd_diagnose(const DataFlags& dflags, const KernelFlags& kflags, double sigma,
                 const std::vector<std::string>& weight_files, const std::string& out_prefix) {
  if (!(sigma > 0.0)) throw ConfigError("--sigma must be positive");
  kbal::Dataset data = load_data(dflags);
  kbal::KernelSpec spec = to_kernel_spec(kflags);
  kbal::GramBlocks blocks = kbal::gram_blocks(data, spec);

  kbal::SpectrumReport treated = kbal::spectrum(blocks, kbal::GramSide::treated);
  kbal::SpectrumReport target = kbal::spectrum(blocks, kbal::GramSide::target);

  auto print_spectrum = [](const char* name, const kbal::SpectrumReport& rep) {
    std::printf("%s block: %d eigenvalues, alpha = %.4g", name,
                static_cast<int>(rep.eigenvalues.size()), rep.fitted_alpha);
    if (rep.fit_lo > 0) std::printf(" (fit over j in [%d, %d])", rep.fit_lo, rep.fit_hi);
    std::printf("\n");
  };
  print_spectrum("treated", treated);
  print_spectrum("target", target);

  const int n_obs = static_cast<int>(blocks.zz.rows());
  std::vector<std::pair<std::string, Eigen::VectorXd>> sets;
  sets.emplace_back("zeros", Eigen::VectorXd::Zero(n_obs));
  sets.emplace_back("ones", Eigen::VectorXd::Ones(n_obs));
  for (const auto& item : weight_files) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--weights expects name=path, got " + item);
    sets.emplace_back(item.substr(0, eq), read_weight_file(item.substr(eq + 1)));
  }

  std::vector<kbal::ImbalanceRow> table = kbal::compare_imbalance(data, spec, sigma, sets);
  std::printf("%-12s %14s %14s %14s  %s\n", "weights", "imbalance", "l2_norm", "objective", "note");
  for (const auto& row : table) {
    if (row.valid) {
      std::printf("%-12s %14.6g %14.6g %14.6g\n", row.name.c_str(), row.imbalance, row.l2_norm,
                  row.objective);
    } else {
      std::printf("%-12s %14s %14s %14s  %s\n", row.name.c_str(), "-", "-", "-", row.note.c_str());
    }
  }

  if (!out_prefix.empty()) {
    std::vector<std::vector<std::string>> srows;
    auto spectrum_rows = [&](const char* name, const kbal::SpectrumReport& rep) {
      for (Eigen::Index j = 0; j < rep.eigenvalues.size(); ++j) {
        srows.push_back({name, std::to_string(j + 1), kbal::format_double(rep.eigenvalues[j]),
                         kbal::format_double(rep.fitted_alpha), std::to_string(rep.fit_lo),
                         std::to_string(rep.fit_hi)});
      }
    };
    spectrum_rows("treated", treated);
    spectrum_rows("target", target);
    kbal::write_csv(out_prefix + "_spectrum.csv",
                    {"side", "j", "eigenvalue", "alpha", "fit_lo", "fit_hi"}, srows);

    std::vector<std::vector<std::string>> irows;
    for (const auto& row : table) {
      irows.push_back({row.name, kbal::format_double(row.imbalance), kbal::format_double(row.l2_norm),
                       kbal::format_double(row.objective), row.valid ? "1" : "0", row.note});
    }
    kbal::write_csv(out_prefix + "_imbalance.csv",
                    {"name", "imbalance", "l2_norm", "objective", "valid", "note"}, irows);
  }
  return 0;
}

// ----------------------------------------------------------------- simulate

struct Campaign {
  kbal::Family family = kbal::Family::ks;
  std::vector<int> designs = {3};
  std::vector<double> etas = {std::sqrt(30.0)};
  std::vector<double> sigma_eps = {1.0};
  std::vector<int> n_values = {1000};
  int reps = 1000;
  std::uint64_t base_seed = 1;
  std::vector<std::string> estimators = kbal::estimator_names();
  KernelFlags kernel;
  double sigma = 0.1;
  double level = 0.95;
  bool scaled = true;
  std::string out = "summary.csv";
  std::string md_out = "summary.md";
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double parse_eta(const std::string& token) {
  if (token == "sqrt30") return std::sqrt(30.0);
  if (token == "sqrt100") return std::sqrt(100.0);
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') {
    throw ConfigError("eta must be numeric or sqrt30/sqrt100, got '" + token + "'");
  }
  return v;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + " must be boolean, got '" + v + "'");
}

Campaign parse_campaign(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open campaign file " + path);
  Campaign c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto strip = [](std::string s) {
      const auto sb = s.find_first_not_of(" \t\r");
      if (sb == std::string::npos) return std::string();
      const auto se = s.find_last_not_of(" \t\r");
      return s.substr(sb, se - sb + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key == "family") {
      c.family = kbal::parse_family(value);
    } else if (key == "designs" || key == "design") {
      c.designs.clear();
      for (const auto& tok : split_list(value)) c.designs.push_back(std::stoi(tok));
    } else if (key == "eta") {
      c.etas.clear();
      for (const auto& tok : split_list(value)) c.etas.push_back(parse_eta(tok));
    } else if (key == "sigma_eps") {
      c.sigma_eps.clear();
      for (const auto& tok : split_list(value)) c.sigma_eps.push_back(std::stod(tok));
    } else if (key == "n") {
      c.n_values.clear();
      for (const auto& tok : split_list(value)) c.n_values.push_back(std::stoi(tok));
    } else if (key == "reps") {
      c.reps = std::stoi(value);
    } else if (key == "base_seed" || key == "seed") {
      c.base_seed = std::stoull(value);
    } else if (key == "estimators") {
      c.estimators = split_list(value);
    } else if (key == "kernel") {
      c.kernel.family = value;
    } else if (key == "nu") {
      c.kernel.nu = std::stod(value);
    } else if (key == "lengthscale") {
      c.kernel.lengthscale = std::stod(value);
    } else if (key == "standardize") {
      c.kernel.standardize = parse_bool(value, key);
    } else if (key == "sigma") {
      c.sigma = std::stod(value);
    } else if (key == "level") {
      c.level = std::stod(value);
    } else if (key == "scaled") {
      c.scaled = parse_bool(value, key);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "md_out") {
      c.md_out = value;
    } else {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

std::string eta_label(double eta) {
  for (int k : {30, 100}) {
    if (std::abs(eta - std::sqrt(static_cast<double>(k))) < 1e-12) {
      return "sqrt(" + std::to_string(k) + ")";
    }
  }
  return kbal::format_double(eta);
}

int cmd_simulate(const Campaign& campaign) {
  check_common(campaign.sigma, campaign.level);
  kbal::EstimateOptions opts;
  opts.kernel = to_kernel_spec(campaign.kernel);
  opts.sigma = campaign.sigma;
  opts.level = campaign.level;
  opts.scaled = campaign.scaled;

  std::vector<kbal::CellSpec> cells;
  const std::vector<int> designs =
      campaign.family == kbal::Family::ks ? std::vector<int>{0} : campaign.designs;
  const std::vector<double> etas =
      campaign.family == kbal::Family::ks ? std::vector<double>{0.0} : campaign.etas;
  for (int design : designs) {
    for (double eta : etas) {
      for (double se : campaign.sigma_eps) {
        for (int n : campaign.n_values) {
          kbal::CellSpec cell;
          cell.dgp.family = campaign.family;
          if (campaign.family == kbal::Family::hainmueller) {
            cell.dgp.design = design;
            cell.dgp.eta = eta;
          }
          cell.dgp.sigma_eps = se;
          cell.n = n;
          cell.reps = campaign.reps;
          cell.opts = opts;
          cell.estimators = campaign.estimators;
          cells.push_back(std::move(cell));
        }
      }
    }
  }

  std::vector<kbal::CellSummary> summaries;
  std::vector<std::string> failures;
  for (size_t c = 0; c < cells.size(); ++c) {
    cells[c].base_seed = kbal::splitmix64(campaign.base_seed ^ (0x6a09e667f3bcc909ull * (c + 1)));
    std::fprintf(stderr, "cell %zu/%zu: %s n=%d reps=%d\n", c + 1, cells.size(),
                 kbal::family_name(cells[c].dgp.family).c_str(), cells[c].n, cells[c].reps);
    try {
      summaries.push_back(kbal::run_cell(cells[c]));
    } catch (const std::exception& e) {
      failures.push_back("cell " + std::to_string(c + 1) + ": " + e.what());
      std::fprintf(stderr, "cell %zu failed: %s\n", c + 1, e.what());
    }
  }

  std::vector<std::vector<std::string>> rows;
  for (const auto& summary : summaries) {
    const bool hain = summary.spec.dgp.family == kbal::Family::hainmueller;
    for (const auto& row : summary.rows) {
      rows.push_back({kbal::family_name(summary.spec.dgp.family),
                      hain ? std::to_string(summary.spec.dgp.design) : "",
                      hain ? kbal::format_double(summary.spec.dgp.eta) : "",
                      kbal::format_double(summary.spec.dgp.sigma_eps),
                      std::to_string(summary.spec.n),
                      std::to_string(summary.spec.reps),
                      row.estimator,
                      kbal::format_double(summary.truth.value),
                      kbal::format_double(row.mean_point),
                      kbal::format_double(row.bias),
                      kbal::format_double(row.sd),
                      kbal::format_double(row.rmse),
                      kbal::format_double(row.coverage),
                      kbal::format_double(row.avg_halfwidth),
                      std::to_string(row.n_failed)});
    }
  }
  kbal::write_csv(campaign.out,
                  {"family", "design", "eta", "sigma_eps", "n", "reps", "estimator", "truth",
                   "mean_point", "bias", "sd", "rmse", "coverage", "avg_halfwidth", "n_failed"},
                  rows);

  // Markdown mirror: cells grouped by design row, n across columns, one block
  // of rmse (bias) and one of half-width (coverage).
  std::ofstream md(campaign.md_out);
  if (!md) throw ConfigError("cannot write " + campaign.md_out);
  std::map<std::string, std::vector<const kbal::CellSummary*>> groups;
  std::vector<std::string> group_order;
  for (const auto& summary : summaries) {
    std::string key = kbal::family_name(summary.spec.dgp.family);
    if (summary.spec.dgp.family == kbal::Family::hainmueller) {
      key += " design " + std::to_string(summary.spec.dgp.design) +
             ", eta = " + eta_label(summary.spec.dgp.eta);
    }
    key += ", sigma_eps = " + kbal::format_double(summary.spec.dgp.sigma_eps);
    if (!groups.count(key)) group_order.push_back(key);
    groups[key].push_back(&summary);
  }
  for (const auto& key : group_order) {
    const auto& cells_in_group = groups[key];
    md << "## " << key << "\n\n";
    for (int panel = 0; panel < 2; ++panel) {
      md << (panel == 0 ? "### rmse (bias)\n\n" : "### ci half-width (coverage)\n\n");
      md << "| estimator |";
      for (const auto* summary : cells_in_group) md << " n=" << summary->spec.n << " |";
      md << "\n|---|";
      for (size_t i = 0; i < cells_in_group.size(); ++i) md << "---|";
      md << "\n";
      for (const auto& name : cells_in_group.front()->rows) {
        md << "| " << name.estimator << " |";
        for (const auto* summary : cells_in_group) {
          const kbal::EstimatorSummary* row = nullptr;
          for (const auto& r : summary->rows) {
            if (r.estimator == name.estimator) row = &r;
          }
          if (!row) {
            md << " - |";
          } else if (panel == 0) {
            md << " " << fmt_table(row->rmse) << " (" << fmt_table(row->bias) << ") |";
          } else {
            md << " " << fmt_table(row->avg_halfwidth) << " (" << fmt_table(row->coverage) << ") |";
          }
        }
        md << "\n";
      }
      md << "\n";
    }
  }
  md.close();

  if (!failures.empty() && summaries.empty()) {
    std::fprintf(stderr, "all cells failed\n");
    return 3;
  }
  std::printf("wrote %s and %s (%zu cells, %zu failed)\n", campaign.out.c_str(),
              campaign.md_out.c_str(), summaries.size(), failures.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimax kernel balancing weights and benchmark harness"};
  app.require_subcommand(1);

  DataFlags est_data;
  KernelFlags est_kernel;
  double est_sigma = 0.1, est_level = 0.95;
  bool est_scaled = true;
  std::vector<std::string> est_names = kbal::estimator_names();
  std::string est_out;
  CLI::App* est = app.add_subcommand("estimate", "point estimates and confidence intervals");
  est->set_config("--config");
  add_data_options(est, est_data);
  add_kernel_options(est, est_kernel);
  est->add_option("--sigma", est_sigma, "ridge scale");
  est->add_option("--level", est_level, "confidence level");
  est->add_flag("--scaled,!--no-scaled", est_scaled, "report the per-target-unit scaled estimate");
  est->add_option("--estimators", est_names, "comma-separated: ml,mlt,ols,ipw,aipw")->delimiter(',');
  est->add_option("--out", est_out, "write reports CSV here");

  DataFlags wts_data;
  KernelFlags wts_kernel;
  double wts_sigma = 0.1;
  std::string wts_out;
  CLI::App* wts = app.add_subcommand("weights", "dump minimax weights per observation unit");
  wts->set_config("--config");
  add_data_options(wts, wts_data);
  add_kernel_options(wts, wts_kernel);
  wts->add_option("--sigma", wts_sigma, "ridge scale");
  wts->add_option("--out", wts_out, "write weights CSV here");

  DataFlags diag_data;
  KernelFlags diag_kernel;
  double diag_sigma = 0.1;
  std::vector<std::string> diag_weights;
  std::string diag_out;
  CLI::App* diag = app.add_subcommand("diagnose", "spectrum and imbalance diagnostics");
  diag->set_config("--config");
  add_data_options(diag, diag_data);
  add_kernel_options(diag, diag_kernel);
  diag->add_option("--sigma", diag_sigma, "ridge scale");
  diag->add_option("--weights", diag_weights, "extra weight sets, name=path, repeatable");
  diag->add_option("--out", diag_out, "prefix for diagnostic CSV files");

  std::string campaign_path;
  CLI::App* sim = app.add_subcommand("simulate", "run a simulation campaign");
  sim->add_option("campaign", campaign_path, "campaign key=value file")->required();
  KernelFlags sim_kernel;
  int sim_reps = -1;
  std::uint64_t sim_seed = 0;
  double sim_sigma = -1.0, sim_level = -1.0;
  std::vector<std::string> sim_est;
  std::string sim_out, sim_md;
  sim->add_option("--reps", sim_reps, "override replication count");
  CLI::Option* seed_opt = sim->add_option("--seed", sim_seed, "override base seed");
  sim->add_option("--sigma", sim_sigma, "override ridge scale");
  sim->add_option("--level", sim_level, "override confidence level");
  sim->add_option("--estimators", sim_est, "override estimator list")->delimiter(',');
  sim->add_option("--out", sim_out, "override summary CSV path");
  sim->add_option("--md", sim_md, "override summary markdown path");
  CLI::Option* kern_opt = sim->add_option("--kernel", sim_kernel.family, "override kernel family");
  CLI::Option* nu_opt = sim->add_option("--nu", sim_kernel.nu, "override matern smoothness");
  CLI::Option* ls_opt = sim->add_option("--lengthscale", sim_kernel.lengthscale, "override lengthscale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  }

  try {
    if (est->parsed()) {
      return cmd_estimate(est_data, est_kernel, est_sigma, est_level, est_scaled, est_names, est_out);
    }
    if (wts->parsed()) return cmd_weights(wts_data, wts_kernel, wts_sigma, wts_out);
    if (diag->parsed()) return cmd_diagnose(diag_data, diag_kernel, diag_sigma, diag_weights, diag_out);
    if (sim->parsed()) {
      Campaign campaign = parse_campaign(campaign_path);
      if (sim_reps > 0) campaign.reps = sim_reps;
      if (seed_opt->count() > 0) campaign.base_seed = sim_seed;
      if (sim_sigma > 0.0) campaign.sigma = sim_sigma;
      if (sim_level > 0.0) campaign.level = sim_level;
      if (!sim_est.empty()) campaign.estimators = sim_est;
      if (!sim_out.empty()) campaign.out = sim_out;
      if (!sim_md.empty()) campaign.md_out = sim_md;
      if (kern_opt->count() > 0) campaign.kernel.family = sim_kernel.family;
      if (nu_opt->count() > 0) campaign.kernel.nu = sim_kernel.nu;
      if (ls_opt->count() > 0) campaign.kernel.lengthscale = sim_kernel.lengthscale;
      return cmd_simulate(campaign);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 4;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const kbal::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const kbal::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
