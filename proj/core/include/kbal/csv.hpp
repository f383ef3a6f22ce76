#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kbal/dataset.hpp"
#include "kbal/estimators.hpp"

namespace kbal {

struct LoadSchema {
  std::string w_col = "w";
  std::string y_col = "y";
  std::optional<std::string> t_col;           // explicit target column
  TargetRule t_rule = TargetRule::all;        // used when t_col is absent
};

// Header row required. All columns not named as w/y/t are covariates, kept in
// file order. Empty, NA, or NaN outcome cells mark the outcome missing, which
// is allowed only where W != 0; a missing outcome on a W = 0 row raises a
// SchemaError naming the data row (1-based, excluding the header).
Dataset load_csv(const std::string& path, const LoadSchema& schema);

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::string> report_header();
std::vector<std::string> report_row(const EstimateReport& rep);

}  // namespace kbal
