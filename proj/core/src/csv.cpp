#include "kbal/csv.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "kbal/errors.hpp"

namespace kbal {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool is_missing(const std::string& field) {
  if (field.empty()) return true;
  std::string low = field;
  std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
  return low == "na" || low == "nan";
}

double parse_double(const std::string& field, const std::string& col, int row) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE) {
    throw SchemaError("non-numeric value '" + field + "' in column " + col + " at data row " +
                      std::to_string(row));
  }
  return v;
}

int parse_int(const std::string& field, const std::string& col, int row) {
  double v = parse_double(field, col, row);
  double r = std::round(v);
  if (std::abs(v - r) > 0.0) {
    throw SchemaError("non-integer value '" + field + "' in column " + col + " at data row " +
                      std::to_string(row));
  }
  return static_cast<int>(r);
}

}  // namespace

Dataset load_csv(const std::string& path, const LoadSchema& schema) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + ": empty file, header row required");
  std::vector<std::string> header = split_fields(line);

  int w_idx = -1, y_idx = -1, t_idx = -1;
  std::vector<int> x_idx;
  std::vector<std::string> x_names;
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == schema.w_col) {
      w_idx = static_cast<int>(j);
    } else if (header[j] == schema.y_col) {
      y_idx = static_cast<int>(j);
    } else if (schema.t_col && header[j] == *schema.t_col) {
      t_idx = static_cast<int>(j);
    } else {
      x_idx.push_back(static_cast<int>(j));
      x_names.push_back(header[j]);
    }
  }
  if (w_idx < 0) throw SchemaError(path + ": missing column " + schema.w_col);
  if (y_idx < 0) throw SchemaError(path + ": missing column " + schema.y_col);
  if (schema.t_col && t_idx < 0) throw SchemaError(path + ": missing column " + *schema.t_col);

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw SchemaError(path + ": data row " + std::to_string(rows.size() + 1) + " has " +
                        std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(header.size()));
    }
    rows.push_back(std::move(fields));
  }

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(x_idx.size());
  Dataset data;
  data.x.resize(n, d);
  data.w.resize(n);
  data.y.resize(n);
  data.t.resize(n);
  data.y_observed.assign(static_cast<size_t>(n), 0);
  data.column_names = x_names;

  for (int i = 0; i < n; ++i) {
    const int row = i + 1;
    const auto& fields = rows[static_cast<size_t>(i)];
    data.w[i] = parse_int(fields[static_cast<size_t>(w_idx)], schema.w_col, row);

    const std::string& y_field = fields[static_cast<size_t>(y_idx)];
    if (is_missing(y_field)) {
      if (data.w[i] == 0) {
        throw SchemaError(path + ": missing outcome on a W=0 unit at data row " + std::to_string(row));
      }
      data.y[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      data.y[i] = parse_double(y_field, schema.y_col, row);
      data.y_observed[static_cast<size_t>(i)] = 1;
    }

    for (int j = 0; j < d; ++j) {
      const std::string& f = fields[static_cast<size_t>(x_idx[static_cast<size_t>(j)])];
      if (is_missing(f)) {
        throw SchemaError(path + ": missing covariate " + x_names[static_cast<size_t>(j)] +
                          " at data row " + std::to_string(row));
      }
      data.x(i, j) = parse_double(f, x_names[static_cast<size_t>(j)], row);
    }

    if (t_idx >= 0) {
      data.t[i] = parse_int(fields[static_cast<size_t>(t_idx)], *schema.t_col, row);
      if (data.t[i] != 0 && data.t[i] != 1) {
        throw SchemaError(path + ": target column must be 0/1 at data row " + std::to_string(row));
      }
    } else if (schema.t_rule == TargetRule::all) {
      data.t[i] = 1;
    } else if (schema.t_rule == TargetRule::w1) {
      data.t[i] = (data.w[i] == 1) ? 1 : 0;
    } else {
      throw ConfigError("t rule 'column' requires a target column name");
    }
  }

  data.validate();
  return data;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  for (size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed for " + path);
}

std::vector<std::string> report_header() {
  return {"estimator", "point",  "variance", "ci_low",        "ci_high",
          "level",     "scaled", "n",        "n_obs",         "n_target",
          "sigma",     "jitter", "max_abs_weight", "propensity_converged"};
}

std::vector<std::string> report_row(const EstimateReport& rep) {
  return {rep.estimator,
          format_double(rep.point),
          format_double(rep.variance),
          format_double(rep.ci_low),
          format_double(rep.ci_high),
          format_double(rep.level),
          rep.scaled ? "1" : "0",
          std::to_string(rep.n),
          std::to_string(rep.n_obs),
          std::to_string(rep.n_target),
          format_double(rep.sigma),
          format_double(rep.jitter_added),
          format_double(rep.max_abs_weight),
          rep.propensity_converged ? "1" : "0"};
}

}  // namespace kbal
