#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causalbench/errors.hpp"
#include "causalbench/graph.hpp"
#include "causalbench/graph_io.hpp"

namespace causalbench {

/// n x p observations (columns are variables) plus labels and optional truth.
struct Dataset {
  Eigen::MatrixXd x;
  std::vector<std::string> names;
  std::optional<Graph> truth;
  std::optional<WeightedAdjacency> truth_weights;  // linear SEMs only
  std::map<std::string, std::string> meta;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }

  void validate() const {
    if (static_cast<int>(names.size()) != p())
      throw ContractError("Dataset: " + std::to_string(names.size()) + " names for " +
                          std::to_string(p()) + " columns");
    std::set<std::string> unique(names.begin(), names.end());
    if (unique.size() != names.size()) throw ContractError("Dataset: variable names are not unique");
    if (!x.allFinite()) throw ContractError("Dataset: non-finite entries");
    if (truth && truth->p() != p())
      throw ContractError("Dataset: truth has " + std::to_string(truth->p()) + " nodes, data has " +
                          std::to_string(p()));
  }
};

inline std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) names.push_back("X" + std::to_string(j));
  return names;
}

inline Dataset make_dataset(Eigen::MatrixXd x, std::optional<Graph> truth = std::nullopt) {
  Dataset ds;
  const int p = static_cast<int>(x.cols());
  ds.x = std::move(x);
  ds.names = default_names(p);
  ds.truth = std::move(truth);
  ds.validate();
  return ds;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\"");
    const auto e = cell.find_last_not_of(" \t\"");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Header line of names, then numeric rows.
inline Dataset parse_data_csv(const std::string& text, const std::string& source = "<memory>") {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> names;
  std::vector<double> values;
  int rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (names.empty()) {
      names = std::move(cells);
      continue;
    }
    if (cells.size() != names.size())
      throw ParseError(source + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                       " cells, header has " + std::to_string(names.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto& s = cells[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(source + ": non-numeric cell '" + s + "' at row " + std::to_string(line_no) +
                         ", column " + std::to_string(c + 1));
      values.push_back(v);
    }
    ++rows;
  }
  if (names.empty()) throw ParseError(source + ": missing header");
  if (rows == 0) throw ParseError(source + ": no data rows");
  const auto p = static_cast<Eigen::Index>(names.size());
  Dataset ds;
  ds.x.resize(rows, p);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < p; ++c) ds.x(r, c) = values[static_cast<std::size_t>(r * p + c)];
  ds.names = std::move(names);
  ds.validate();
  return ds;
}

inline std::string to_data_csv(const Dataset& ds) {
  std::ostringstream out;
  out.precision(17);
  for (int j = 0; j < ds.p(); ++j) out << (j ? "," : "") << ds.names[static_cast<std::size_t>(j)];
  out << '\n';
  for (int r = 0; r < ds.n(); ++r) {
    for (int j = 0; j < ds.p(); ++j) out << (j ? "," : "") << ds.x(r, j);
    out << '\n';
  }
  return out.str();
}

inline Dataset load_dataset(const std::string& data_path, const std::optional<std::string>& truth_path = {}) {
  Dataset ds = parse_data_csv(read_text_file(data_path), data_path);
  ds.meta["source"] = data_path;
  if (truth_path) {
    Graph truth = load_graph(*truth_path);
    if (truth.p() != ds.p())
      throw LoadError("truth '" + *truth_path + "' has " + std::to_string(truth.p()) + " nodes but '" +
                      data_path + "' has " + std::to_string(ds.p()) + " columns");
    ds.truth = std::move(truth);
    ds.meta["truth"] = *truth_path;
  }
  return ds;
}

/// Per-column z-scores (population variance).
inline Dataset standardize(const Dataset& ds) {
  Dataset out = ds;
  const double n = static_cast<double>(ds.n());
  for (int j = 0; j < ds.p(); ++j) {
    auto col = out.x.col(j);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / n);
    if (!(sd > 0.0) || sd < 1e-300)
      throw ContractError("standardize: column '" + ds.names[static_cast<std::size_t>(j)] +
                          "' has zero variance");
    col /= sd;
  }
  out.truth_weights.reset();
  out.meta["standardized"] = "true";
  return out;
}

}  // namespace causalbench
