#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causalbench/algorithms/hyperparameters.hpp"
#include "causalbench/errors.hpp"
#include "causalbench/harness/setting.hpp"

namespace causalbench {

struct ProgramSpec {
  HyperparameterAssignment assignment;

  const std::string& algorithm() const { return assignment.algorithm; }
  std::string assignment_id() const { return assignment.id(); }
};

struct ResultRecord {
  SettingKey setting;
  int seed = 0;
  ProgramSpec program;
  std::optional<double> shd;  // absent when the learner failed
  long long runtime_ms = 0;
  std::string status = "ok";  // "ok" or "error: <message>"
  std::map<std::string, double> diagnostics;  // in memory only

  bool ok() const { return shd.has_value(); }

  /// Resume key: setting, seed and program.
  std::string cell_key() const {
    return setting.to_string() + "|" + std::to_string(seed) + "|" + program.assignment_id();
  }
};

inline const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols{"graph_p", "graph_d",   "graph_type",    "data_n",      "data_sem",
                                             "dataset_ref", "seed",  "algorithm",     "assignment_id", "params_json",
                                             "shd",     "runtime_ms", "status"};
  return cols;
}

/// {"a":0.1,"b":2} with keys in name order and canonical number text.
inline std::string params_json(const HyperparameterAssignment& a) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : a.params) {
    if (!first) out += ',';
    first = false;
    out += "\"" + k + "\":" + format_param(v);
  }
  return out + "}";
}

inline std::map<std::string, double> parse_params_json(const std::string& text) {
  std::map<std::string, double> out;
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') throw ParseError("params_json: expected object");
  std::size_t i = 1;
  while (i < text.size() - 1) {
    if (text[i] == ',') ++i;
    if (text[i] != '"') throw ParseError("params_json: expected key in '" + text + "'");
    const auto close = text.find('"', i + 1);
    const auto colon = text.find(':', close);
    if (close == std::string::npos || colon != close + 1) throw ParseError("params_json: malformed '" + text + "'");
    const std::string key = text.substr(i + 1, close - i - 1);
    std::size_t end = text.find(',', colon);
    if (end == std::string::npos) end = text.size() - 1;
    const std::string num = text.substr(colon + 1, end - colon - 1);
    char* stop = nullptr;
    const double v = std::strtod(num.c_str(), &stop);
    if (num.empty() || *stop) throw ParseError("params_json: bad number '" + num + "'");
    out[key] = v;
    i = end;
  }
  return out;
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one logical CSV record; quoted fields may hold commas and quotes.
inline std::vector<std::string> csv_split(const std::string& line, std::size_t line_no) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ParseError("results csv line " + std::to_string(line_no) + ": unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

inline int parse_int_field(const std::string& s, const char* what, std::size_t line_no) {
  if (s.empty()) return 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (*end) throw ParseError("results csv line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  return static_cast<int>(v);
}

}  // namespace detail

inline std::string result_csv_header() {
  std::string h;
  for (const auto& c : result_columns()) h += (h.empty() ? "" : ",") + c;
  return h + "\n";
}

inline std::string to_csv_row(const ResultRecord& r) {
  const auto& k = r.setting;
  const bool sim = k.simulated();
  std::vector<std::string> f{sim ? std::to_string(k.graph_p) : "",
                             sim ? format_param(k.graph_d) : "",
                             k.graph_type,
                             sim ? std::to_string(k.data_n) : "",
                             k.data_sem,
                             k.dataset_ref,
                             std::to_string(r.seed),
                             r.program.algorithm(),
                             r.program.assignment_id(),
                             params_json(r.program.assignment),
                             r.shd ? format_param(*r.shd) : "",
                             std::to_string(r.runtime_ms),
                             r.status};
  std::string line;
  for (std::size_t i = 0; i < f.size(); ++i) line += (i ? "," : "") + detail::csv_escape(f[i]);
  return line + "\n";
}

inline std::vector<ResultRecord> parse_results_csv(const std::string& text) {
  std::vector<ResultRecord> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line + "\n" != result_csv_header()) throw ParseError("results csv: unexpected header '" + line + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = detail::csv_split(line, line_no);
    if (f.size() != result_columns().size())
      throw ParseError("results csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(result_columns().size()) + " fields, got " + std::to_string(f.size()));
    ResultRecord r;
    r.setting.graph_p = detail::parse_int_field(f[0], "graph_p", line_no);
    r.setting.graph_d = f[1].empty() ? 0.0 : std::strtod(f[1].c_str(), nullptr);
    r.setting.graph_type = f[2];
    r.setting.data_n = detail::parse_int_field(f[3], "data_n", line_no);
    r.setting.data_sem = f[4];
    r.setting.dataset_ref = f[5];
    r.seed = detail::parse_int_field(f[6], "seed", line_no);
    r.program.assignment.algorithm = f[7];
    r.program.assignment.params = parse_params_json(f[9]);
    if (r.program.assignment_id() != f[8])
      throw ParseError("results csv line " + std::to_string(line_no) + ": assignment_id does not match params");
    if (!f[10].empty()) r.shd = std::strtod(f[10].c_str(), nullptr);
    r.runtime_ms = std::strtoll(f[11].c_str(), nullptr, 10);
    r.status = f[12];
    out.push_back(std::move(r));
  }
  return out;
}

/// Append-only results file. All appends go through one mutex and are
/// flushed per record so an interrupted run leaves a valid prefix.
class ResultStore {
 public:
  explicit ResultStore(std::string path) : path_(std::move(path)) {
    const std::filesystem::path p(path_);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    if (std::filesystem::exists(p) && std::filesystem::file_size(p) > 0) {
      existing_ = parse_results_csv(read_text_file(path_));
      for (const auto& r : existing_) keys_.insert(r.cell_key());
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw LoadError("cannot open results store " + path_);
    if (existing_.empty() && std::filesystem::file_size(p) == 0) {
      out_ << result_csv_header();
      out_.flush();
    }
  }

  const std::vector<ResultRecord>& existing() const { return existing_; }
  bool contains(const std::string& cell_key) const {
    std::lock_guard<std::mutex> lock(mu_);
    return keys_.count(cell_key) > 0;
  }

  void append(const ResultRecord& r) {
    std::lock_guard<std::mutex> lock(mu_);
    out_ << to_csv_row(r);
    out_.flush();
    keys_.insert(r.cell_key());
  }

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::vector<ResultRecord> existing_;
  std::set<std::string> keys_;
  std::ofstream out_;
  mutable std::mutex mu_;
};

inline std::vector<ResultRecord> load_results(const std::string& path) {
  return parse_results_csv(read_text_file(path));
}

}  // namespace causalbench
