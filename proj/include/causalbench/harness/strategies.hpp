#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causalbench/errors.hpp"
#include "causalbench/harness/store.hpp"
#include "causalbench/harness/sweep.hpp"

namespace causalbench {

enum class Strategy { Best, Worst, Default, SimMean };

inline const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> s{Strategy::Best, Strategy::Worst, Strategy::Default, Strategy::SimMean};
  return s;
}

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Best: return "best";
    case Strategy::Worst: return "worst";
    case Strategy::Default: return "default";
    case Strategy::SimMean: return "sim_mean";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  for (auto v : all_strategies())
    if (s == to_string(v)) return v;
  throw ConfigError("unknown strategy '" + s + "' (expected best, worst, default or sim_mean)");
}

/// Which assignment ids form each algorithm's grid, and its default.
struct StrategyInputs {
  std::set<std::string> grid_ids;
  std::optional<std::string> default_id;
  std::optional<std::string> reference_sim_mean_id;
};

inline std::map<std::string, StrategyInputs> strategy_inputs(const std::vector<AlgorithmPrograms>& programs) {
  std::map<std::string, StrategyInputs> out;
  for (const auto& ap : programs) {
    auto& in = out[ap.algorithm];
    for (const auto& a : ap.grid) in.grid_ids.insert(a.id());
    if (ap.default_assignment) in.default_id = ap.default_assignment->id();
    if (Registry::instance().contains(ap.algorithm))
      if (auto sm = sim_mean_assignment(Registry::instance().get(ap.algorithm).space())) in.reference_sim_mean_id = sm->id();
  }
  return out;
}

struct StrategyCell {
  std::string assignment_id;
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> values;  // per seed, in seed order
};

struct StrategyRow {
  SettingKey setting;
  std::string algorithm;
  std::map<Strategy, StrategyCell> cells;
  std::map<std::string, double> grid_means;  // assignment id -> seed-mean SHD
};

struct StrategyReport {
  std::vector<StrategyRow> rows;                  // ordered by (setting, algorithm)
  std::map<std::string, std::string> sim_mean_ids;  // recomputed per algorithm
  std::map<std::string, std::string> reference_sim_mean_ids;
  std::map<std::string, int> failures;  // failed records per algorithm

  const StrategyRow* find(const SettingKey& k, const std::string& alg) const {
    for (const auto& r : rows)
      if (r.setting == k && r.algorithm == alg) return &r;
    return nullptr;
  }
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Standard error of the mean with the n-1 sample variance; 0 for n < 2.
inline double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

/// BEST/WORST: per (setting, algorithm) argmin/argmax of seed-mean SHD over
/// the grid, ties to the lexically smallest assignment id. DEFAULT: the
/// default assignment's cell. SIM_MEAN: per algorithm, the grid assignment
/// with the lowest mean over simulated settings of its seed-mean SHD.
/// Failed records are excluded from every mean.
inline StrategyReport select_strategies(const std::vector<ResultRecord>& records,
                                        const std::map<std::string, StrategyInputs>& inputs) {
  using Seeds = std::map<int, double>;
  std::map<std::pair<SettingKey, std::string>, std::map<std::string, Seeds>> ok;
  std::map<std::pair<SettingKey, std::string>, std::set<std::pair<std::string, int>>> present;
  std::map<SettingKey, std::set<int>> seeds;
  StrategyReport report;
  for (const auto& r : records) {
    if (!inputs.count(r.program.algorithm())) continue;
    const auto key = std::make_pair(r.setting, r.program.algorithm());
    seeds[r.setting].insert(r.seed);
    present[key].insert({r.program.assignment_id(), r.seed});
    if (r.ok()) ok[key][r.program.assignment_id()][r.seed] = *r.shd;
    else ++report.failures[r.program.algorithm()];
  }

  std::vector<std::string> missing;
  for (const auto& [key, have] : present) {
    const auto& in = inputs.at(key.second);
    std::set<std::string> need = in.grid_ids;
    if (in.default_id) need.insert(*in.default_id);
    for (const auto& id : need)
      for (int s : seeds[key.first])
        if (!have.count({id, s}))
          missing.push_back(key.first.to_string() + " " + key.second + " " + id + " seed " + std::to_string(s));
  }
  if (!missing.empty()) {
    std::string msg = "incomplete store: " + std::to_string(missing.size()) + " missing cells";
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += "\n  " + missing[i];
    if (missing.size() > 20) msg += "\n  ...";
    throw CoverageError(msg);
  }

  auto seed_values = [](const Seeds& s) {
    std::vector<double> v;
    for (const auto& [seed, x] : s) v.push_back(x);
    return v;
  };

  // SIM_MEAN per algorithm.
  std::map<std::string, std::map<std::string, std::vector<double>>> per_alg;  // alg -> id -> setting means
  std::map<std::string, int> settings_per_alg;
  bool any_simulated = false;
  for (const auto& [key, by_id] : ok) any_simulated |= key.first.simulated();
  for (const auto& [key, have] : present) {
    if (any_simulated && !key.first.simulated()) continue;
    ++settings_per_alg[key.second];
    const auto it = ok.find(key);
    if (it == ok.end()) continue;
    for (const auto& [id, s] : it->second)
      if (inputs.at(key.second).grid_ids.count(id)) per_alg[key.second][id].push_back(mean_of(seed_values(s)));
  }
  for (const auto& [alg, by_id] : per_alg) {
    std::optional<std::pair<double, std::string>> best;
    for (const auto& [id, means] : by_id) {
      if (static_cast<int>(means.size()) != settings_per_alg[alg]) continue;  // failed somewhere
      const double m = mean_of(means);
      if (!best || m < best->first) best = {m, id};
    }
    if (best) report.sim_mean_ids[alg] = best->second;
  }
  for (const auto& [alg, in] : inputs)
    if (in.reference_sim_mean_id) report.reference_sim_mean_ids[alg] = *in.reference_sim_mean_id;

  for (const auto& [key, have] : present) {
    StrategyRow row;
    row.setting = key.first;
    row.algorithm = key.second;
    const auto& in = inputs.at(key.second);
    const auto it = ok.find(key);
    auto cell_for = [&](const std::string& id) -> std::optional<StrategyCell> {
      if (it == ok.end()) return std::nullopt;
      const auto s = it->second.find(id);
      if (s == it->second.end()) return std::nullopt;
      StrategyCell c;
      c.assignment_id = id;
      c.values = seed_values(s->second);
      c.mean = mean_of(c.values);
      c.se = standard_error(c.values);
      return c;
    };
    std::optional<StrategyCell> best, worst;
    for (const auto& id : in.grid_ids) {  // ascending id, so strict comparisons keep the smallest on ties
      const auto c = cell_for(id);
      if (!c) continue;
      row.grid_means[id] = c->mean;
      if (!best || c->mean < best->mean) best = c;
      if (!worst || c->mean > worst->mean) worst = c;
    }
    if (best) row.cells[Strategy::Best] = *best;
    if (worst) row.cells[Strategy::Worst] = *worst;
    if (in.default_id)
      if (auto c = cell_for(*in.default_id)) row.cells[Strategy::Default] = *c;
    const auto sm = report.sim_mean_ids.find(key.second);
    if (sm != report.sim_mean_ids.end())
      if (auto c = cell_for(sm->second)) row.cells[Strategy::SimMean] = *c;
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Grouped views

inline std::string group_label(const SettingKey& k, const std::vector<std::string>& dims) {
  if (dims.empty()) return "all";
  std::string out;
  for (const auto& d : dims) out += (out.empty() ? "" : ",") + d + "=" + k.dimension(d);
  return out;
}

inline std::vector<std::string> parse_group_by(const std::string& spec) {
  std::vector<std::string> dims;
  std::string cur;
  for (char c : spec + ",") {
    if (c == ',') {
      if (!cur.empty()) {
        if (std::find(setting_dimensions().begin(), setting_dimensions().end(), cur) == setting_dimensions().end())
          throw ConfigError("unknown group-by dimension '" + cur + "'");
        dims.push_back(cur);
      }
      cur.clear();
    } else {
      cur += c;
    }
  }
  return dims;
}

struct WinTable {
  std::vector<std::string> dims;
  std::map<std::string, std::map<std::string, double>> percent;  // group -> algorithm -> %
  std::map<std::string, int> cells;                              // group -> settings counted
};

/// In every setting of a group the algorithm(s) with the lowest strategy SHD
/// win; t tied winners get 1/t each. Percentages are over the group's
/// settings.
inline WinTable winning_percentages(const StrategyReport& report, const std::vector<std::string>& dims,
                                    Strategy strategy) {
  if (report.rows.empty()) throw ContractError("winning_percentages: empty report");
  std::map<std::string, std::map<SettingKey, std::map<std::string, double>>> groups;
  std::map<std::string, std::set<std::string>> algs;
  for (const auto& row : report.rows) {
    const auto label = group_label(row.setting, dims);
    algs[label].insert(row.algorithm);
    const auto c = row.cells.find(strategy);
    if (c != row.cells.end()) groups[label][row.setting][row.algorithm] = c->second.mean;
    else groups[label];
  }
  WinTable t;
  t.dims = dims;
  for (const auto& [label, settings] : groups) {
    auto& pct = t.percent[label];
    for (const auto& a : algs[label]) pct[a] = 0.0;
    int cells = 0;
    for (const auto& [setting, scores] : settings) {
      if (scores.empty()) continue;
      ++cells;
      double lo = INFINITY;
      for (const auto& [a, v] : scores) lo = std::min(lo, v);
      std::vector<std::string> winners;
      for (const auto& [a, v] : scores)
        if (v == lo) winners.push_back(a);
      for (const auto& w : winners) pct[w] += 1.0 / static_cast<double>(winners.size());
    }
    if (cells == 0) throw ContractError("winning_percentages: group '" + label + "' has no scored settings");
    for (auto& [a, v] : pct) v = 100.0 * v / cells;
    t.cells[label] = cells;
  }
  return t;
}

struct Recommendation {
  std::string cell;  // group label over graph_p, data_sem, graph_d
  std::vector<std::pair<std::string, double>> ranked;  // algorithm, win %
};

/// Algorithms with a positive winning percentage per (graph_p, data_sem,
/// graph_d) cell, by percentage and then name.
inline std::vector<Recommendation> recommend(const StrategyReport& report, Strategy strategy) {
  const auto t = winning_percentages(report, {"graph_p", "data_sem", "graph_d"}, strategy);
  std::vector<Recommendation> out;
  for (const auto& [label, pct] : t.percent) {
    Recommendation r{label, {}};
    for (const auto& [a, v] : pct)
      if (v > 0.0) r.ranked.emplace_back(a, v);
    std::sort(r.ranked.begin(), r.ranked.end(),
              [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    out.push_back(std::move(r));
  }
  return out;
}

struct GapRow {
  SettingKey setting;
  std::string algorithm;
  Strategy fixed = Strategy::Default;
  double best_minus_fixed = 0.0;   // SHD(fixed) - SHD(BEST)
  double fixed_minus_worst = 0.0;  // SHD(WORST) - SHD(fixed)
};

/// Cost of a fixed choice against the oracle and its headroom over the worst
/// choice, for DEFAULT and SIM_MEAN. SIM_MEAN lies in the grid, so both of
/// its gaps are checked to be non-negative.
inline std::vector<GapRow> robustness_gaps(const StrategyReport& report) {
  std::vector<GapRow> out;
  for (const auto& row : report.rows) {
    const auto b = row.cells.find(Strategy::Best);
    const auto w = row.cells.find(Strategy::Worst);
    if (b == row.cells.end() || w == row.cells.end())
      throw CoverageError("robustness_gaps: " + row.setting.to_string() + " " + row.algorithm +
                          " lacks BEST/WORST");
    for (const auto fixed : {Strategy::Default, Strategy::SimMean}) {
      const auto f = row.cells.find(fixed);
      if (f == row.cells.end()) continue;
      GapRow g{row.setting, row.algorithm, fixed, f->second.mean - b->second.mean, w->second.mean - f->second.mean};
      if (fixed == Strategy::SimMean && (g.best_minus_fixed < 0.0 || g.fixed_minus_worst < 0.0))
        throw ContractError("robustness_gaps: SIM_MEAN outside [BEST, WORST] for " + row.setting.to_string() + " " +
                            row.algorithm);
      out.push_back(g);
    }
  }
  return out;
}

struct StrategyBar {
  std::string group;
  std::string algorithm;
  Strategy strategy = Strategy::Best;
  double mean = 0.0;
  double se = 0.0;  // over the pooled (setting, seed) values
  int count = 0;
};

/// Mean SHD per (group, algorithm, strategy) over every seed of every
/// setting in the group; the standard error is taken over that pooled set.
inline std::vector<StrategyBar> strategy_bars(const StrategyReport& report, const std::vector<std::string>& dims) {
  std::map<std::tuple<std::string, std::string, Strategy>, std::vector<double>> pooled;
  for (const auto& row : report.rows)
    for (const auto& [s, c] : row.cells) {
      auto& v = pooled[{group_label(row.setting, dims), row.algorithm, s}];
      v.insert(v.end(), c.values.begin(), c.values.end());
    }
  std::vector<StrategyBar> out;
  for (const auto& [k, v] : pooled)
    out.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), mean_of(v), standard_error(v),
                   static_cast<int>(v.size())});
  return out;
}

/// Seed-mean SHD of every grid assignment, pooled per (group, algorithm).
inline std::map<std::pair<std::string, std::string>, std::vector<double>> grid_distributions(
    const StrategyReport& report, const std::vector<std::string>& dims) {
  std::map<std::pair<std::string, std::string>, std::vector<double>> out;
  for (const auto& row : report.rows) {
    auto& v = out[{group_label(row.setting, dims), row.algorithm}];
    for (const auto& [id, m] : row.grid_means) v.push_back(m);
  }
  for (auto& [k, v] : out) std::sort(v.begin(), v.end());
  return out;
}

}  // namespace causalbench
