#pragma once

#include <atomic>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "causalbench/cli/config.hpp"
#include "causalbench/harness/store.hpp"
#include "causalbench/harness/strategies.hpp"
#include "causalbench/harness/svg.hpp"
#include "causalbench/harness/sweep.hpp"

namespace causalbench {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "causalbench 0.1.0";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitPartial = 2 };

/// Set from a SIGINT handler; the sweep stops handing out new cells.
inline std::atomic<bool>& interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

struct CommandContext {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
};

namespace fs = std::filesystem;

inline std::string results_path(const std::string& out_dir) { return (fs::path(out_dir) / "results.csv").string(); }
inline std::string manifest_path(const std::string& out_dir) { return (fs::path(out_dir) / "manifest.json").string(); }

inline nlohmann::ordered_json make_manifest(const RunConfig& c) {
  nlohmann::ordered_json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["code_version"] = kCodeVersion;
  m["config_hash"] = config_hash(c);
  m["base_seed"] = c.seed_policy.effective();
  m["results_columns"] = result_columns();
  nlohmann::ordered_json grids = nlohmann::ordered_json::object();
  for (const auto& ap : c.programs()) {
    nlohmann::ordered_json g;
    g["grid"] = c.algorithms.at(ap.algorithm).grid;
    g["assignments"] = ap.grid.size();
    if (ap.default_assignment) {
      g["default"] = ap.default_assignment->params;
      g["default_id"] = ap.default_assignment->id();
    }
    grids[ap.algorithm] = g;
  }
  m["grids"] = grids;
  m["config"] = serialize(c);
  return m;
}

/// Reads a run manifest and returns the configuration it recorded.
inline RunConfig read_manifest(const std::string& out_dir, nlohmann::ordered_json* raw = nullptr) {
  const auto path = manifest_path(out_dir);
  nlohmann::ordered_json m;
  try {
    m = nlohmann::ordered_json::parse(read_text_file(path));
  } catch (const nlohmann::ordered_json::exception& e) {
    throw LoadError(path + ": " + e.what());
  }
  if (!m.contains("schema_version") || m["schema_version"] != kManifestSchemaVersion)
    throw LoadError(path + ": unsupported schema_version");
  RunConfig c = parse_run_config(m.at("config"));
  if (m.value("config_hash", std::string()) != config_hash(c))
    throw LoadError(path + ": config_hash does not match the recorded config");
  if (raw) *raw = m;
  return c;
}

/// Writes data.csv and truth.txt per (simulated setting, seed) under
/// <out>/data/<setting>/seed_<k>/, plus a manifest listing them.
inline int cmd_simulate(const RunConfig& c, CommandContext ctx = {}) {
  const fs::path root = fs::path(c.out) / "data";
  const auto base = c.seed_policy.effective();
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  int pairs = 0;
  for (const auto& s : c.settings) {
    if (!s.key.simulated()) continue;
    for (int seed : s.seeds) {
      const fs::path dir = root / s.key.to_string() / ("seed_" + std::to_string(seed));
      std::error_code ec;
      fs::create_directories(dir, ec);
      if (ec) throw LoadError("cannot create '" + dir.string() + "': " + ec.message());
      const Dataset ds = make_setting_dataset(s, seed, base, c.standardize);
      write_text_file((dir / "data.csv").string(), to_data_csv(ds));
      write_text_file((dir / "truth.txt").string(), to_edge_list(*ds.truth));
      files.push_back({{"setting", s.key.to_string()},
                       {"seed", seed},
                       {"data", (dir / "data.csv").string()},
                       {"truth", (dir / "truth.txt").string()}});
      ++pairs;
    }
  }
  nlohmann::ordered_json m;
  m["schema_version"] = kManifestSchemaVersion;
  m["code_version"] = kCodeVersion;
  m["config_hash"] = config_hash(c);
  m["base_seed"] = base;
  m["files"] = files;
  write_text_file((root / "manifest.json").string(), m.dump(2) + "\n");
  ctx.out << "wrote " << pairs << " dataset pairs under " << root.string() << "\n";
  return kExitOk;
}

/// Runs the sweep into <out>/results.csv, resuming from what is there.
inline int cmd_run(const RunConfig& c, CommandContext ctx = {}) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ConfigError("output directory '" + c.out + "' is not writable: " + ec.message());
  const auto mpath = manifest_path(c.out);
  const auto manifest = make_manifest(c);
  if (fs::exists(mpath)) {
    nlohmann::ordered_json old;
    read_manifest(c.out, &old);
    if (old["config_hash"] != manifest["config_hash"] || old["base_seed"] != manifest["base_seed"])
      throw ConfigError("'" + c.out + "' holds results of a different configuration or seed offset");
  }
  write_text_file(mpath, manifest.dump(2) + "\n");

  SweepOptions opt;
  opt.workers = c.workers;
  opt.store_path = results_path(c.out);
  opt.standardize = c.standardize;
  opt.base_seed = c.seed_policy.effective();
  opt.stop = &interrupt_flag();
  const auto res = run_sweep(c.settings, c.programs(), opt);

  std::map<std::string, int> failures;
  for (const auto& r : res.records)
    if (!r.ok()) ++failures[r.program.algorithm()];
  ctx.out << "computed " << res.computed << ", resumed " << res.skipped << ", failed " << res.failures
          << (res.interrupted ? " (interrupted)" : "") << "\n";
  for (const auto& [alg, n] : failures) ctx.out << "  failures " << alg << ": " << n << "\n";
  if (res.interrupted) return kExitPartial;
  int stored_failures = 0;
  for (const auto& [alg, n] : failures) stored_failures += n;
  return stored_failures == 0 ? kExitOk : kExitPartial;
}

inline StrategyReport report_for(const std::string& out_dir) {
  const RunConfig c = read_manifest(out_dir);
  const auto records = load_results(results_path(out_dir));
  std::set<SettingKey> configured;
  for (const auto& s : c.settings) configured.insert(s.key);
  std::vector<ResultRecord> kept;
  for (const auto& r : records)
    if (configured.count(r.setting)) kept.push_back(r);
  return select_strategies(kept, strategy_inputs(c.programs()));
}

inline std::string csv_line(const std::vector<std::string>& fields) {
  std::string s;
  for (std::size_t i = 0; i < fields.size(); ++i) s += (i ? "," : "") + detail::csv_escape(fields[i]);
  return s + "\n";
}

/// Strategy table, SIM_MEAN choices and failure counts under <out>/aggregate.
inline int cmd_aggregate(const std::string& out_dir, CommandContext ctx = {}) {
  const auto report = report_for(out_dir);
  const fs::path dir = fs::path(out_dir) / "aggregate";
  fs::create_directories(dir);
  std::string t = csv_line({"setting", "algorithm", "strategy", "assignment_id", "mean_shd", "se_shd", "seeds"});
  for (const auto& row : report.rows)
    for (const auto& [s, cell] : row.cells)
      t += csv_line({row.setting.to_string(), row.algorithm, to_string(s), cell.assignment_id, format_param(cell.mean),
                     format_param(cell.se), std::to_string(cell.values.size())});
  write_text_file((dir / "strategies.csv").string(), t);

  std::string sm = csv_line({"algorithm", "sim_mean_id", "reference_sim_mean_id", "matches_reference"});
  for (const auto& [alg, id] : report.sim_mean_ids) {
    const auto ref = report.reference_sim_mean_ids.find(alg);
    const std::string ref_id = ref == report.reference_sim_mean_ids.end() ? "" : ref->second;
    sm += csv_line({alg, id, ref_id, ref_id.empty() ? "" : (ref_id == id ? "yes" : "no")});
  }
  write_text_file((dir / "sim_mean.csv").string(), sm);

  std::string f = csv_line({"algorithm", "failed_records"});
  for (const auto& [alg, n] : report.failures) f += csv_line({alg, std::to_string(n)});
  write_text_file((dir / "failures.csv").string(), f);
  ctx.out << "aggregated " << report.rows.size() << " (setting, algorithm) rows into " << dir.string() << "\n";
  return kExitOk;
}

inline const std::vector<std::string>& report_kinds() {
  static const std::vector<std::string> k{"strategy-bars", "distributions", "winners", "gaps", "recommend"};
  return k;
}

/// One report as CSV (and SVG where it has a chart) under <out>/report.
inline int cmd_report(const std::string& out_dir, const std::string& kind, const std::vector<std::string>& dims,
                      Strategy strategy, CommandContext ctx = {}) {
  if (std::find(report_kinds().begin(), report_kinds().end(), kind) == report_kinds().end())
    throw ConfigError("unknown report kind '" + kind + "'");
  const auto report = report_for(out_dir);
  const fs::path dir = fs::path(out_dir) / "report";
  fs::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text_file((dir / name).string(), text);
    written.push_back((dir / name).string());
  };

  if (kind == "strategy-bars") {
    const auto bars = strategy_bars(report, dims);
    std::string t = csv_line({"group", "algorithm", "strategy", "mean_shd", "se_shd", "count"});
    std::vector<std::string> cats;
    std::map<std::pair<std::string, Strategy>, std::pair<double, double>> vals;
    for (const auto& b : bars) {
      t += csv_line({b.group, b.algorithm, to_string(b.strategy), format_param(b.mean), format_param(b.se),
                     std::to_string(b.count)});
      const std::string cat = b.group + " " + b.algorithm;
      if (std::find(cats.begin(), cats.end(), cat) == cats.end()) cats.push_back(cat);
      vals[{cat, b.strategy}] = {b.mean, b.se};
    }
    std::vector<BarSeries> series;
    for (auto s : all_strategies()) {
      BarSeries bs{to_string(s), {}, {}};
      for (const auto& c : cats) {
        const auto it = vals.find({c, s});
        bs.values.push_back(it == vals.end() ? NAN : it->second.first);
        bs.errors.push_back(it == vals.end() ? 0.0 : it->second.second);
      }
      series.push_back(std::move(bs));
    }
    emit("strategy_bars.csv", t);
    emit("strategy_bars.svg", render_bar_chart("SHD by hyperparameter strategy", cats, series));
  } else if (kind == "distributions") {
    const auto dist = grid_distributions(report, dims);
    std::string t = csv_line({"group", "algorithm", "seed_mean_shd"});
    std::vector<std::string> cats;
    std::vector<std::vector<double>> samples;
    for (const auto& [k, v] : dist) {
      for (double x : v) t += csv_line({k.first, k.second, format_param(x)});
      cats.push_back(k.first + " " + k.second);
      samples.push_back(v);
    }
    emit("distributions.csv", t);
    emit("distributions.svg", render_violin_chart("SHD over the hyperparameter grid", cats, samples));
  } else if (kind == "winners") {
    const auto w = winning_percentages(report, dims, strategy);
    std::string t = csv_line({"group", "algorithm", "win_percent", "settings"});
    std::vector<std::string> cats;
    std::set<std::string> algs;
    for (const auto& [g, pct] : w.percent) {
      cats.push_back(g);
      for (const auto& [a, v] : pct) {
        algs.insert(a);
        t += csv_line({g, a, format_param(v), std::to_string(w.cells.at(g))});
      }
    }
    std::vector<BarSeries> series;
    for (const auto& a : algs) {
      BarSeries bs{a, {}, {}};
      for (const auto& g : cats) {
        const auto& pct = w.percent.at(g);
        const auto it = pct.find(a);
        bs.values.push_back(it == pct.end() ? 0.0 : it->second);
      }
      series.push_back(std::move(bs));
    }
    const std::string s = to_string(strategy);
    emit("winners_" + s + ".csv", t);
    emit("winners_" + s + ".svg",
         render_bar_chart("Winning percentage, " + s + " hyperparameters", cats, series, "win %"));
  } else if (kind == "gaps") {
    const auto gaps = robustness_gaps(report);
    std::string t = csv_line({"setting", "algorithm", "fixed", "fixed_minus_best", "worst_minus_fixed"});
    std::map<std::string, std::map<std::string, std::vector<double>>> pooled;  // series -> algorithm -> gaps
    std::set<std::string> algs;
    for (const auto& g : gaps) {
      t += csv_line({g.setting.to_string(), g.algorithm, to_string(g.fixed), format_param(g.best_minus_fixed),
                     format_param(g.fixed_minus_worst)});
      algs.insert(g.algorithm);
      pooled[std::string(to_string(g.fixed)) + " - best"][g.algorithm].push_back(g.best_minus_fixed);
      pooled["worst - " + std::string(to_string(g.fixed))][g.algorithm].push_back(g.fixed_minus_worst);
    }
    const std::vector<std::string> cats(algs.begin(), algs.end());
    std::vector<BarSeries> series;
    for (const auto& [name, by_alg] : pooled) {
      BarSeries bs{name, {}, {}};
      for (const auto& a : cats) {
        const auto it = by_alg.find(a);
        bs.values.push_back(it == by_alg.end() ? NAN : mean_of(it->second));
        bs.errors.push_back(it == by_alg.end() ? 0.0 : standard_error(it->second));
      }
      series.push_back(std::move(bs));
    }
    emit("gaps.csv", t);
    emit("gaps.svg", render_bar_chart("SHD cost of fixed hyperparameters", cats, series, "SHD gap"));
  } else {
    const auto rec = recommend(report, strategy);
    std::string t = csv_line({"cell", "rank", "algorithm", "win_percent"});
    for (const auto& r : rec)
      for (std::size_t i = 0; i < r.ranked.size(); ++i)
        t += csv_line({r.cell, std::to_string(i + 1), r.ranked[i].first, format_param(r.ranked[i].second)});
    emit("recommend_" + std::string(to_string(strategy)) + ".csv", t);
  }
  for (const auto& w : written) ctx.out << "wrote " << w << "\n";
  return kExitOk;
}

inline int cmd_list_algorithms(CommandContext ctx = {}) {
  ctx.out << registry_to_json().dump(2) << "\n";
  return kExitOk;
}

/// Parsed command line, independent of the argument parser.
struct CommandLine {
  std::string command;
  std::string config_path;
  std::string out;
  std::optional<int> workers;
  std::string group_by;
  std::string strategy = "best";
  std::string report_kind;
};

/// Runs one subcommand and maps errors to exit codes.
inline int run_command(const CommandLine& cl, CommandContext ctx = {}) {
  try {
    auto load = [&] {
      if (cl.config_path.empty()) throw ConfigError("--config is required for '" + cl.command + "'");
      RunConfig c = load_run_config(cl.config_path);
      if (!cl.out.empty()) c.out = cl.out;
      if (cl.workers) {
        if (*cl.workers < 1) throw ConfigError("--workers must be >= 1");
        c.workers = *cl.workers;
      }
      return c;
    };
    auto out_dir = [&] {
      if (!cl.out.empty()) return cl.out;
      if (!cl.config_path.empty()) return load_run_config(cl.config_path).out;
      throw ConfigError("--out or --config is required for '" + cl.command + "'");
    };
    if (cl.command == "simulate") return cmd_simulate(load(), ctx);
    if (cl.command == "run") return cmd_run(load(), ctx);
    if (cl.command == "aggregate") return cmd_aggregate(out_dir(), ctx);
    if (cl.command == "report")
      return cmd_report(out_dir(), cl.report_kind, parse_group_by(cl.group_by), parse_strategy(cl.strategy), ctx);
    if (cl.command == "list-algorithms") return cmd_list_algorithms(ctx);
    throw ConfigError("unknown command '" + cl.command + "'");
  } catch (const ConfigError& e) {
    ctx.err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    ctx.err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace causalbench
