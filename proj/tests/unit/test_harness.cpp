#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "causalbench/harness/strategies.hpp"
#include "causalbench/harness/sweep.hpp"

using namespace causalbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("causalbench_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentSetting er_setting(int p, int n) {
  ExperimentSetting s;
  s.key = SettingKey{"ER", p, 1.0, n, "gumbel", ""};
  s.seeds = {0, 1};
  return s;
}

AlgorithmPrograms pc_programs(std::vector<double> alphas) {
  return {"pc", expand_grid("pc", {{"alpha", alphas}}), std::nullopt};
}

std::string strip_runtime(ResultRecord r) {
  r.runtime_ms = 0;
  return to_csv_row(r);
}

std::multiset<std::string> stripped(const std::vector<ResultRecord>& rs) {
  std::multiset<std::string> out;
  for (const auto& r : rs) out.insert(strip_runtime(r));
  return out;
}

// Synthetic records for strategy tests: one algorithm "x" with parameter a.
HyperparameterAssignment xa(double a) { return {"x", {{"a", a}}}; }

ResultRecord rec(const SettingKey& k, int seed, const std::string& alg, double a, std::optional<double> shd) {
  ResultRecord r;
  r.setting = k;
  r.seed = seed;
  r.program.assignment = {alg, {{"a", a}}};
  r.shd = shd;
  if (!shd) r.status = "error: boom";
  return r;
}

StrategyInputs inputs_for(const std::string& alg, std::vector<double> grid, std::optional<double> def) {
  StrategyInputs in;
  for (double a : grid) in.grid_ids.insert(HyperparameterAssignment{alg, {{"a", a}}}.id());
  if (def) in.default_id = HyperparameterAssignment{alg, {{"a", *def}}}.id();
  return in;
}

SettingKey key(int p) { return SettingKey{"ER", p, 1.0, 100, "gumbel", ""}; }

}  // namespace

TEST(Store, CsvRoundTripWithEscaping) {
  ResultRecord a;
  a.setting = SettingKey{"ER", 10, 1.0, 1000, "gumbel", ""};
  a.seed = 3;
  a.program.assignment = {"pc", {{"alpha", 0.01}}};
  a.shd = 4;
  a.runtime_ms = 12;
  ResultRecord b = a;
  b.setting = SettingKey{"", 0, 0.0, 0, "", "sachs"};
  b.shd.reset();
  b.status = "error: bad \"quote\", comma";
  const std::string text = result_csv_header() + to_csv_row(a) + to_csv_row(b);
  const auto back = parse_results_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(to_csv_row(back[0]), to_csv_row(a));
  EXPECT_EQ(to_csv_row(back[1]), to_csv_row(b));
  EXPECT_EQ(back[1].status, b.status);
  EXPECT_FALSE(back[1].ok());
  EXPECT_EQ(detail::csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(detail::csv_escape("q\"q"), "\"q\"\"q\"");
  EXPECT_EQ(detail::csv_escape("plain"), "plain");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "graph_p,graph_d,graph_type,data_n,data_sem,dataset_ref,seed,algorithm,assignment_id,params_json,shd,"
            "runtime_ms,status");
}

TEST(Store, RejectsMalformedRows) {
  EXPECT_THROW(parse_results_csv(result_csv_header() + "1,2,3\n"), ParseError);
  EXPECT_THROW(parse_results_csv("wrong,header\n"), ParseError);
}

TEST(Sweep, CardinalityIsSettingsTimesSeedsTimesGrid) {
  const auto r = run_sweep({er_setting(5, 200)}, {pc_programs({0.01, 0.05, 0.1})});
  EXPECT_EQ(r.records.size(), 6u);
  EXPECT_EQ(r.computed, 6);
  EXPECT_EQ(r.failures, 0);
  std::set<std::string> keys;
  for (const auto& rec : r.records) keys.insert(rec.cell_key());
  EXPECT_EQ(keys.size(), 6u);
}

TEST(Sweep, DefaultOutsideGridIsAddedOnce) {
  auto prog = declared_programs("fges");
  EXPECT_EQ(prog.all().size(), 9u);
  auto pc = declared_programs("pc");
  EXPECT_EQ(pc.all().size(), 10u);  // default 0.01 is a grid point
}

TEST(Sweep, ResumeReproducesIdenticalRows) {
  const auto dir = scratch("resume");
  const auto full = (dir / "full.csv").string();
  const std::vector<ExperimentSetting> settings{er_setting(5, 200), er_setting(6, 150)};
  const std::vector<AlgorithmPrograms> programs{pc_programs({0.01, 0.1}), declared_programs("lingam")};
  SweepOptions opt;
  opt.store_path = full;
  const auto first = run_sweep(settings, programs, opt);
  EXPECT_EQ(first.records.size(), 2u * 2u * (2u + 20u));

  // Keep the header and the first half of the rows, then resume.
  std::ifstream in(full);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  const auto half = (dir / "half.csv").string();
  std::ofstream out(half);
  const std::size_t keep = 1 + (lines.size() - 1) / 2;
  for (std::size_t i = 0; i < keep; ++i) out << lines[i] << "\n";
  out.close();
  opt.store_path = half;
  const auto resumed = run_sweep(settings, programs, opt);
  EXPECT_EQ(resumed.skipped, static_cast<int>(keep - 1));
  EXPECT_EQ(resumed.computed, static_cast<int>(lines.size() - keep));
  EXPECT_EQ(stripped(load_results(half)), stripped(load_results(full)));
  // A third run has nothing to do.
  const auto again = run_sweep(settings, programs, opt);
  EXPECT_EQ(again.computed, 0);
}

TEST(Sweep, WorkerCountDoesNotChangeResults) {
  const std::vector<ExperimentSetting> settings{er_setting(5, 200)};
  const std::vector<AlgorithmPrograms> programs{pc_programs({0.01, 0.1}), declared_programs("fges")};
  SweepOptions one, four;
  four.workers = 4;
  EXPECT_EQ(stripped(run_sweep(settings, programs, one).records), stripped(run_sweep(settings, programs, four).records));
}

TEST(Sweep, LearnerErrorsBecomeFailedRecords) {
  const auto r = run_sweep({er_setting(5, 3)}, {pc_programs({0.01, 0.1})});
  EXPECT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.failures, 4);
  for (const auto& rec : r.records) {
    EXPECT_FALSE(rec.ok());
    EXPECT_EQ(rec.status.rfind("error: ", 0), 0u);
  }
}

TEST(Sweep, StopFlagInterrupts) {
  std::atomic<bool> stop{true};
  SweepOptions opt;
  opt.stop = &stop;
  const auto r = run_sweep({er_setting(5, 200)}, {pc_programs({0.01})}, opt);
  EXPECT_TRUE(r.interrupted);
  EXPECT_EQ(r.computed, 0);
}

TEST(Strategies, DegenerateGridCollapsesAllStrategies) {
  std::vector<ResultRecord> rs;
  for (int s = 0; s < 3; ++s) rs.push_back(rec(key(5), s, "x", 1, 2.0 + s));
  const auto rep = select_strategies(rs, {{"x", inputs_for("x", {1}, 1)}});
  ASSERT_EQ(rep.rows.size(), 1u);
  const auto& c = rep.rows[0].cells;
  for (auto st : all_strategies()) {
    ASSERT_TRUE(c.count(st));
    EXPECT_DOUBLE_EQ(c.at(st).mean, 3.0);
  }
  EXPECT_DOUBLE_EQ(c.at(Strategy::Best).se, 1.0 / std::sqrt(3.0));
}

TEST(Strategies, HandComputedSelections) {
  // Setting p5: a=1 -> {1,3} mean 2, a=2 -> {4,4} mean 4, a=3 -> {0,2} mean 1.
  // Setting p6: a=1 -> mean 1, a=2 -> mean 5, a=3 -> mean 4.
  // Mean of means: a=1 1.5, a=2 4.5, a=3 2.5, so SIM_MEAN picks a=1.
  std::vector<ResultRecord> rs;
  auto add = [&](int p, double a, double s0, double s1) {
    rs.push_back(rec(key(p), 0, "x", a, s0));
    rs.push_back(rec(key(p), 1, "x", a, s1));
  };
  add(5, 1, 1, 3);
  add(5, 2, 4, 4);
  add(5, 3, 0, 2);
  add(6, 1, 1, 1);
  add(6, 2, 5, 5);
  add(6, 3, 3, 5);
  const auto rep = select_strategies(rs, {{"x", inputs_for("x", {1, 2, 3}, 2)}});
  EXPECT_EQ(rep.sim_mean_ids.at("x"), xa(1).id());
  const auto* r5 = rep.find(key(5), "x");
  ASSERT_NE(r5, nullptr);
  EXPECT_DOUBLE_EQ(r5->cells.at(Strategy::Best).mean, 1.0);
  EXPECT_EQ(r5->cells.at(Strategy::Best).assignment_id, xa(3).id());
  EXPECT_DOUBLE_EQ(r5->cells.at(Strategy::Worst).mean, 4.0);
  EXPECT_DOUBLE_EQ(r5->cells.at(Strategy::Default).mean, 4.0);
  EXPECT_DOUBLE_EQ(r5->cells.at(Strategy::SimMean).mean, 2.0);
  const auto gaps = robustness_gaps(rep);
  ASSERT_EQ(gaps.size(), 4u);
  for (const auto& g : gaps)
    if (g.setting == key(5) && g.fixed == Strategy::SimMean) {
      EXPECT_DOUBLE_EQ(g.best_minus_fixed, 1.0);
      EXPECT_DOUBLE_EQ(g.fixed_minus_worst, 2.0);
    }
}

TEST(Strategies, OrderingInvariantsOnRandomStores) {
  SplitMix64 rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<ResultRecord> rs;
    for (int p : {5, 6, 7})
      for (double a : {1, 2, 3, 4})
        for (int s = 0; s < 3; ++s) rs.push_back(rec(key(p), s, "x", a, static_cast<double>(rng.below(10))));
    const auto rep = select_strategies(rs, {{"x", inputs_for("x", {1, 2, 3, 4}, 4)}});
    for (const auto& row : rep.rows) {
      const double b = row.cells.at(Strategy::Best).mean, w = row.cells.at(Strategy::Worst).mean;
      for (auto st : {Strategy::Default, Strategy::SimMean}) {
        EXPECT_LE(b, row.cells.at(st).mean);
        EXPECT_LE(row.cells.at(st).mean, w);
      }
    }
    // Shuffled input gives the same report.
    auto shuffled = rs;
    for (std::size_t i = shuffled.size() - 1; i > 0; --i) std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
    const auto rep2 = select_strategies(shuffled, {{"x", inputs_for("x", {1, 2, 3, 4}, 4)}});
    ASSERT_EQ(rep2.rows.size(), rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i)
      for (auto st : all_strategies())
        EXPECT_EQ(rep.rows[i].cells.at(st).assignment_id, rep2.rows[i].cells.at(st).assignment_id);
  }
}

TEST(Strategies, FailedRecordsAreExcludedAndCounted) {
  std::vector<ResultRecord> rs{rec(key(5), 0, "x", 1, 2.0), rec(key(5), 1, "x", 1, std::nullopt),
                               rec(key(5), 0, "x", 2, 5.0), rec(key(5), 1, "x", 2, 7.0)};
  const auto rep = select_strategies(rs, {{"x", inputs_for("x", {1, 2}, std::nullopt)}});
  EXPECT_EQ(rep.failures.at("x"), 1);
  EXPECT_DOUBLE_EQ(rep.rows[0].cells.at(Strategy::Best).mean, 2.0);
  EXPECT_EQ(rep.rows[0].cells.at(Strategy::Best).values.size(), 1u);
}

TEST(Strategies, MissingCellsRaiseCoverageError) {
  std::vector<ResultRecord> rs{rec(key(5), 0, "x", 1, 2.0), rec(key(5), 1, "x", 1, 2.0),
                               rec(key(5), 0, "x", 2, 5.0)};
  EXPECT_THROW(select_strategies(rs, {{"x", inputs_for("x", {1, 2}, std::nullopt)}}), CoverageError);
}

TEST(WinningPercentages, FractionalTiesAndSums) {
  // Three settings, algorithms y and z (each one grid point).
  // p5: y 1, z 1 (tie) ; p6: y 0, z 2 ; p7: y 3, z 2.
  std::vector<ResultRecord> rs;
  auto add = [&](int p, const std::string& alg, double v) { rs.push_back(rec(key(p), 0, alg, 1, v)); };
  add(5, "y", 1);
  add(5, "z", 1);
  add(6, "y", 0);
  add(6, "z", 2);
  add(7, "y", 3);
  add(7, "z", 2);
  const std::map<std::string, StrategyInputs> in{{"y", inputs_for("y", {1}, 1)}, {"z", inputs_for("z", {1}, 1)}};
  const auto rep = select_strategies(rs, in);
  const auto t = winning_percentages(rep, {"graph_type"}, Strategy::Best);
  ASSERT_EQ(t.percent.size(), 1u);
  const auto& pct = t.percent.begin()->second;
  EXPECT_NEAR(pct.at("y"), 50.0, 1e-12);
  EXPECT_NEAR(pct.at("z"), 50.0, 1e-12);
  EXPECT_EQ(t.cells.begin()->second, 3);

  const auto byp = winning_percentages(rep, {"graph_p"}, Strategy::Best);
  EXPECT_EQ(byp.percent.size(), 3u);
  for (const auto& [label, m] : byp.percent) {
    double sum = 0;
    for (const auto& [a, v] : m) sum += v;
    EXPECT_NEAR(sum, 100.0, 1e-9) << label;
  }

  const auto recs = recommend(rep, Strategy::Best);
  ASSERT_EQ(recs.size(), 3u);
  for (const auto& r : recs) {
    if (r.cell.find("5") != std::string::npos) {
      ASSERT_EQ(r.ranked.size(), 2u);
      EXPECT_EQ(r.ranked[0].first, "y");  // tie broken by name
    }
  }
}

TEST(Grouping, LabelsAndParsing) {
  EXPECT_EQ(parse_group_by("graph_p,data_sem"), (std::vector<std::string>{"graph_p", "data_sem"}));
  EXPECT_THROW(parse_group_by("graph_q"), ConfigError);
  EXPECT_EQ(parse_strategy("sim_mean"), Strategy::SimMean);
  EXPECT_THROW(parse_strategy("median"), ConfigError);
  const auto a = group_label(key(5), {"graph_p"});
  const auto b = group_label(key(6), {"graph_p"});
  EXPECT_NE(a, b);
  EXPECT_EQ(group_label(key(5), {"graph_type"}), group_label(key(6), {"graph_type"}));
}
