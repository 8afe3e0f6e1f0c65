#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causalbench/cli/commands.hpp"

using namespace causalbench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("causalbench_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

const char* kFullGrid = R"({
  "settings": [{"graph_type": ["ER", "SF"], "graph_p": [10, 20, 50], "graph_d": [1, 4],
                "data_n": [200, 1000], "data_sem": ["gumbel", "gp"]}],
  "paper_grids": true
})";

std::string tiny_config(const fs::path& out) {
  return R"({"settings": [{"graph_type": "ER", "graph_p": 5, "graph_d": 1, "data_n": 200, "data_sem": "gumbel",
                "seeds": [0, 1]}],
             "algorithms": {"pc": {"grid": {"alpha": [0.01, 0.05, 0.1]}, "include_default": false}},
             "out": ")" + out.string() + "\"}";
}

// Tag balance of an SVG document: every opened element is closed in order.
bool balanced_xml(const std::string& s) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    if (j == std::string::npos) return false;
    const std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;
    const std::string name = tag.substr(tag[0] == '/', tag.find_first_of(" \t\n") - (tag[0] == '/'));
    if (tag[0] == '/') {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  return stack.empty();
}

}  // namespace

TEST(Config, SerializeRoundTripIsIdentity) {
  const auto c = parse_run_config_text(kFullGrid);
  const auto again = parse_run_config(serialize(c));
  EXPECT_EQ(again, c);
  EXPECT_EQ(serialize(again).dump(), serialize(c).dump());
  EXPECT_EQ(config_hash(again), config_hash(c));
}

TEST(Config, FullGridConfigEnumerates480Pairs) {
  const auto c = parse_run_config_text(kFullGrid);
  EXPECT_EQ(c.settings.size(), 48u);
  std::size_t pairs = 0;
  for (const auto& s : c.settings) pairs += s.seeds.size();
  EXPECT_EQ(pairs, 480u);
  EXPECT_EQ(c.algorithms.size(), Registry::reference_algorithms().size());
  EXPECT_EQ(c.programs().size(), Registry::reference_algorithms().size());
}

TEST(Config, ErrorsNameTheOffendingKey) {
  try {
    parse_run_config_text(R"({"settings": [], "bogus_key": 1})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
  }
  try {
    parse_run_config_text(R"({"settings": [{"graph_type": "ER", "graph_p": 5, "graph_d": 1, "data_n": 10,
                              "data_sem": "gumbel", "colour": 1}], "paper_grids": true})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  EXPECT_THROW(parse_run_config_text(R"({"settings": [{"graph_type": "ER", "graph_p": 5, "graph_d": 1,
      "data_n": 10, "data_sem": "gumbel"}], "algorithms": {"pc": {"grid": {"alpha": [-1]}}}})"),
               ConfigError);
  EXPECT_THROW(parse_run_config_text(R"({"settings": [{"graph_type": "ER", "graph_p": 5, "graph_d": 1,
      "data_n": 10, "data_sem": "gumbel"}], "algorithms": {"nope": true}})"),
               ConfigError);
  EXPECT_THROW(parse_run_config_text("{not json"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  const fs::path dir = fs::path(CAUSALBENCH_SOURCE_DIR) / "configs";
  std::map<std::string, std::size_t> settings;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto c = load_run_config(e.path().string());
    settings[e.path().filename().string()] = c.settings.size();
  }
  EXPECT_EQ(settings.at("paper_grids.json"), 50u);
  EXPECT_EQ(settings.at("desk.json"), 2u);
  EXPECT_EQ(settings.at("tiny.json"), 1u);
  EXPECT_EQ(settings.at("sachs.json"), 1u);
}

TEST(Config, HashIgnoresWorkersAndOut) {
  auto a = parse_run_config_text(kFullGrid);
  auto b = a;
  b.workers = 8;
  b.out = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.standardize = true;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Commands, SimulateWritesPairsAndIsReproducible) {
  const auto dir = scratch("simulate");
  const std::string cfg = R"({"settings": [{"graph_type": ["ER", "SF"], "graph_p": 5, "graph_d": 1,
      "data_n": 50, "data_sem": ["gumbel", "gp"], "seeds": {"count": 2}}], "paper_grids": ["pc"],
      "seed_policy": {"env_offset": false}, "out": ")" + (dir / "a").string() + "\"}";
  auto c = parse_run_config_text(cfg);
  std::ostringstream out, err;
  ASSERT_EQ(cmd_simulate(c, {out, err}), kExitOk);
  EXPECT_NE(out.str().find("wrote 8 dataset pairs"), std::string::npos);
  c.out = (dir / "b").string();
  ASSERT_EQ(cmd_simulate(c, {out, err}), kExitOk);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a" / "data")) {
    if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
    const auto rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / rel)) << rel;
    ++files;
  }
  EXPECT_EQ(files, 16u);
}

TEST(Commands, TinyRunAggregateAndReports) {
  const auto dir = scratch("tiny");
  const auto cfg = write_config(dir, tiny_config(dir / "out"));
  std::ostringstream out, err;
  CommandLine cl;
  cl.command = "run";
  cl.config_path = cfg;
  ASSERT_EQ(run_command(cl, {out, err}), kExitOk) << err.str();
  EXPECT_EQ(load_results(results_path((dir / "out").string())).size(), 6u);
  // Rerun resumes everything.
  std::ostringstream out2;
  ASSERT_EQ(run_command(cl, {out2, err}), kExitOk);
  EXPECT_NE(out2.str().find("computed 0"), std::string::npos) << out2.str();

  cl.command = "aggregate";
  ASSERT_EQ(run_command(cl, {out, err}), kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "out" / "aggregate" / "strategies.csv"));

  for (const auto& kind : report_kinds()) {
    cl.command = "report";
    cl.report_kind = kind;
    cl.group_by = "graph_p";
    ASSERT_EQ(run_command(cl, {out, err}), kExitOk) << kind << ": " << err.str();
  }
  for (const auto& e : fs::directory_iterator(dir / "out" / "report"))
    if (e.path().extension() == ".svg") EXPECT_TRUE(balanced_xml(slurp(e.path()))) << e.path();

  // The winners CSV agrees with winning_percentages on the same store.
  const auto report = report_for((dir / "out").string());
  const auto w = winning_percentages(report, {"graph_p"}, Strategy::Best);
  const auto csv = slurp(dir / "out" / "report" / "winners_best.csv");
  for (const auto& [g, pct] : w.percent)
    for (const auto& [a, v] : pct)
      EXPECT_NE(csv.find(g + "," + a + "," + format_param(v)), std::string::npos) << csv;
}

TEST(Commands, RunRefusesMismatchedManifest) {
  const auto dir = scratch("mismatch");
  const auto cfg = write_config(dir, tiny_config(dir / "out"));
  std::ostringstream out, err;
  CommandLine cl{"run", cfg, "", std::nullopt, "", "best", ""};
  ASSERT_EQ(run_command(cl, {out, err}), kExitOk);
  auto c = load_run_config(cfg);
  c.standardize = true;
  EXPECT_THROW(cmd_run(c, {out, err}), ConfigError);
}

TEST(Commands, MalformedConfigExitsOneNamingKey) {
  const auto dir = scratch("malformed");
  const auto cfg = write_config(dir, R"({"settings": [], "workerz": 2})");
  std::ostringstream out, err;
  CommandLine cl{"run", cfg, "", std::nullopt, "", "best", ""};
  EXPECT_EQ(run_command(cl, {out, err}), kExitConfig);
  EXPECT_NE(err.str().find("workerz"), std::string::npos);
  cl.config_path = (dir / "missing.json").string();
  EXPECT_EQ(run_command(cl, {out, err}), kExitConfig);
}

TEST(Commands, PartialFailuresExitTwo) {
  const auto dir = scratch("partial");
  const auto cfg = write_config(dir, R"({"settings": [{"graph_type": "ER", "graph_p": 5, "graph_d": 1,
      "data_n": 3, "data_sem": "gumbel", "seeds": [0]}], "algorithms": {"pc": {"grid": {"alpha": [0.01]}}},
      "out": ")" + (dir / "out").string() + "\"}");
  std::ostringstream out, err;
  CommandLine cl{"run", cfg, "", std::nullopt, "", "best", ""};
  EXPECT_EQ(run_command(cl, {out, err}), kExitPartial);
}

TEST(Commands, ListAlgorithmsIsJson) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_list_algorithms({out, err}), kExitOk);
  const auto j = nlohmann::ordered_json::parse(out.str());
  EXPECT_EQ(j.size(), Registry::instance().names().size());
}

TEST(Binary, ExitCodesFromTheExecutable) {
  const std::string bin = CAUSALBENCH_CLI_PATH;
  ASSERT_TRUE(fs::exists(bin));
  const auto dir = scratch("binary");
  const auto cfg = write_config(dir, tiny_config(dir / "out"));
  auto run = [&](const std::string& args) {
    const int rc = std::system((bin + " " + args + " > " + (dir / "log.txt").string() + " 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  EXPECT_EQ(run("run --config " + cfg + " --workers 2"), 0);
  EXPECT_EQ(load_results(results_path((dir / "out").string())).size(), 6u);
  EXPECT_EQ(run("report winners --out " + (dir / "out").string() + " --group-by graph_p"), 0);
  EXPECT_EQ(run("frobnicate"), 1);
  const auto bad = write_config(dir, R"({"settingz": []})");
  EXPECT_EQ(run("run --config " + bad), 1);
  EXPECT_NE(slurp(dir / "log.txt").find("settingz"), std::string::npos);
}
