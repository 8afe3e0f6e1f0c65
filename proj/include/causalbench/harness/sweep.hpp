#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "causalbench/algorithms/registry.hpp"
#include "causalbench/harness/setting.hpp"
#include "causalbench/harness/store.hpp"
#include "causalbench/metrics/shd.hpp"

namespace causalbench {

/// The assignments swept for one algorithm.
struct AlgorithmPrograms {
  std::string algorithm;
  std::vector<HyperparameterAssignment> grid;
  std::optional<HyperparameterAssignment> default_assignment;  // evaluated too when outside the grid

  /// Grid followed by the default if it is not already a grid point.
  std::vector<HyperparameterAssignment> all() const {
    auto out = grid;
    if (default_assignment && std::find(grid.begin(), grid.end(), *default_assignment) == grid.end())
      out.push_back(*default_assignment);
    return out;
  }
};

/// Grid from the registry's declared values plus its default.
inline AlgorithmPrograms declared_programs(const std::string& algorithm) {
  const auto& space = Registry::instance().get(algorithm).space();
  return {algorithm, expand_grid(algorithm, declared_grid(space)), default_assignment(space)};
}

struct SweepOptions {
  int workers = 1;
  std::optional<std::string> store_path;
  bool standardize = false;
  std::uint64_t base_seed = 0;
  const std::atomic<bool>* stop = nullptr;
  std::function<void(const ResultRecord&)> on_record;
};

struct SweepResult {
  std::vector<ResultRecord> records;  // stored ones for these cells plus new ones
  int computed = 0;
  int skipped = 0;
  int failures = 0;
  bool interrupted = false;
};

/// Runs every (setting, seed, program) cell. Data is built once per
/// (setting, seed); assignments that differ only in post-fit parameters
/// share one fit, whose time is charged to each of them. Learner errors
/// become failed records. Cells already in the store are skipped.
inline SweepResult run_sweep(const std::vector<ExperimentSetting>& settings,
                             const std::vector<AlgorithmPrograms>& programs, const SweepOptions& opt = {}) {
  const auto& registry = Registry::instance();
  for (const auto& s : settings) s.validate();
  for (const auto& ap : programs) {
    const auto& space = registry.get(ap.algorithm).space();
    for (const auto& a : ap.all()) validate_assignment(space, a);
  }

  std::unique_ptr<ResultStore> store;
  if (opt.store_path) store = std::make_unique<ResultStore>(*opt.store_path);
  SweepResult result;

  struct Unit {
    std::size_t setting;
    int seed;
    const Learner* learner;
    std::vector<HyperparameterAssignment> assignments;  // same fit part
  };
  std::vector<Unit> units;
  std::map<std::string, const ResultRecord*> stored;
  if (store)
    for (const auto& r : store->existing()) stored[r.cell_key()] = &r;

  for (std::size_t si = 0; si < settings.size(); ++si)
    for (int seed : settings[si].seeds)
      for (const auto& ap : programs) {
        const Learner& learner = registry.get(ap.algorithm);
        std::vector<std::pair<HyperparameterAssignment, std::vector<HyperparameterAssignment>>> groups;
        for (const auto& a : ap.all()) {
          ResultRecord probe;
          probe.setting = settings[si].key;
          probe.seed = seed;
          probe.program.assignment = a;
          const auto it = stored.find(probe.cell_key());
          if (it != stored.end()) {
            result.records.push_back(*it->second);
            ++result.skipped;
            continue;
          }
          const auto fp = a.fit_part(learner.space());
          auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& e) { return e.first == fp; });
          if (g == groups.end()) groups.push_back({fp, {a}});
          else g->second.push_back(a);
        }
        for (auto& [fp, list] : groups) units.push_back({si, seed, &learner, std::move(list)});
      }

  // Datasets on demand, one per (setting, seed).
  std::mutex data_mu;
  std::map<std::pair<std::size_t, int>, std::shared_ptr<std::once_flag>> data_once;
  std::map<std::pair<std::size_t, int>, std::shared_ptr<Dataset>> data;
  std::map<std::pair<std::size_t, int>, std::string> data_error;
  std::map<std::pair<std::size_t, int>, int> data_uses;  // units still to run
  for (const auto& u : units) ++data_uses[{u.setting, u.seed}];
  auto release = [&](std::size_t si, int seed) {
    std::lock_guard<std::mutex> lock(data_mu);
    if (--data_uses[{si, seed}] == 0) data[{si, seed}].reset();
  };
  auto dataset_for = [&](std::size_t si, int seed) -> std::shared_ptr<Dataset> {
    std::shared_ptr<std::once_flag> flag;
    {
      std::lock_guard<std::mutex> lock(data_mu);
      auto& f = data_once[{si, seed}];
      if (!f) f = std::make_shared<std::once_flag>();
      flag = f;
    }
    std::call_once(*flag, [&] {
      std::shared_ptr<Dataset> ds;
      std::string err;
      try {
        ds = std::make_shared<Dataset>(make_setting_dataset(settings[si], seed, opt.base_seed, opt.standardize));
      } catch (const std::exception& e) {
        err = e.what();
      }
      std::lock_guard<std::mutex> lock(data_mu);
      data[{si, seed}] = ds;
      data_error[{si, seed}] = err;
    });
    std::lock_guard<std::mutex> lock(data_mu);
    if (!data[{si, seed}]) throw LoadError(data_error[{si, seed}]);
    return data[{si, seed}];
  };

  std::mutex out_mu;
  auto emit = [&](ResultRecord&& r) {
    for (char& c : r.status)
      if (c == '\n' || c == '\r') c = ' ';
    if (store) store->append(r);
    std::lock_guard<std::mutex> lock(out_mu);
    if (!r.ok()) ++result.failures;
    ++result.computed;
    if (opt.on_record) opt.on_record(r);
    result.records.push_back(std::move(r));
  };

  auto run_unit = [&](const Unit& u) {
    const auto& setting = settings[u.setting];
    auto base_record = [&](const HyperparameterAssignment& a) {
      ResultRecord r;
      r.setting = setting.key;
      r.seed = u.seed;
      r.program.assignment = a;
      return r;
    };
    auto fail_all = [&](const std::string& msg, long long ms) {
      for (const auto& a : u.assignments) {
        auto r = base_record(a);
        r.status = "error: " + msg;
        r.runtime_ms = ms;
        emit(std::move(r));
      }
    };
    std::shared_ptr<Dataset> ds;
    try {
      ds = dataset_for(u.setting, u.seed);
    } catch (const std::exception& e) {
      fail_all(std::string("data: ") + e.what(), 0);
      return;
    }
    const auto t0 = std::chrono::steady_clock::now();
    std::shared_ptr<const FitState> state;
    try {
      state = u.learner->fit(*ds, u.assignments.front());
    } catch (const std::exception& e) {
      const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      fail_all(e.what(), std::llround(ms));
      return;
    }
    const double fit_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& a : u.assignments) {
      auto r = base_record(a);
      const auto t1 = std::chrono::steady_clock::now();
      try {
        LearnOutcome out = u.learner->finalize(*state, *ds, a);
        for (const auto& [k, v] : state->diagnostics) out.diagnostics.emplace(k, v);
        r.shd = shd(*ds->truth, out.graph);
        r.diagnostics = std::move(out.diagnostics);
      } catch (const std::exception& e) {
        r.status = std::string("error: ") + e.what();
      }
      const double ms = fit_ms + std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t1).count();
      r.runtime_ms = std::llround(ms);
      r.diagnostics["runtime_ms"] = ms;
      emit(std::move(r));
    }
  };

  std::atomic<std::size_t> next{0};
  std::atomic<bool> interrupted{false};
  auto worker = [&] {
    while (true) {
      if (opt.stop && opt.stop->load()) {
        interrupted = true;
        return;
      }
      const std::size_t i = next++;
      if (i >= units.size()) return;
      run_unit(units[i]);
      release(units[i].setting, units[i].seed);
    }
  };
  const int workers = std::max(1, opt.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  result.interrupted = interrupted;
  return result;
}

}  // namespace causalbench
