#include <benchmark/benchmark.h>

#include <string>

#include "crosscheck/fusion.hpp"
#include "crosscheck/logic/eval.hpp"
#include "crosscheck/logic/parser.hpp"
#include "crosscheck/noise.hpp"
#include "crosscheck/simulator.hpp"
#include "crosscheck/world_config.hpp"

namespace cc = crosscheck;

namespace {

std::string config_path(const char* name) {
  return std::string(CROSSCHECK_CONFIG_DIR) + "/" + name;
}

const cc::FrameLog& scenario_a_log() {
  static cc::FrameLog log = cc::run_scenario(cc::world_config_from_file(config_path("scenario_a.json")));
  return log;
}

// One augmented mid-scenario fact window, the unit of work the reasoner
// evaluates per frame.
const cc::FactSet& busy_window() {
  static cc::FactSet fs = [] {
    std::vector<cc::FactSet> windows = cc::extract_facts(scenario_a_log(), 1);
    windows = cc::augment_facts(windows, {});
    return windows[windows.size() / 2];
  }();
  return fs;
}

void BM_ParseStandardRules(benchmark::State& state) {
  std::string text = cc::standard_rules({});
  for (auto _ : state) benchmark::DoNotOptimize(cc::logic::parse_program(text));
}
BENCHMARK(BM_ParseStandardRules);

void BM_EvaluateFrameWindow(benchmark::State& state) {
  cc::logic::Program program = cc::logic::parse_program(cc::standard_rules({}));
  const cc::FactSet& fs = busy_window();
  for (auto _ : state) benchmark::DoNotOptimize(cc::logic::evaluate(program, fs));
}
BENCHMARK(BM_EvaluateFrameWindow);

void BM_SimulateSignalizedScenario(benchmark::State& state) {
  cc::WorldConfig wc = cc::world_config_from_file(config_path("scenario_a.json"));
  for (auto _ : state) benchmark::DoNotOptimize(cc::run_scenario(wc));
}
BENCHMARK(BM_SimulateSignalizedScenario);

void BM_CorruptLog(benchmark::State& state) {
  cc::NoiseConfig noise = cc::noise_config_from_file(config_path("noise_lights.json"));
  const cc::FrameLog& log = scenario_a_log();
  for (auto _ : state) benchmark::DoNotOptimize(cc::corrupt_log(log, noise));
}
BENCHMARK(BM_CorruptLog);

void BM_ReasonWholeLog(benchmark::State& state) {
  cc::logic::Program program = cc::logic::parse_program(cc::standard_rules({}));
  cc::NoiseConfig noise = cc::noise_config_from_file(config_path("noise_lights.json"));
  cc::FrameLog det = cc::corrupt_log(scenario_a_log(), noise);
  for (auto _ : state) benchmark::DoNotOptimize(cc::run_reasoner(det, program, {}));
}
BENCHMARK(BM_ReasonWholeLog);

} // namespace

BENCHMARK_MAIN();
