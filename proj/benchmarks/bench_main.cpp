#include <benchmark/benchmark.h>

#include <cstdint>

#include "adsv/catalogue.hpp"
#include "adsv/risk.hpp"
#include "adsv/rules.hpp"
#include "adsv/sampling.hpp"
#include "adsv/simkit.hpp"

using namespace adsv;

namespace {

LogicalScenario brake_scenario() {
  LogicalScenario ls;
  ls.id = "bench";
  ls.functional_id = "f";
  ls.parameters = {{"v", Uniform{15.0, 30.0}}, {"decel", TruncNormal{5.0, 1.5, 2.0, 9.0}},
                   {"t", Discrete{{{1.0, 0.5}, {2.0, 0.5}}}}};
  ls.scene_template.kind = SceneKind::LeadBrake;
  ls.scene_template.inputs = {{"ego_speed", std::string("v")},    {"lead_speed", std::string("v")},
                              {"initial_gap", 30.0},             {"lead_decel", std::string("decel")},
                              {"brake_time", std::string("t")}};
  return ls;
}

}  // namespace

static void BM_BinomialTailLeq(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(binomial_tail_leq(n, 3, 1e-7));
}
BENCHMARK(BM_BinomialTailLeq)->Arg(1'000)->Arg(10'000'000)->Arg(1'000'000'000);

static void BM_BinomialTailGeqLargeK(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(binomial_tail_geq(10'000'000, 200, 1e-5));
}
BENCHMARK(BM_BinomialTailGeqLargeK);

static void BM_RateUpperBound(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(rate_upper_bound(10'000'000, 4, 0.95));
}
BENCHMARK(BM_RateUpperBound);

static void BM_SampleConcrete(benchmark::State& state) {
  const auto ls = brake_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(sample_concrete(ls, 42, 1000));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SampleConcrete);

static void BM_Simulate(benchmark::State& state) {
  const auto ls = brake_scenario();
  const auto cs = sample_concrete(ls, 7, 1).front();
  sim::SimConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(cs, ls, cfg));
}
BENCHMARK(BM_Simulate);

static void BM_EvaluateRules(benchmark::State& state) {
  const auto ls = brake_scenario();
  const auto cs = sample_concrete(ls, 7, 1).front();
  const auto tr = sim::simulate(cs, ls, {});
  const auto rs = rules::parse_ruleset(
      "rule no_collision prescriptive assert never(collision(ego, lead) > 0)\n"
      "rule headway risk\n"
      "  severity S0 if eventually(ttc(ego, lead) < 1.5)\n"
      "  severity S1 if duration_where(gap(ego, lead) < 5) > 1\n");
  FunctionalScenario fs;
  fs.id = "f";
  fs.exposure = {Exposure::Kind::RatePerHour, 1.0, {}};
  for (auto _ : state) benchmark::DoNotOptimize(rules::evaluate_rules(rs, tr, cs, fs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tr.rows()));
}
BENCHMARK(BM_EvaluateRules);
BENCHMARK_MAIN();
