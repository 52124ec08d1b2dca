#include "adsv/verdict.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "adsv/error.hpp"
#include "adsv/rules.hpp"
#include "json_util.hpp"

namespace adsv {

using detail::json;
using detail::ObjectReader;

std::string_view to_string(Overall o) noexcept {
  switch (o) {
    case Overall::Pass: return "PASS";
    case Overall::Fail: return "FAIL";
    case Overall::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::optional<Overall> overall_from_string(std::string_view s) noexcept {
  if (s == "PASS") return Overall::Pass;
  if (s == "FAIL") return Overall::Fail;
  if (s == "INCONCLUSIVE") return Overall::Inconclusive;
  return std::nullopt;
}

Overall overall_status(bool any_prescriptive_failure,
                       const std::map<std::string, std::vector<LevelDecision>>& per_functional,
                       DecisionPolicy policy) {
  if (any_prescriptive_failure) return Overall::Fail;
  bool all_safe = true;
  for (const auto& [id, decisions] : per_functional) {
    for (const auto& d : decisions) {
      if (d.status == LevelStatus::ProvenUnsafe) return Overall::Fail;
      if (d.status != LevelStatus::NotApplicable && d.status != LevelStatus::ProvenSafe) {
        all_safe = false;
      }
    }
  }
  if (policy == DecisionPolicy::Permissive || all_safe) return Overall::Pass;
  return Overall::Inconclusive;
}

std::map<std::string, std::vector<LevelDecision>> decide_all(
    std::span<const FunctionalScenario> functional,
    const std::map<std::string, FunctionalTally>& tallies, const RiskPolicy& policy) {
  std::map<std::string, std::vector<LevelDecision>> out;
  static const FunctionalTally kEmpty{};
  for (const auto& fs : functional) {
    auto it = tallies.find(fs.id);
    const FunctionalTally& t = it == tallies.end() ? kEmpty : it->second;
    out[fs.id] = decide_functional(t.counts, t.n_tests, fs, policy);
  }
  return out;
}

CampaignResult aggregate_runs(std::span<const FunctionalScenario> functional,
                              std::vector<RunRecord> runs, const RiskPolicy& policy) {
  policy.validate();
  CampaignResult r;
  r.decision_policy = policy.decision_policy;
  std::sort(runs.begin(), runs.end(),
            [](const RunRecord& a, const RunRecord& b) { return a.concrete_id < b.concrete_id; });

  std::map<std::string, FunctionalTally> tallies;
  for (const auto& fs : functional) tallies[fs.id];
  for (const auto& run : runs) {
    auto it = tallies.find(run.functional_id);
    if (it == tallies.end()) {
      throw DataError("run '" + run.concrete_id + "' names unknown functional scenario '" +
                      run.functional_id + "'");
    }
    if (const auto* fail = std::get_if<PrescriptiveFailure>(&run.outcome)) {
      r.prescriptive_failures.emplace_back(run.concrete_id, fail->violated_rules);
      continue;
    }
    ++it->second.n_tests;
    it->second.counts.add(std::get<Scored>(run.outcome).severity);
  }

  r.per_functional = decide_all(functional, tallies, policy);
  r.overall = overall_status(!r.prescriptive_failures.empty(), r.per_functional,
                             policy.decision_policy);
  r.per_run = std::move(runs);
  return r;
}

CampaignResult evaluate_campaign(const Catalogue& catalogue,
                                 std::span<const ConcreteScenario> concretes,
                                 const TraceProvider& traces, const RiskPolicy& policy,
                                 const CampaignOptions& options) {
  policy.validate();

  struct Job {
    const ConcreteScenario* cs;
    const LogicalScenario* ls;
    const FunctionalScenario* fs;
    const rules::RuleSet* rs;
  };
  std::vector<Job> jobs;
  jobs.reserve(concretes.size());
  for (const auto& cs : concretes) {
    const LogicalScenario* ls = catalogue.find_logical(cs.logical_id);
    if (!ls) {
      throw DataError("concrete '" + cs.id + "': unknown logical scenario '" + cs.logical_id + "'");
    }
    const rules::RuleSet* rs = catalogue.ruleset_for(*ls);
    if (!rs) throw DataError("logical[" + ls->id + "]: ruleset '" + ls->ruleset_ref + "' not loaded");
    for (const auto& issue : validate_concrete(*ls, cs)) {
      if (issue.level == Issue::Level::Error) {
        throw DataError(issue.location + ": " + issue.message);
      }
    }
    const FunctionalScenario* fs = catalogue.find_functional(ls->functional_id);
    if (!fs) throw DataError("logical[" + ls->id + "]: unknown functional scenario");
    jobs.push_back({&cs, ls, fs, rs});
  }

  std::vector<RunRecord> records(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      try {
        const Trace tr = traces(*j.cs, *j.ls);
        records[i] = RunRecord{j.cs->id, j.fs->id, rules::evaluate_rules(*j.rs, tr, *j.cs, *j.fs)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  unsigned n_threads = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(1, jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
  }
  // Report the failure of the first run in input order, independent of
  // scheduling.
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return aggregate_runs(catalogue.functional, std::move(records), policy);
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional_number(ObjectReader& r, std::string_view key) {
  const json& v = r.required(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) r.fail(key, "expected a number or null");
  return v.get<double>();
}

}  // namespace

std::string report_json(const CampaignResult& r) {
  json doc = json::object();
  doc["version"] = 1;
  doc["overall"] = std::string(to_string(r.overall));
  doc["decision_policy"] =
      r.decision_policy == DecisionPolicy::Permissive ? "permissive" : "strict";

  json failures = json::array();
  for (const auto& [id, rules] : r.prescriptive_failures) {
    failures.push_back({{"concrete_id", id}, {"violated_rules", rules}});
  }
  doc["prescriptive_failures"] = std::move(failures);

  json per_functional = json::object();
  for (const auto& [fid, decisions] : r.per_functional) {
    json arr = json::array();
    for (const auto& d : decisions) {
      arr.push_back({{"level", std::string(to_string(d.level))},
                     {"n_tests", d.n_tests},
                     {"k_events", d.k_events},
                     {"l_acceptable", optional_number(d.l_acceptable)},
                     {"p_value_ha", optional_number(d.p_value_ha)},
                     {"p_value_hb", optional_number(d.p_value_hb)},
                     {"l_actual", d.l_actual},
                     {"l_upper", d.l_upper},
                     {"status", std::string(to_string(d.status))}});
    }
    per_functional[fid] = std::move(arr);
  }
  doc["per_functional"] = std::move(per_functional);

  json per_run = json::array();
  for (const auto& run : r.per_run) {
    json o = json::object();
    if (const auto* f = std::get_if<PrescriptiveFailure>(&run.outcome)) {
      o["kind"] = "prescriptive_failure";
      o["violated_rules"] = f->violated_rules;
    } else {
      o["kind"] = "scored";
      o["severity"] = std::string(to_string(std::get<Scored>(run.outcome).severity));
    }
    per_run.push_back(
        {{"concrete_id", run.concrete_id}, {"functional_id", run.functional_id}, {"outcome", o}});
  }
  doc["per_run"] = std::move(per_run);
  return doc.dump(2) + "\n";
}

CampaignResult parse_report(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "report.json");
  ObjectReader r(doc, "report");
  if (r.unsigned_integer("version") != 1) r.fail("version", "unsupported version");
  CampaignResult out;

  auto overall = overall_from_string(r.string("overall"));
  if (!overall) r.fail("overall", "unknown status");
  out.overall = *overall;
  const std::string dp = r.string("decision_policy");
  if (dp != "permissive" && dp != "strict") r.fail("decision_policy", "unknown policy");
  out.decision_policy = dp == "permissive" ? DecisionPolicy::Permissive : DecisionPolicy::Strict;

  const json& failures = r.array("prescriptive_failures");
  for (std::size_t i = 0; i < failures.size(); ++i) {
    ObjectReader f(failures[i], "report.prescriptive_failures[" + std::to_string(i) + "]");
    std::string id = f.string("concrete_id");
    std::vector<std::string> rules = f.array("violated_rules").get<std::vector<std::string>>();
    f.finish();
    out.prescriptive_failures.emplace_back(std::move(id), std::move(rules));
  }

  const json& per_functional = r.object("per_functional");
  for (auto it = per_functional.begin(); it != per_functional.end(); ++it) {
    std::vector<LevelDecision> decisions;
    for (std::size_t i = 0; i < it->size(); ++i) {
      ObjectReader d((*it)[i], "report.per_functional." + it.key() + "[" + std::to_string(i) + "]");
      LevelDecision ld;
      auto level = severity_from_string(d.string("level"));
      if (!level) d.fail("level", "unknown level");
      ld.level = *level;
      ld.n_tests = d.unsigned_integer("n_tests");
      ld.k_events = d.unsigned_integer("k_events");
      ld.l_acceptable = read_optional_number(d, "l_acceptable");
      ld.p_value_ha = read_optional_number(d, "p_value_ha");
      ld.p_value_hb = read_optional_number(d, "p_value_hb");
      ld.l_actual = d.number("l_actual");
      ld.l_upper = d.number("l_upper");
      auto status = level_status_from_string(d.string("status"));
      if (!status) d.fail("status", "unknown status");
      ld.status = *status;
      d.finish();
      decisions.push_back(ld);
    }
    out.per_functional[it.key()] = std::move(decisions);
  }

  const json& per_run = r.array("per_run");
  for (std::size_t i = 0; i < per_run.size(); ++i) {
    const std::string path = "report.per_run[" + std::to_string(i) + "]";
    ObjectReader p(per_run[i], path);
    RunRecord rec;
    rec.concrete_id = p.string("concrete_id");
    rec.functional_id = p.string("functional_id");
    ObjectReader o(p.object("outcome"), path + ".outcome");
    const std::string kind = o.string("kind");
    if (kind == "prescriptive_failure") {
      rec.outcome = PrescriptiveFailure{o.array("violated_rules").get<std::vector<std::string>>()};
    } else if (kind == "scored") {
      auto sev = severity_from_string(o.string("severity"));
      if (!sev) o.fail("severity", "unknown level");
      rec.outcome = Scored{*sev};
    } else {
      o.fail("kind", "unknown outcome kind");
    }
    o.finish();
    p.finish();
    out.per_run.push_back(std::move(rec));
  }
  r.finish();
  return out;
}

void write_report(const CampaignResult& r, const std::string& path) {
  detail::write_file(path, report_json(r));
}

}  // namespace adsv
