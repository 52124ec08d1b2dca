#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "adsv/catalogue.hpp"
#include "adsv/error.hpp"
#include "adsv/risk.hpp"
#include "adsv/rules.hpp"
#include "adsv/sampling.hpp"
#include "adsv/simkit.hpp"
#include "adsv/trace.hpp"
#include "adsv/verdict.hpp"

namespace adsv::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed for " + p.string());
}

struct SampleArgs {
  std::string catalogue;
  std::uint64_t total = 0;
  std::uint64_t floor = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunArgs {
  std::string catalogue;
  std::string concrete_dir;
  std::string policy;
  bool sim = false;
  std::string traces;
  std::string out;
  unsigned jobs = 0;
  std::string controller = "idm_follower";
  std::vector<std::string> params;
  double dt = 0.05;
  double horizon = 20.0;
  std::string save_traces;
};

struct CheckArgs {
  std::string ruleset;
  std::vector<std::string> channels;
};

int cmd_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  const Catalogue cat = load_catalogue(a.catalogue);
  for (const auto& issue : validate_catalogue(cat)) {
    if (issue.level == Issue::Level::Warning) {
      err << "warning: " << issue.location << ": " << issue.message << "\n";
    }
  }
  const BudgetPlan plan = allocate_budget(cat, a.total, a.floor);
  const auto concretes = sample_campaign(cat, plan, a.seed);

  const fs::path root(a.out);
  const fs::path dir = root / "concrete";
  fs::create_directories(dir);
  std::set<std::string> written;
  for (const auto& cs : concretes) {
    const std::string name = cs.id + ".json";
    spit(dir / name, serialize_concrete(cs));
    written.insert(name);
  }
  // Leftovers from an earlier, larger campaign would leak into `run`.
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.path().extension() == ".json" && !written.contains(name)) fs::remove(entry.path());
  }
  spit(root / "budget.json", serialize_budget(plan));

  std::size_t width = 10;
  for (const auto& [id, n] : plan.allocations) width = std::max(width, id.size());
  out << std::left << std::setw(static_cast<int>(width)) << "functional" << "  tests\n";
  for (const auto& [id, n] : plan.allocations) {
    out << std::left << std::setw(static_cast<int>(width)) << id << "  " << n << "\n";
  }
  out << std::left << std::setw(static_cast<int>(width)) << "total" << "  " << plan.total << "\n";
  err << "wrote " << concretes.size() << " concrete scenarios to " << dir.string() << "\n";
  return kPass;
}

std::vector<ConcreteScenario> load_concretes(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("concrete directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no concrete scenario files in " + dir.string());
  std::vector<ConcreteScenario> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(parse_concrete(slurp(f)));
    } catch (const DataError& e) {
      throw DataError(f.string() + ": " + e.what());
    }
  }
  return out;
}

sim::SimConfig sim_config(const RunArgs& a) {
  sim::SimConfig cfg;
  auto kind = sim::controller_from_string(a.controller);
  if (!kind) throw UsageError("unknown controller '" + a.controller + "'");
  cfg.controller = *kind;
  cfg.dt = a.dt;
  cfg.horizon = a.horizon;
  for (const auto& kv : a.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string val = kv.substr(eq + 1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || ptr != val.data() + val.size()) {
      throw UsageError("--param " + key + ": not a number: '" + val + "'");
    }
    cfg.controller_params[key] = v;
  }
  try {
    cfg.validate();
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const Catalogue cat = load_catalogue(a.catalogue);
  const RiskPolicy policy = read_policy_file(a.policy);
  const auto concretes = load_concretes(a.concrete_dir);

  TraceProvider provider;
  if (a.sim) {
    const sim::SimConfig cfg = sim_config(a);
    const fs::path save = a.save_traces;
    if (!save.empty()) fs::create_directories(save);
    provider = [cfg, save](const ConcreteScenario& cs, const LogicalScenario& ls) {
      Trace tr = sim::simulate(cs, ls, cfg);
      if (!save.empty()) write_trace_file(tr, (save / (cs.id + ".csv")).string());
      return tr;
    };
  } else {
    const fs::path dir = a.traces;
    provider = [dir](const ConcreteScenario& cs, const LogicalScenario&) {
      const fs::path p = dir / (cs.id + ".csv");
      if (!fs::exists(p)) throw DataError("missing trace for " + cs.id + ": " + p.string());
      try {
        return derive_channels(read_trace_file(p.string()));
      } catch (const DataError& e) {
        throw DataError(cs.id + ": " + p.string() + ": " + e.what());
      }
    };
  }

  CampaignOptions opts;
  opts.jobs = a.jobs;
  const CampaignResult result = evaluate_campaign(cat, concretes, provider, policy, opts);
  const fs::path report(a.out);
  if (report.has_parent_path()) fs::create_directories(report.parent_path());
  spit(report, report_json(result));

  for (const auto& [fid, levels] : result.per_functional) {
    out << fid << ":";
    for (const auto& d : levels) {
      out << " " << to_string(d.level) << "=" << to_string(d.status) << "(" << d.k_events << "/"
          << d.n_tests << ")";
    }
    out << "\n";
  }
  out << "prescriptive failures: " << result.prescriptive_failures.size() << "\n";
  out << "overall: " << to_string(result.overall) << "\n";
  err << "wrote " << report.string() << "\n";

  switch (result.overall) {
    case Overall::Pass: return kPass;
    case Overall::Fail: return kFail;
    case Overall::Inconclusive: return kInconclusive;
  }
  return kInternal;
}

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  rules::ParseOptions opts;
  opts.custom_channels.insert(a.channels.begin(), a.channels.end());
  try {
    const rules::RuleSet rs = rules::read_ruleset_file(a.ruleset, opts);
    out << a.ruleset << ": " << rs.rules.size() << " rules ok\n";
    return kPass;
  } catch (const ParseError& e) {
    err << a.ruleset << ":" << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-based verification of automated driving systems", "adsv"};
  app.require_subcommand(1);

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Allocate a test budget and sample concrete scenarios");
  sample->add_option("catalogue", sa.catalogue, "Catalogue directory")->required();
  sample->add_option("--total", sa.total, "Total number of tests")->required();
  sample->add_option("--floor", sa.floor, "Minimum tests per functional scenario");
  sample->add_option("--seed", sa.seed, "Campaign seed");
  sample->add_option("--out", sa.out, "Output directory")->required();

  RunArgs ra;
  auto* runc = app.add_subcommand("run", "Simulate or ingest traces, evaluate rules and decide");
  runc->add_option("catalogue", ra.catalogue, "Catalogue directory")->required();
  runc->add_option("concrete_dir", ra.concrete_dir, "Directory of concrete scenario files")->required();
  runc->add_option("policy", ra.policy, "Risk policy file")->required();
  auto* sim_flag = runc->add_flag("--sim", ra.sim, "Use the built-in simulator");
  auto* traces_opt = runc->add_option("--traces", ra.traces, "Directory of <concrete id>.csv traces");
  sim_flag->excludes(traces_opt);
  runc->add_option("--out", ra.out, "Report path")->required();
  runc->add_option("--jobs", ra.jobs, "Worker threads (0 = all cores)");
  runc->add_option("--controller", ra.controller, "constant_speed, idm_follower or scripted_brake");
  runc->add_option("--param", ra.params, "Controller parameter key=value");
  runc->add_option("--dt", ra.dt, "Simulation step in seconds");
  runc->add_option("--horizon", ra.horizon, "Simulation horizon in seconds");
  runc->add_option("--save-traces", ra.save_traces, "Write simulated traces to this directory");

  CheckArgs ca;
  auto* check = app.add_subcommand("check", "Parse a ruleset and report diagnostics");
  check->add_option("ruleset", ca.ruleset, "Ruleset file")->required();
  check->add_option("--channel", ca.channels, "Extra channel name accepted by the parser");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (*runc && !ra.sim && ra.traces.empty()) {
      throw CLI::ValidationError("run", "exactly one of --sim or --traces is required");
    }
    if (*runc && !ra.sim && (!ra.save_traces.empty() || !ra.params.empty())) {
      throw CLI::ValidationError("run", "--save-traces and --param require --sim");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*sample) return cmd_sample(sa, out, err);
    if (*runc) return cmd_run(ra, out, err);
    return cmd_check(ca, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InfeasibleBudget& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace adsv::cli
