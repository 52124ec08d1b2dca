#include "adsv/catalogue.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "adsv/error.hpp"
#include "json_util.hpp"

namespace adsv {

using detail::json;
using detail::ObjectReader;

namespace {

constexpr std::uint64_t kVersion = 1;
constexpr double kProbabilitySumTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Document -> values
// ---------------------------------------------------------------------------

Exposure read_exposure(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Exposure e;
  const std::string kind = r.string("kind");
  if (kind == "rate_per_hour") {
    e.kind = Exposure::Kind::RatePerHour;
  } else if (kind == "time_proportion") {
    e.kind = Exposure::Kind::TimeProportion;
  } else {
    r.fail("kind", "unknown exposure kind '" + kind + "'");
  }
  e.value = r.number("value");
  if (r.has("mean_duration_hours")) e.mean_duration_hours = r.number("mean_duration_hours");
  r.finish();
  return e;
}

Distribution read_distribution(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const std::string kind = r.string("kind");
  Distribution d;
  if (kind == "uniform") {
    d = Uniform{r.number("lo"), r.number("hi")};
  } else if (kind == "trunc_normal") {
    d = TruncNormal{r.number("mean"), r.number("sd"), r.number("lo"), r.number("hi")};
  } else if (kind == "discrete") {
    Discrete dd;
    const json& arr = r.array("outcomes");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ObjectReader o(arr[i], path + ".outcomes[" + std::to_string(i) + "]");
      dd.outcomes.emplace_back(o.number("value"), o.number("probability"));
      o.finish();
    }
    d = std::move(dd);
  } else {
    r.fail("kind", "unknown distribution kind '" + kind + "'");
  }
  r.finish();
  return d;
}

FunctionalScenario read_functional(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  FunctionalScenario f;
  f.id = r.string("id");
  if (const json* d = r.optional("description")) {
    if (!d->is_string()) r.fail("description", "expected a string");
    f.description = d->get<std::string>();
  }
  if (const json* tags = r.optional("tags")) {
    if (!tags->is_array()) r.fail("tags", "expected an array");
    for (const auto& t : *tags) {
      if (!t.is_string()) r.fail("tags", "expected strings");
      f.tags.push_back(t.get<std::string>());
    }
  }
  f.exposure = read_exposure(r.object("exposure"), path + ".exposure");
  f.others_reasonable = r.boolean("others_reasonable");
  f.demand_prior = r.number("demand_prior");
  r.finish();
  return f;
}

LogicalScenario read_logical(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LogicalScenario l;
  l.id = r.string("id");
  l.functional_id = r.string("functional_id");
  const json& params = r.array("parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string ppath = path + ".parameters[" + std::to_string(i) + "]";
    ObjectReader p(params[i], ppath);
    ParameterSpec spec;
    spec.name = p.string("name");
    spec.distribution = read_distribution(p.object("distribution"), ppath + ".distribution");
    p.finish();
    l.parameters.push_back(std::move(spec));
  }
  {
    const std::string spath = path + ".scene_template";
    ObjectReader s(r.object("scene_template"), spath);
    const std::string kind = s.string("kind");
    auto k = scene_kind_from_string(kind);
    if (!k) s.fail("kind", "unknown scene template '" + kind + "'");
    l.scene_template.kind = *k;
    const json& inputs = s.object("inputs");
    for (auto it = inputs.begin(); it != inputs.end(); ++it) {
      if (it->is_number()) {
        l.scene_template.inputs[it.key()] = it->get<double>();
      } else if (it->is_string()) {
        l.scene_template.inputs[it.key()] = it->get<std::string>();
      } else {
        throw DataError(spath + ".inputs." + it.key() +
                        ": expected a number or a parameter name");
      }
    }
    s.finish();
  }
  l.ruleset_ref = r.string("ruleset_ref");
  r.finish();
  return l;
}

// ---------------------------------------------------------------------------
// Values -> document
// ---------------------------------------------------------------------------

json write_exposure(const Exposure& e) {
  json j = json::object();
  j["kind"] = e.kind == Exposure::Kind::RatePerHour ? "rate_per_hour" : "time_proportion";
  j["value"] = e.value;
  if (e.mean_duration_hours) j["mean_duration_hours"] = *e.mean_duration_hours;
  return j;
}

json write_distribution(const Distribution& d) {
  json j = json::object();
  if (const auto* u = std::get_if<Uniform>(&d)) {
    j["kind"] = "uniform";
    j["lo"] = u->lo;
    j["hi"] = u->hi;
  } else if (const auto* n = std::get_if<TruncNormal>(&d)) {
    j["kind"] = "trunc_normal";
    j["mean"] = n->mean;
    j["sd"] = n->sd;
    j["lo"] = n->lo;
    j["hi"] = n->hi;
  } else {
    j["kind"] = "discrete";
    json arr = json::array();
    for (const auto& [v, p] : std::get<Discrete>(d).outcomes) {
      arr.push_back({{"value", v}, {"probability", p}});
    }
    j["outcomes"] = std::move(arr);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Validation helpers
// ---------------------------------------------------------------------------

class IssueSink {
 public:
  void error(std::string location, std::string message) {
    issues_.push_back({Issue::Level::Error, std::move(location), std::move(message)});
  }
  void warning(std::string location, std::string message) {
    issues_.push_back({Issue::Level::Warning, std::move(location), std::move(message)});
  }
  std::vector<Issue> take() { return std::move(issues_); }

 private:
  std::vector<Issue> issues_;
};

void check_exposure(const Exposure& e, const std::string& loc, IssueSink& out) {
  if (!(e.value > 0.0) || !std::isfinite(e.value)) {
    out.error(loc, "exposure must be positive");
  }
  if (e.kind == Exposure::Kind::TimeProportion) {
    if (e.value > 1.0) out.error(loc, "time_proportion exposure must not exceed 1");
    if (!e.mean_duration_hours) {
      out.error(loc, "time_proportion exposure requires mean_duration_hours");
    } else if (!(*e.mean_duration_hours > 0.0)) {
      out.error(loc, "mean_duration_hours must be positive");
    }
  } else if (e.mean_duration_hours) {
    out.error(loc, "mean_duration_hours is only valid for time_proportion exposure");
  }
}

void check_distribution(const Distribution& d, const std::string& loc, IssueSink& out) {
  if (const auto* u = std::get_if<Uniform>(&d)) {
    if (!(u->lo < u->hi)) out.error(loc, "uniform requires lo < hi");
  } else if (const auto* n = std::get_if<TruncNormal>(&d)) {
    if (!(n->lo < n->hi)) out.error(loc, "trunc_normal requires lo < hi");
    if (!(n->sd > 0.0)) out.error(loc, "trunc_normal requires sd > 0");
  } else {
    const auto& dd = std::get<Discrete>(d);
    if (dd.outcomes.empty()) {
      out.error(loc, "discrete distribution needs at least one outcome");
      return;
    }
    double sum = 0.0;
    std::set<double> values;
    for (const auto& [v, p] : dd.outcomes) {
      if (!(p > 0.0)) out.error(loc, "probabilities must be positive");
      if (!values.insert(v).second) out.error(loc, "duplicate discrete value");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilitySumTolerance) {
      out.error(loc, "probabilities must sum to 1");
    }
  }
}

// Channels the built-in simulator produces for a scene kind.
std::set<ChannelId> scene_channels(SceneKind k) {
  std::set<ChannelId> out = {{"pos", {"ego"}}, {"speed", {"ego"}}};
  if (k != SceneKind::FreeDrive) {
    for (const char* a : {"pos", "speed"}) out.insert({a, {"lead"}});
    for (const char* p : {"gap", "closing_speed", "ttc", "collision"}) {
      out.insert({p, {"ego", "lead"}});
    }
  }
  return out;
}

void check_logical(const LogicalScenario& l, const Catalogue& c, IssueSink& out) {
  const std::string loc = "logical[" + l.id + "]";
  if (l.id.empty()) out.error(loc, "id must not be empty");
  if (!c.find_functional(l.functional_id)) {
    out.error(loc, "functional_id '" + l.functional_id + "' does not resolve");
  }
  std::set<std::string> names;
  for (const auto& p : l.parameters) {
    const std::string ploc = loc + ".parameters[" + p.name + "]";
    if (p.name.empty()) out.error(ploc, "parameter name must not be empty");
    if (!names.insert(p.name).second) out.error(ploc, "duplicate parameter name '" + p.name + "'");
    check_distribution(p.distribution, ploc, out);
  }

  const std::string sloc = loc + ".scene_template";
  const auto& required = scene_inputs(l.scene_template.kind);
  for (const auto& in : required) {
    if (!l.scene_template.inputs.contains(in)) {
      out.error(sloc, "missing input '" + in + "' for " +
                          std::string(to_string(l.scene_template.kind)));
    }
  }
  for (const auto& [in, source] : l.scene_template.inputs) {
    if (std::find(required.begin(), required.end(), in) == required.end()) {
      out.error(sloc, "unknown input '" + in + "' for " +
                          std::string(to_string(l.scene_template.kind)));
    }
    if (const auto* ref = std::get_if<std::string>(&source); ref && !names.contains(*ref)) {
      out.error(sloc, "input '" + in + "' references unknown parameter '" + *ref + "'");
    }
  }

  if (l.ruleset_ref.empty()) {
    out.error(loc, "ruleset_ref must not be empty");
    return;
  }
  const rules::RuleSet* rs = c.ruleset_for(l);
  if (!rs) {
    out.warning(loc, "ruleset '" + l.ruleset_ref + "' is not loaded");
    return;
  }
  const auto refs = rules::collect_references(*rs);
  for (const auto& p : refs.params) {
    if (!names.contains(p)) {
      out.error(loc, "ruleset '" + l.ruleset_ref + "' references unknown parameter '" + p + "'");
    }
  }
  const auto produced = scene_channels(l.scene_template.kind);
  for (const auto& ch : refs.channels) {
    if (!produced.contains(ch)) {
      out.warning(loc, "channel " + ch.to_string() + " is not produced by the " +
                           std::string(to_string(l.scene_template.kind)) +
                           " simulator template; ingested traces must supply it");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Catalogue
// ---------------------------------------------------------------------------

const FunctionalScenario* Catalogue::find_functional(std::string_view id) const {
  auto it = std::find_if(functional.begin(), functional.end(),
                         [id](const FunctionalScenario& f) { return f.id == id; });
  return it == functional.end() ? nullptr : &*it;
}

const LogicalScenario* Catalogue::find_logical(std::string_view id) const {
  auto it = std::find_if(logical.begin(), logical.end(),
                         [id](const LogicalScenario& l) { return l.id == id; });
  return it == logical.end() ? nullptr : &*it;
}

const rules::RuleSet* Catalogue::ruleset_for(const LogicalScenario& ls) const {
  auto it = rulesets.find(ls.ruleset_ref);
  return it == rulesets.end() ? nullptr : &it->second;
}

std::vector<const LogicalScenario*> Catalogue::logical_of(std::string_view functional_id) const {
  std::vector<const LogicalScenario*> out;
  for (const auto& l : logical) {
    if (l.functional_id == functional_id) out.push_back(&l);
  }
  std::sort(out.begin(), out.end(),
            [](const LogicalScenario* a, const LogicalScenario* b) { return a->id < b->id; });
  return out;
}

std::vector<Issue> validate_catalogue(const Catalogue& c) {
  IssueSink out;
  std::set<std::string> fids;
  for (const auto& f : c.functional) {
    const std::string loc = "functional[" + f.id + "]";
    if (f.id.empty()) out.error(loc, "id must not be empty");
    if (!fids.insert(f.id).second) out.error(loc, "duplicate functional id '" + f.id + "'");
    if (!(f.demand_prior > 0.0) || !std::isfinite(f.demand_prior)) {
      out.error(loc, "demand_prior must be positive");
    }
    check_exposure(f.exposure, loc + ".exposure", out);
    if (c.logical_of(f.id).empty()) out.warning(loc, "no logical scenarios");
  }
  std::set<std::string> lids;
  for (const auto& l : c.logical) {
    if (!lids.insert(l.id).second) {
      out.error("logical[" + l.id + "]", "duplicate logical id '" + l.id + "'");
    }
    check_logical(l, c, out);
  }
  return out.take();
}

Catalogue parse_catalogue_document(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "catalogue.json");
  ObjectReader r(doc, "catalogue");
  if (r.unsigned_integer("version") != kVersion) r.fail("version", "unsupported version");
  Catalogue c;
  const json& fs = r.array("functional");
  for (std::size_t i = 0; i < fs.size(); ++i) {
    c.functional.push_back(read_functional(fs[i], "catalogue.functional[" + std::to_string(i) + "]"));
  }
  const json& ls = r.array("logical");
  for (std::size_t i = 0; i < ls.size(); ++i) {
    c.logical.push_back(read_logical(ls[i], "catalogue.logical[" + std::to_string(i) + "]"));
  }
  r.finish();
  return c;
}

Catalogue load_catalogue(const std::filesystem::path& root) {
  const auto doc_path = root / "catalogue.json";
  if (!std::filesystem::is_regular_file(doc_path)) {
    throw DataError("missing file: " + doc_path.string());
  }
  Catalogue c = parse_catalogue_document(detail::read_file(doc_path.string()));

  for (const auto& l : c.logical) {
    if (l.ruleset_ref.empty() || c.rulesets.contains(l.ruleset_ref)) continue;
    const auto path = root / l.ruleset_ref;
    if (!std::filesystem::is_regular_file(path)) {
      throw DataError("logical[" + l.id + "]: missing ruleset file " + path.string());
    }
    try {
      c.rulesets.emplace(l.ruleset_ref, rules::parse_ruleset(detail::read_file(path.string())));
    } catch (const ParseError& e) {
      throw DataError(path.string() + ":" + e.what());
    }
  }

  std::ostringstream errors;
  bool failed = false;
  for (const auto& issue : validate_catalogue(c)) {
    if (issue.level != Issue::Level::Error) continue;
    errors << (failed ? "\n" : "") << issue.location << ": " << issue.message;
    failed = true;
  }
  if (failed) throw DataError(errors.str());
  return c;
}

std::string serialize_catalogue(const Catalogue& c) {
  json doc = json::object();
  doc["version"] = kVersion;
  json fs = json::array();
  for (const auto& f : c.functional) {
    json j = json::object();
    j["id"] = f.id;
    j["description"] = f.description;
    j["tags"] = f.tags;
    j["exposure"] = write_exposure(f.exposure);
    j["others_reasonable"] = f.others_reasonable;
    j["demand_prior"] = f.demand_prior;
    fs.push_back(std::move(j));
  }
  doc["functional"] = std::move(fs);
  json ls = json::array();
  for (const auto& l : c.logical) {
    json j = json::object();
    j["id"] = l.id;
    j["functional_id"] = l.functional_id;
    json params = json::array();
    for (const auto& p : l.parameters) {
      params.push_back({{"name", p.name}, {"distribution", write_distribution(p.distribution)}});
    }
    j["parameters"] = std::move(params);
    json inputs = json::object();
    for (const auto& [k, v] : l.scene_template.inputs) {
      if (const double* d = std::get_if<double>(&v)) {
        inputs[k] = *d;
      } else {
        inputs[k] = std::get<std::string>(v);
      }
    }
    j["scene_template"] = {{"kind", std::string(to_string(l.scene_template.kind))},
                           {"inputs", std::move(inputs)}};
    j["ruleset_ref"] = l.ruleset_ref;
    ls.push_back(std::move(j));
  }
  doc["logical"] = std::move(ls);
  return doc.dump(2) + "\n";
}

std::string serialize_concrete(const ConcreteScenario& cs) {
  json j = json::object();
  j["id"] = cs.id;
  j["logical_id"] = cs.logical_id;
  j["seed"] = cs.seed;
  json a = json::object();
  for (const auto& [k, v] : cs.assignments) a[k] = v;
  j["assignments"] = std::move(a);
  return j.dump(2) + "\n";
}

ConcreteScenario parse_concrete(std::string_view json_text) {
  const json doc = detail::parse_json(json_text, "concrete scenario");
  ObjectReader r(doc, "concrete");
  ConcreteScenario cs;
  cs.id = r.string("id");
  cs.logical_id = r.string("logical_id");
  cs.seed = r.unsigned_integer("seed");
  const json& a = r.object("assignments");
  for (auto it = a.begin(); it != a.end(); ++it) {
    if (!it->is_number()) r.fail("assignments." + it.key(), "expected a number");
    cs.assignments[it.key()] = it->get<double>();
  }
  r.finish();
  return cs;
}

std::vector<Issue> validate_concrete(const LogicalScenario& ls, const ConcreteScenario& cs) {
  IssueSink out;
  const std::string loc = "concrete[" + cs.id + "]";
  if (cs.logical_id != ls.id) {
    out.error(loc, "logical_id '" + cs.logical_id + "' does not match '" + ls.id + "'");
  }
  for (const auto& p : ls.parameters) {
    auto it = cs.assignments.find(p.name);
    if (it == cs.assignments.end()) {
      out.error(loc, "parameter '" + p.name + "' is not assigned");
    } else if (!in_support(p.distribution, it->second)) {
      out.error(loc, "assignment of '" + p.name + "' lies outside its distribution support");
    }
  }
  for (const auto& [name, value] : cs.assignments) {
    if (!ls.find_parameter(name)) out.error(loc, "unknown parameter '" + name + "'");
  }
  return out.take();
}

}  // namespace adsv
