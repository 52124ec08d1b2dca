#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adsv/rules.hpp"
#include "adsv/scenario.hpp"

namespace adsv {

/// Functional and logical scenarios plus the rulesets they reference.
/// Immutable after load.
struct Catalogue {
  std::vector<FunctionalScenario> functional;
  std::vector<LogicalScenario> logical;
  /// Parsed rulesets keyed by ruleset_ref.
  std::map<std::string, rules::RuleSet> rulesets;

  const FunctionalScenario* find_functional(std::string_view id) const;
  const LogicalScenario* find_logical(std::string_view id) const;
  const rules::RuleSet* ruleset_for(const LogicalScenario& ls) const;
  /// Logical scenarios of one functional scenario, sorted by id.
  std::vector<const LogicalScenario*> logical_of(std::string_view functional_id) const;

  bool operator==(const Catalogue&) const = default;
};

struct Issue {
  enum class Level { Error, Warning };
  Level level = Level::Error;
  /// e.g. `functional[cut_in_close].exposure`.
  std::string location;
  std::string message;

  bool operator==(const Issue&) const = default;
};

/// Checks every catalogue invariant. Empty iff the catalogue is valid.
std::vector<Issue> validate_catalogue(const Catalogue& c);

/// Reads `catalogue.json` under `root` and every ruleset it references.
/// Throws DataError for missing files, malformed documents (with the JSON
/// path of the field), dangling references, and invariant violations.
Catalogue load_catalogue(const std::filesystem::path& root);

/// Parses a catalogue document without touching the filesystem; rulesets
/// stay empty.
Catalogue parse_catalogue_document(std::string_view json_text);

/// `catalogue.json` text (version 1) for `c`; rulesets are not included.
std::string serialize_catalogue(const Catalogue& c);

std::string serialize_concrete(const ConcreteScenario& cs);
ConcreteScenario parse_concrete(std::string_view json_text);

/// Issues for one concrete scenario against its logical scenario.
std::vector<Issue> validate_concrete(const LogicalScenario& ls, const ConcreteScenario& cs);

}  // namespace adsv
