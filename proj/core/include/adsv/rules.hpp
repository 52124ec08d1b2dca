#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adsv/outcome.hpp"
#include "adsv/scenario.hpp"
#include "adsv/severity.hpp"
#include "adsv/trace.hpp"

namespace adsv::rules {

// ---------------------------------------------------------------------------
// Syntax tree
// ---------------------------------------------------------------------------

struct Expr;

/// Shared, immutable subtree. Equality is structural.
class ExprRef {
 public:
  ExprRef() = default;
  explicit ExprRef(std::shared_ptr<const Expr> p) : p_(std::move(p)) {}

  const Expr& operator*() const { return *p_; }
  const Expr* operator->() const { return p_.get(); }
  const Expr* get() const { return p_.get(); }

  bool operator==(const ExprRef& other) const;

 private:
  std::shared_ptr<const Expr> p_;
};

enum class TemporalOp { Always, Never, Eventually };
enum class ReduceOp { Min, Max };
enum class ArithOp { Add, Sub, Mul, Div };
enum class CompareOp { Lt, Le, Gt, Ge, Eq, Ne };
enum class LogicOp { And, Or };

struct Number {
  double value = 0.0;
  bool operator==(const Number&) const = default;
};
/// Pointwise channel sample, e.g. `ttc(ego, lead)`.
struct ChannelRef {
  ChannelId channel;
  bool operator==(const ChannelRef&) const = default;
};
struct ParamRef {
  std::string name;
  bool operator==(const ParamRef&) const = default;
};
struct MetaRef {
  std::string name;
  bool operator==(const MetaRef&) const = default;
};
/// min/max of a pointwise numeric expression over all rows.
struct Reduction {
  ReduceOp op;
  ExprRef arg;
  bool operator==(const Reduction&) const = default;
};
/// Seconds of trace time during which a pointwise predicate holds.
struct DurationWhere {
  ExprRef predicate;
  bool operator==(const DurationWhere&) const = default;
};
struct Temporal {
  TemporalOp op;
  ExprRef predicate;
  bool operator==(const Temporal&) const = default;
};
struct Arith {
  ArithOp op;
  ExprRef lhs;
  ExprRef rhs;
  bool operator==(const Arith&) const = default;
};
struct Compare {
  CompareOp op;
  ExprRef lhs;
  ExprRef rhs;
  bool operator==(const Compare&) const = default;
};
struct Logic {
  LogicOp op;
  ExprRef lhs;
  ExprRef rhs;
  bool operator==(const Logic&) const = default;
};
struct Not {
  ExprRef operand;
  bool operator==(const Not&) const = default;
};
/// Numeric expression used where a condition is expected (nonzero = true).
struct Truthy {
  ExprRef operand;
  bool operator==(const Truthy&) const = default;
};

using Node = std::variant<Number, ChannelRef, ParamRef, MetaRef, Reduction, DurationWhere,
                          Temporal, Arith, Compare, Logic, Not, Truthy>;

struct Expr {
  Node node;
  int line = 0;
  int column = 0;

  bool is_boolean() const noexcept;
  /// Source positions are ignored.
  bool operator==(const Expr& other) const { return node == other.node; }
};

enum class RuleKind { Prescriptive, Risk };

struct SeverityClause {
  Severity level = Severity::S0;
  ExprRef condition;
  bool operator==(const SeverityClause&) const = default;
};

struct Rule {
  std::string name;
  RuleKind kind = RuleKind::Prescriptive;
  std::optional<ExprRef> applicability;
  /// Prescriptive rules only.
  std::optional<ExprRef> assertion;
  /// Risk rules only, in source order.
  std::vector<SeverityClause> clauses;
  int line = 0;

  bool operator==(const Rule& o) const {
    return name == o.name && kind == o.kind && applicability == o.applicability &&
           assertion == o.assertion && clauses == o.clauses;
  }
};

struct RuleSet {
  std::vector<Rule> rules;
  bool operator==(const RuleSet&) const = default;
};

/// Everything a ruleset reads from a run.
struct References {
  std::set<ChannelId> channels;
  std::set<std::string> params;
  std::set<std::string> meta;
};

References collect_references(const RuleSet& rs);
References collect_references(const Expr& e);

// ---------------------------------------------------------------------------
// Parsing and printing
// ---------------------------------------------------------------------------

struct ParseOptions {
  /// Custom channel names accepted in channel references, beyond the
  /// built-in ones.
  std::set<std::string> custom_channels;
};

/// Parses ruleset text. Throws ParseError (line:column) on syntax errors,
/// duplicate rule names, duplicate severity levels within a rule, unknown
/// function names, and misplaced channel references.
RuleSet parse_ruleset(std::string_view text, const ParseOptions& options = {});

RuleSet read_ruleset_file(const std::string& path, const ParseOptions& options = {});

/// Canonical text that parses back to an equal RuleSet.
std::string print_ruleset(const RuleSet& rs);
std::string print_expr(const Expr& e);

/// Metadata keys available to `meta(...)`.
const std::vector<std::string>& meta_keys();

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluates expressions against one run with sampled-time semantics:
/// temporal operators and reductions quantify over trace rows, and
/// duration_where weights each row by the step to the next row (the last
/// row by dt_nominal).
class Evaluator {
 public:
  Evaluator(const Trace& trace, std::map<std::string, double> params,
            std::map<std::string, double> meta);

  /// Scalar-context evaluation of a boolean expression.
  bool holds(const Expr& e) const;
  /// Scalar-context evaluation of a numeric expression.
  double value(const Expr& e) const;

  /// Throws EvaluationError naming `rule_name` and the first reference that
  /// the run cannot satisfy.
  void check_resolvable(const Expr& e, std::string_view rule_name) const;

 private:
  bool holds_at(const Expr& e, std::size_t row) const;
  double value_at(const Expr& e, std::size_t row) const;
  const std::vector<double>& channel(const ChannelId& id) const;

  const Trace& trace_;
  std::map<std::string, double> params_;
  std::map<std::string, double> meta_;
};

/// Metadata exposed to rules for a functional scenario.
std::map<std::string, double> scenario_meta(const FunctionalScenario& fs);

/// Scores one run. Rules whose `when` clause is false are skipped. Any
/// violated applicable prescriptive rule yields PrescriptiveFailure listing
/// all such rules; otherwise the severity is the maximum over applicable
/// risk rules of the highest level whose condition holds.
RunOutcome evaluate_rules(const RuleSet& rs, const Trace& tr, const ConcreteScenario& cs,
                          const FunctionalScenario& fs);

/// Upper bounds (exclusive) of the S0, S1 and S2 bins in m/s of delta-v.
struct DeltaVBins {
  double s0_below = 1.0;
  double s1_below = 4.0;
  double s2_below = 11.0;
};

/// Simple crash severity model binning delta-v. Throws std::domain_error
/// for negative input or non-increasing bins.
Severity severity_from_delta_v(double delta_v_mps, const DeltaVBins& bins = {});

}  // namespace adsv::rules
