#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "adsv/error.hpp"
#include "adsv/rules.hpp"

namespace adsv::rules {

namespace {

double apply(ArithOp op, double a, double b) {
  switch (op) {
    case ArithOp::Add: return a + b;
    case ArithOp::Sub: return a - b;
    case ArithOp::Mul: return a * b;
    case ArithOp::Div: return a / b;
  }
  return 0.0;
}

bool apply(CompareOp op, double a, double b) {
  switch (op) {
    case CompareOp::Lt: return a < b;
    case CompareOp::Le: return a <= b;
    case CompareOp::Gt: return a > b;
    case CompareOp::Ge: return a >= b;
    case CompareOp::Eq: return a == b;
    case CompareOp::Ne: return a != b;
  }
  return false;
}

}  // namespace

Evaluator::Evaluator(const Trace& trace, std::map<std::string, double> params,
                     std::map<std::string, double> meta)
    : trace_(trace), params_(std::move(params)), meta_(std::move(meta)) {}

const std::vector<double>& Evaluator::channel(const ChannelId& id) const {
  auto idx = trace_.find(id);
  if (!idx) throw EvaluationError("unresolvable channel reference " + id.to_string());
  return trace_.column(*idx);
}

void Evaluator::check_resolvable(const Expr& e, std::string_view rule_name) const {
  const References refs = collect_references(e);
  const std::string rule = "rule '" + std::string(rule_name) + "': ";
  for (const auto& ch : refs.channels) {
    if (!trace_.has(ch)) throw EvaluationError(rule + "unresolvable channel reference " + ch.to_string());
  }
  for (const auto& p : refs.params) {
    if (!params_.contains(p)) throw EvaluationError(rule + "unresolvable parameter reference '" + p + "'");
  }
  for (const auto& m : refs.meta) {
    if (!meta_.contains(m)) throw EvaluationError(rule + "unresolvable metadata reference '" + m + "'");
  }
}

double Evaluator::value(const Expr& e) const {
  return std::visit(
      [this, &e](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, ParamRef>) {
          auto it = params_.find(n.name);
          if (it == params_.end()) throw EvaluationError("unresolvable parameter reference '" + n.name + "'");
          return it->second;
        } else if constexpr (std::is_same_v<T, MetaRef>) {
          auto it = meta_.find(n.name);
          if (it == meta_.end()) throw EvaluationError("unresolvable metadata reference '" + n.name + "'");
          return it->second;
        } else if constexpr (std::is_same_v<T, Reduction>) {
          const bool is_min = n.op == ReduceOp::Min;
          double acc = is_min ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
          for (std::size_t r = 0; r < trace_.rows(); ++r) {
            const double v = value_at(*n.arg, r);
            acc = is_min ? std::min(acc, v) : std::max(acc, v);
          }
          return acc;
        } else if constexpr (std::is_same_v<T, DurationWhere>) {
          const auto& t = trace_.times();
          double total = 0.0;
          for (std::size_t r = 0; r < t.size(); ++r) {
            if (!holds_at(*n.predicate, r)) continue;
            total += r + 1 < t.size() ? t[r + 1] - t[r] : trace_.dt_nominal();
          }
          return total;
        } else if constexpr (std::is_same_v<T, Arith>) {
          return apply(n.op, value(*n.lhs), value(*n.rhs));
        } else if constexpr (std::is_same_v<T, ChannelRef>) {
          throw EvaluationError("channel reference " + n.channel.to_string() +
                                " used outside a pointwise context");
        } else {
          return holds(e) ? 1.0 : 0.0;
        }
      },
      e.node);
}

bool Evaluator::holds(const Expr& e) const {
  return std::visit(
      [this, &e](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Temporal>) {
          const std::size_t rows = trace_.rows();
          switch (n.op) {
            case TemporalOp::Always:
              for (std::size_t r = 0; r < rows; ++r) {
                if (!holds_at(*n.predicate, r)) return false;
              }
              return true;
            case TemporalOp::Never:
              for (std::size_t r = 0; r < rows; ++r) {
                if (holds_at(*n.predicate, r)) return false;
              }
              return true;
            case TemporalOp::Eventually:
              for (std::size_t r = 0; r < rows; ++r) {
                if (holds_at(*n.predicate, r)) return true;
              }
              return false;
          }
          return false;
        } else if constexpr (std::is_same_v<T, Compare>) {
          return apply(n.op, value(*n.lhs), value(*n.rhs));
        } else if constexpr (std::is_same_v<T, Logic>) {
          return n.op == LogicOp::And ? holds(*n.lhs) && holds(*n.rhs)
                                      : holds(*n.lhs) || holds(*n.rhs);
        } else if constexpr (std::is_same_v<T, Not>) {
          return !holds(*n.operand);
        } else if constexpr (std::is_same_v<T, Truthy>) {
          return value(*n.operand) != 0.0;
        } else {
          return value(e) != 0.0;
        }
      },
      e.node);
}

double Evaluator::value_at(const Expr& e, std::size_t row) const {
  return std::visit(
      [this, &e, row](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ChannelRef>) {
          return channel(n.channel)[row];
        } else if constexpr (std::is_same_v<T, Arith>) {
          return apply(n.op, value_at(*n.lhs, row), value_at(*n.rhs, row));
        } else if constexpr (std::is_same_v<T, Number> || std::is_same_v<T, ParamRef> ||
                             std::is_same_v<T, MetaRef>) {
          return value(e);
        } else if constexpr (std::is_same_v<T, Reduction> || std::is_same_v<T, DurationWhere>) {
          throw EvaluationError("reduction inside a pointwise context");
        } else {
          return holds_at(e, row) ? 1.0 : 0.0;
        }
      },
      e.node);
}

bool Evaluator::holds_at(const Expr& e, std::size_t row) const {
  return std::visit(
      [this, &e, row](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Compare>) {
          return apply(n.op, value_at(*n.lhs, row), value_at(*n.rhs, row));
        } else if constexpr (std::is_same_v<T, Logic>) {
          return n.op == LogicOp::And ? holds_at(*n.lhs, row) && holds_at(*n.rhs, row)
                                      : holds_at(*n.lhs, row) || holds_at(*n.rhs, row);
        } else if constexpr (std::is_same_v<T, Not>) {
          return !holds_at(*n.operand, row);
        } else if constexpr (std::is_same_v<T, Truthy>) {
          return value_at(*n.operand, row) != 0.0;
        } else if constexpr (std::is_same_v<T, Temporal>) {
          throw EvaluationError("temporal operator inside a pointwise context");
        } else {
          return value_at(e, row) != 0.0;
        }
      },
      e.node);
}

std::map<std::string, double> scenario_meta(const FunctionalScenario& fs) {
  std::map<std::string, double> meta;
  meta["others_reasonable"] = fs.others_reasonable ? 1.0 : 0.0;
  meta["demand_prior"] = fs.demand_prior;
  meta["exposure_value"] = fs.exposure.value;
  if (fs.exposure.mean_duration_hours) {
    meta["exposure_mean_duration_hours"] = *fs.exposure.mean_duration_hours;
  }
  return meta;
}

RunOutcome evaluate_rules(const RuleSet& rs, const Trace& tr, const ConcreteScenario& cs,
                          const FunctionalScenario& fs) {
  const Evaluator ev(tr, cs.assignments, scenario_meta(fs));
  std::vector<std::string> violated;
  Severity worst = Severity::None;
  for (const Rule& r : rs.rules) {
    if (r.applicability) {
      ev.check_resolvable(**r.applicability, r.name);
      if (!ev.holds(**r.applicability)) continue;
    }
    if (r.kind == RuleKind::Prescriptive) {
      ev.check_resolvable(**r.assertion, r.name);
      if (!ev.holds(**r.assertion)) violated.push_back(r.name);
      continue;
    }
    for (const auto& c : r.clauses) ev.check_resolvable(*c.condition, r.name);
    for (const auto& c : r.clauses) {
      if (c.level > worst && ev.holds(*c.condition)) worst = c.level;
    }
  }
  if (!violated.empty()) return PrescriptiveFailure{std::move(violated)};
  return Scored{worst};
}

Severity severity_from_delta_v(double delta_v_mps, const DeltaVBins& bins) {
  if (!(delta_v_mps >= 0.0)) throw std::domain_error("severity_from_delta_v: negative delta-v");
  if (!(bins.s0_below < bins.s1_below && bins.s1_below < bins.s2_below)) {
    throw std::domain_error("severity_from_delta_v: bins must be increasing");
  }
  if (delta_v_mps < bins.s0_below) return Severity::S0;
  if (delta_v_mps < bins.s1_below) return Severity::S1;
  if (delta_v_mps < bins.s2_below) return Severity::S2;
  return Severity::S3;
}

}  // namespace adsv::rules
