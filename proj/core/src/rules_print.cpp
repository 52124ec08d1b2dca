#include <sstream>

#include "adsv/rules.hpp"
#include "json_util.hpp"

namespace adsv::rules {

namespace {

std::string_view op_text(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
    case ArithOp::Div: return "/";
  }
  return "+";
}

std::string_view op_text(CompareOp op) {
  switch (op) {
    case CompareOp::Lt: return "<";
    case CompareOp::Le: return "<=";
    case CompareOp::Gt: return ">";
    case CompareOp::Ge: return ">=";
    case CompareOp::Eq: return "==";
    case CompareOp::Ne: return "!=";
  }
  return "<";
}

std::string_view op_text(TemporalOp op) {
  switch (op) {
    case TemporalOp::Always: return "always";
    case TemporalOp::Never: return "never";
    case TemporalOp::Eventually: return "eventually";
  }
  return "always";
}

void print(const Expr& e, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += adsv::detail::format_number(n.value);
        } else if constexpr (std::is_same_v<T, ChannelRef>) {
          out += n.channel.name + "(";
          for (std::size_t i = 0; i < n.channel.actors.size(); ++i) {
            if (i) out += ", ";
            out += n.channel.actors[i];
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, ParamRef>) {
          out += "param(\"" + n.name + "\")";
        } else if constexpr (std::is_same_v<T, MetaRef>) {
          out += "meta(\"" + n.name + "\")";
        } else if constexpr (std::is_same_v<T, Reduction>) {
          out += n.op == ReduceOp::Min ? "min(" : "max(";
          print(*n.arg, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, DurationWhere>) {
          out += "duration_where(";
          print(*n.predicate, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Temporal>) {
          out += op_text(n.op);
          out += "(";
          print(*n.predicate, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Arith>) {
          out += "(";
          print(*n.lhs, out);
          out += " ";
          out += op_text(n.op);
          out += " ";
          print(*n.rhs, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Compare>) {
          print(*n.lhs, out);
          out += " ";
          out += op_text(n.op);
          out += " ";
          print(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Logic>) {
          out += "(";
          print(*n.lhs, out);
          out += n.op == LogicOp::And ? " and " : " or ";
          print(*n.rhs, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Not>) {
          out += "not ";
          print(*n.operand, out);
        } else if constexpr (std::is_same_v<T, Truthy>) {
          print(*n.operand, out);
        }
      },
      e.node);
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

std::string print_ruleset(const RuleSet& rs) {
  std::string out;
  for (std::size_t i = 0; i < rs.rules.size(); ++i) {
    const Rule& r = rs.rules[i];
    if (i) out += "\n";
    out += "rule " + r.name + (r.kind == RuleKind::Prescriptive ? " prescriptive\n" : " risk\n");
    if (r.applicability) out += "  when " + print_expr(**r.applicability) + "\n";
    if (r.assertion) out += "  assert " + print_expr(**r.assertion) + "\n";
    for (const auto& c : r.clauses) {
      out += "  severity ";
      out += to_string(c.level);
      out += " if " + print_expr(*c.condition) + "\n";
    }
  }
  return out;
}

}  // namespace adsv::rules
