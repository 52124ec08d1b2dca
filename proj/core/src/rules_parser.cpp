#include <algorithm>
#include <set>

#include "adsv/error.hpp"
#include "adsv/rules.hpp"
#include "json_util.hpp"
#include "rules_lexer.hpp"

namespace adsv::rules {

using detail::Tok;
using detail::Token;

bool ExprRef::operator==(const ExprRef& other) const {
  if (!p_ || !other.p_) return p_ == other.p_;
  return *p_ == *other.p_;
}

bool Expr::is_boolean() const noexcept {
  return std::holds_alternative<Temporal>(node) || std::holds_alternative<Compare>(node) ||
         std::holds_alternative<Logic>(node) || std::holds_alternative<Not>(node) ||
         std::holds_alternative<Truthy>(node);
}

const std::vector<std::string>& meta_keys() {
  static const std::vector<std::string> keys = {"demand_prior", "exposure_mean_duration_hours",
                                                "exposure_value", "others_reasonable"};
  return keys;
}

namespace {

const std::set<std::string, std::less<>> kKeywords = {
    "rule", "prescriptive", "risk",  "when", "assert", "severity",       "if",
    "always", "never",      "eventually", "and", "or", "not", "param", "meta",
    "min",  "max",          "duration_where"};

// Where an expression is being parsed.
struct Context {
  // Inside always/never/eventually, min/max or duration_where: channel
  // references sample one row.
  bool pointwise = false;
  // False in `when` clauses, which see only parameters and metadata.
  bool trace_allowed = true;
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, const ParseOptions& options)
      : toks_(std::move(tokens)), options_(options) {}

  RuleSet parse() {
    RuleSet rs;
    std::set<std::string> names;
    if (at(Tok::End)) fail(cur(), "expected 'rule'");
    while (!at(Tok::End)) {
      Rule r = parse_rule();
      if (!names.insert(r.name).second) {
        throw ParseError("duplicate rule name '" + r.name + "'", r.line, name_col_);
      }
      rs.rules.push_back(std::move(r));
    }
    return rs;
  }

 private:
  // -- token helpers --------------------------------------------------------

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t off = 1) const {
    return toks_[std::min(pos_ + off, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_word(std::string_view w) const { return at(Tok::Ident) && cur().text == w; }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.line, t.column);
  }

  const Token& expect(Tok k) {
    if (!at(k)) {
      fail(cur(), "expected " + std::string(detail::describe(k)) + ", found " + found(cur()));
    }
    return toks_[pos_++];
  }

  void expect_word(std::string_view w) {
    if (!at_word(w)) fail(cur(), "expected '" + std::string(w) + "', found " + found(cur()));
    ++pos_;
  }

  static std::string found(const Token& t) {
    if (t.kind == Tok::End) return "end of input";
    return "'" + t.text + "'";
  }

  ExprRef make(Node node, const Token& at) const {
    return ExprRef(std::make_shared<const Expr>(Expr{std::move(node), at.line, at.column}));
  }

  // -- rules ----------------------------------------------------------------

  Rule parse_rule() {
    expect_word("rule");
    const Token& name = expect(Tok::Ident);
    if (kKeywords.contains(name.text)) fail(name, "keyword '" + name.text + "' cannot name a rule");
    Rule r;
    r.name = name.text;
    r.line = name.line;
    name_col_ = name.column;

    if (at_word("prescriptive")) {
      ++pos_;
      r.kind = RuleKind::Prescriptive;
      r.applicability = parse_when();
      expect_word("assert");
      r.assertion = parse_condition(Context{});
    } else if (at_word("risk")) {
      ++pos_;
      r.kind = RuleKind::Risk;
      r.applicability = parse_when();
      if (!at_word("severity")) fail(cur(), "expected 'severity', found " + found(cur()));
      std::set<Severity> levels;
      while (at_word("severity")) {
        ++pos_;
        const Token& lt = expect(Tok::Ident);
        auto level = severity_from_string(lt.text);
        if (!level || *level == Severity::None) fail(lt, "expected a severity level S0..S3");
        if (!levels.insert(*level).second) fail(lt, "duplicate severity level " + lt.text);
        expect_word("if");
        r.clauses.push_back({*level, parse_condition(Context{})});
      }
    } else {
      fail(cur(), "expected 'prescriptive' or 'risk', found " + found(cur()));
    }
    return r;
  }

  std::optional<ExprRef> parse_when() {
    if (!at_word("when")) return std::nullopt;
    ++pos_;
    return parse_condition(Context{.pointwise = false, .trace_allowed = false});
  }

  // -- boolean layer --------------------------------------------------------

  ExprRef parse_condition(Context ctx) { return parse_or(ctx); }

  ExprRef parse_or(Context ctx) {
    ExprRef lhs = parse_and(ctx);
    while (at_word("or")) {
      const Token& op = toks_[pos_++];
      lhs = make(Logic{LogicOp::Or, lhs, parse_and(ctx)}, op);
    }
    return lhs;
  }

  ExprRef parse_and(Context ctx) {
    ExprRef lhs = parse_not(ctx);
    while (at_word("and")) {
      const Token& op = toks_[pos_++];
      lhs = make(Logic{LogicOp::And, lhs, parse_not(ctx)}, op);
    }
    return lhs;
  }

  ExprRef parse_not(Context ctx) {
    if (at_word("not")) {
      const Token& op = toks_[pos_++];
      return make(Not{parse_not(ctx)}, op);
    }
    return parse_bool_primary(ctx);
  }

  static bool continues_arithmetic(Tok k) {
    switch (k) {
      case Tok::Plus: case Tok::Minus: case Tok::Star: case Tok::Slash:
      case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge: case Tok::EqEq: case Tok::Ne:
        return true;
      default:
        return false;
    }
  }

  ExprRef parse_bool_primary(Context ctx) {
    if ((at_word("always") || at_word("never") || at_word("eventually")) &&
        peek().kind == Tok::LParen) {
      const Token& op = toks_[pos_++];
      if (ctx.pointwise) fail(op, "temporal operators cannot be nested");
      if (!ctx.trace_allowed) fail(op, "'when' clauses cannot reference the trace");
      const TemporalOp top = op.text == "always"  ? TemporalOp::Always
                             : op.text == "never" ? TemporalOp::Never
                                                  : TemporalOp::Eventually;
      expect(Tok::LParen);
      ExprRef pred = parse_condition(Context{.pointwise = true, .trace_allowed = true});
      expect(Tok::RParen);
      return make(Temporal{top, pred}, op);
    }

    if (at(Tok::LParen)) {
      // Either a parenthesised condition or the start of an arithmetic
      // operand, e.g. `(a + b) > c`. Try the condition first.
      const std::size_t start = pos_;
      std::optional<ParseError> group_error;
      try {
        ++pos_;
        ExprRef inner = parse_condition(ctx);
        expect(Tok::RParen);
        if (!continues_arithmetic(cur().kind)) return inner;
      } catch (const ParseError& e) {
        group_error = e;
      }
      const std::size_t group_end = pos_;
      pos_ = start;
      try {
        return parse_comparison(ctx);
      } catch (const ParseError& e) {
        if (group_error && group_end > pos_) throw *group_error;
        throw;
      }
    }
    return parse_comparison(ctx);
  }

  ExprRef parse_comparison(Context ctx) {
    const Token& first = cur();
    ExprRef lhs = parse_sum(ctx);
    std::optional<CompareOp> op;
    switch (cur().kind) {
      case Tok::Lt: op = CompareOp::Lt; break;
      case Tok::Le: op = CompareOp::Le; break;
      case Tok::Gt: op = CompareOp::Gt; break;
      case Tok::Ge: op = CompareOp::Ge; break;
      case Tok::EqEq: op = CompareOp::Eq; break;
      case Tok::Ne: op = CompareOp::Ne; break;
      default: break;
    }
    if (!op) return make(Truthy{lhs}, first);
    const Token& opt = toks_[pos_++];
    ExprRef rhs = parse_sum(ctx);
    return make(Compare{*op, lhs, rhs}, opt);
  }

  // -- arithmetic layer -----------------------------------------------------

  ExprRef parse_sum(Context ctx) {
    ExprRef lhs = parse_product(ctx);
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const Token& op = toks_[pos_++];
      lhs = make(Arith{op.kind == Tok::Plus ? ArithOp::Add : ArithOp::Sub, lhs,
                       parse_product(ctx)},
                 op);
    }
    return lhs;
  }

  ExprRef parse_product(Context ctx) {
    ExprRef lhs = parse_unary(ctx);
    while (at(Tok::Star) || at(Tok::Slash)) {
      const Token& op = toks_[pos_++];
      lhs = make(Arith{op.kind == Tok::Star ? ArithOp::Mul : ArithOp::Div, lhs,
                       parse_unary(ctx)},
                 op);
    }
    return lhs;
  }

  ExprRef parse_unary(Context ctx) {
    if (at(Tok::Minus)) {
      const Token& op = toks_[pos_++];
      if (at(Tok::Number)) {
        const Token& num = toks_[pos_++];
        return make(Number{-num.number}, op);
      }
      return make(Arith{ArithOp::Sub, make(Number{0.0}, op), parse_unary(ctx)}, op);
    }
    return parse_primary(ctx);
  }

  std::string parse_key() {
    expect(Tok::LParen);
    if (!at(Tok::String) && !at(Tok::Ident)) {
      fail(cur(), "expected a quoted name, found " + found(cur()));
    }
    std::string key = toks_[pos_++].text;
    expect(Tok::RParen);
    return key;
  }

  ExprRef parse_primary(Context ctx) {
    const Token& t = cur();
    if (at(Tok::Number)) {
      ++pos_;
      return make(Number{t.number}, t);
    }
    if (at(Tok::LParen)) {
      ++pos_;
      ExprRef inner = parse_sum(ctx);
      expect(Tok::RParen);
      return inner;
    }
    if (!at(Tok::Ident)) fail(t, "expected an expression, found " + found(t));

    const std::string& word = t.text;
    if (word == "param") {
      ++pos_;
      return make(ParamRef{parse_key()}, t);
    }
    if (word == "meta") {
      ++pos_;
      const Token& key_tok = peek(1);
      std::string key = parse_key();
      const auto& keys = meta_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(key_tok, "unknown metadata key '" + key + "'");
      }
      return make(MetaRef{std::move(key)}, t);
    }
    if (word == "min" || word == "max") {
      ++pos_;
      check_reduction_context(t, ctx);
      expect(Tok::LParen);
      ExprRef arg = parse_sum(Context{.pointwise = true, .trace_allowed = true});
      expect(Tok::RParen);
      return make(Reduction{word == "min" ? ReduceOp::Min : ReduceOp::Max, arg}, t);
    }
    if (word == "duration_where") {
      ++pos_;
      check_reduction_context(t, ctx);
      expect(Tok::LParen);
      ExprRef pred = parse_condition(Context{.pointwise = true, .trace_allowed = true});
      expect(Tok::RParen);
      return make(DurationWhere{pred}, t);
    }
    if (kKeywords.contains(word)) fail(t, "unexpected keyword '" + word + "'");
    if (peek().kind != Tok::LParen) fail(t, "unexpected identifier '" + word + "'");
    return parse_channel(ctx);
  }

  void check_reduction_context(const Token& t, Context ctx) const {
    if (ctx.pointwise) fail(t, "'" + t.text + "' cannot appear inside a pointwise expression");
    if (!ctx.trace_allowed) fail(t, "'when' clauses cannot reference the trace");
  }

  ExprRef parse_channel(Context ctx) {
    const Token& name = toks_[pos_++];
    const auto arity = builtin_arity(name.text);
    if (!arity && !options_.custom_channels.contains(name.text)) {
      fail(name, "unknown function name '" + name.text + "'");
    }
    ChannelId id{name.text, {}};
    expect(Tok::LParen);
    for (;;) {
      const Token& actor = expect(Tok::Ident);
      if (kKeywords.contains(actor.text)) fail(actor, "keyword '" + actor.text + "' is not an actor");
      id.actors.push_back(actor.text);
      if (at(Tok::Comma)) {
        ++pos_;
        continue;
      }
      expect(Tok::RParen);
      break;
    }
    if (arity && id.actors.size() != *arity) {
      fail(name, "'" + name.text + "' takes " + std::to_string(*arity) + " actor(s)");
    }
    if (!arity && id.actors.size() > 2) fail(name, "channels take one or two actors");
    if (!ctx.trace_allowed) fail(name, "'when' clauses cannot reference the trace");
    if (!ctx.pointwise) {
      fail(name, "channel reference " + id.to_string() +
                     " must appear inside always/never/eventually, min, max or duration_where");
    }
    return make(ChannelRef{std::move(id)}, name);
  }

  std::vector<Token> toks_;
  const ParseOptions& options_;
  std::size_t pos_ = 0;
  int name_col_ = 0;
};

void collect(const Expr& e, References& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ChannelRef>) {
          out.channels.insert(n.channel);
        } else if constexpr (std::is_same_v<T, ParamRef>) {
          out.params.insert(n.name);
        } else if constexpr (std::is_same_v<T, MetaRef>) {
          out.meta.insert(n.name);
        } else if constexpr (std::is_same_v<T, Reduction>) {
          collect(*n.arg, out);
        } else if constexpr (std::is_same_v<T, DurationWhere> || std::is_same_v<T, Temporal>) {
          collect(*n.predicate, out);
        } else if constexpr (std::is_same_v<T, Arith> || std::is_same_v<T, Compare> ||
                             std::is_same_v<T, Logic>) {
          collect(*n.lhs, out);
          collect(*n.rhs, out);
        } else if constexpr (std::is_same_v<T, Not> || std::is_same_v<T, Truthy>) {
          collect(*n.operand, out);
        }
      },
      e.node);
}

}  // namespace

RuleSet parse_ruleset(std::string_view text, const ParseOptions& options) {
  Parser p(detail::tokenize(text), options);
  return p.parse();
}

RuleSet read_ruleset_file(const std::string& path, const ParseOptions& options) {
  return parse_ruleset(adsv::detail::read_file(path), options);
}

References collect_references(const Expr& e) {
  References out;
  collect(e, out);
  return out;
}

References collect_references(const RuleSet& rs) {
  References out;
  for (const auto& r : rs.rules) {
    if (r.applicability) collect(**r.applicability, out);
    if (r.assertion) collect(**r.assertion, out);
    for (const auto& c : r.clauses) collect(*c.condition, out);
  }
  return out;
}

}  // namespace adsv::rules
