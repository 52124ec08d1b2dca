#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adsv::rules::detail {

enum class Tok {
  Ident,
  Number,
  String,
  LParen,
  RParen,
  Comma,
  Plus,
  Minus,
  Star,
  Slash,
  Lt,
  Le,
  Gt,
  Ge,
  EqEq,
  Ne,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

/// Splits ruleset source into tokens; `#` starts a comment to end of line.
/// Throws ParseError on an unrecognised character or malformed literal.
std::vector<Token> tokenize(std::string_view src);

std::string_view describe(Tok t) noexcept;

}  // namespace adsv::rules::detail
