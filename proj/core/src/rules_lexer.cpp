#include "rules_lexer.hpp"

#include <cctype>
#include <charconv>

#include "adsv/error.hpp"

namespace adsv::rules::detail {

std::string_view describe(Tok t) noexcept {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
    case Tok::End: return "end of input";
  }
  return "token";
}

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;

  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto peek = [&](std::size_t off = 0) -> char {
    return i + off < src.size() ? src[i + off] : '\0';
  };

  while (i < src.size()) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      tok.kind = Tok::Ident;
      tok.text = std::string(src.substr(start, i - start));
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      const std::size_t start = i;
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      if (peek() == '.') {
        advance();
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      if (peek() == 'e' || peek() == 'E') {
        std::size_t off = 1;
        if (peek(off) == '+' || peek(off) == '-') ++off;
        if (!std::isdigit(static_cast<unsigned char>(peek(off)))) {
          throw ParseError("malformed number exponent", line, col);
        }
        advance(off);
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      }
      tok.kind = Tok::Number;
      tok.text = std::string(src.substr(start, i - start));
      auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(),
                                       tok.number);
      if (ec != std::errc{} || ptr != tok.text.data() + tok.text.size()) {
        throw ParseError("malformed number '" + tok.text + "'", tok.line, tok.column);
      }
    } else if (c == '"') {
      advance();
      const std::size_t start = i;
      while (i < src.size() && src[i] != '"' && src[i] != '\n') advance();
      if (peek() != '"') throw ParseError("unterminated string", tok.line, tok.column);
      tok.kind = Tok::String;
      tok.text = std::string(src.substr(start, i - start));
      advance();
    } else {
      auto two = [&](char next) { return peek(1) == next; };
      std::size_t len = 1;
      switch (c) {
        case '(': tok.kind = Tok::LParen; break;
        case ')': tok.kind = Tok::RParen; break;
        case ',': tok.kind = Tok::Comma; break;
        case '+': tok.kind = Tok::Plus; break;
        case '-': tok.kind = Tok::Minus; break;
        case '*': tok.kind = Tok::Star; break;
        case '/': tok.kind = Tok::Slash; break;
        case '<':
          tok.kind = two('=') ? Tok::Le : Tok::Lt;
          len = two('=') ? 2 : 1;
          break;
        case '>':
          tok.kind = two('=') ? Tok::Ge : Tok::Gt;
          len = two('=') ? 2 : 1;
          break;
        case '=':
          if (!two('=')) throw ParseError("expected '=='", line, col);
          tok.kind = Tok::EqEq;
          len = 2;
          break;
        case '!':
          if (!two('=')) throw ParseError("expected '!='", line, col);
          tok.kind = Tok::Ne;
          len = 2;
          break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
      }
      tok.text = std::string(src.substr(i, len));
      advance(len);
    }
    out.push_back(std::move(tok));
  }

  Token end;
  end.kind = Tok::End;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

}  // namespace adsv::rules::detail
