#include <cctype>
#include <limits>
#include <string>
#include <vector>

#include "stlrisk/formula.hpp"

namespace stlrisk {

namespace {

enum class Tok {
  End,
  True,
  Ident,
  Not,
  And,
  Or,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Number,
  Inf,
  Until,
  UntilMatching,
  SinceTok,
  SinceMatching,
  FutureEventually,
  FutureAlways,
  PastEventually,
  PastAlways,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, "", 0.0, pos_});
        return out;
      }
      const std::size_t start = pos_;
      const char c = text_[pos_];
      if (c == '!') {
        out.push_back({Tok::Not, "!", 0.0, start});
        ++pos_;
      } else if (c == '&') {
        out.push_back({Tok::And, "&", 0.0, start});
        ++pos_;
      } else if (c == '|') {
        out.push_back({Tok::Or, "|", 0.0, start});
        ++pos_;
      } else if (c == '(') {
        out.push_back({Tok::LParen, "(", 0.0, start});
        ++pos_;
      } else if (c == ')') {
        out.push_back({Tok::RParen, ")", 0.0, start});
        ++pos_;
      } else if (c == '[') {
        out.push_back({Tok::LBracket, "[", 0.0, start});
        ++pos_;
      } else if (c == ']') {
        out.push_back({Tok::RBracket, "]", 0.0, start});
        ++pos_;
      } else if (c == ',') {
        out.push_back({Tok::Comma, ",", 0.0, start});
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(lex_number());
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(lex_word());
      } else {
        throw ParseError(std::string("unknown token '") + c + "'", start);
      }
    }
  }

private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  Token lex_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      if (pos_ >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        throw ParseError("malformed number", start);
      }
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
      }
    }
    const std::string s = text_.substr(start, pos_ - start);
    return {Tok::Number, s, std::stod(s), start};
  }

  Token lex_word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string s = text_.substr(start, pos_ - start);
    Tok kind = Tok::Ident;
    if (s == "true") kind = Tok::True;
    else if (s == "inf") kind = Tok::Inf;
    else if (s == "U") kind = Tok::Until;
    else if (s == "UM") kind = Tok::UntilMatching;
    else if (s == "PU") kind = Tok::SinceTok;
    else if (s == "PUM") kind = Tok::SinceMatching;
    else if (s == "F") kind = Tok::FutureEventually;
    else if (s == "G") kind = Tok::FutureAlways;
    else if (s == "PF") kind = Tok::PastEventually;
    else if (s == "PG") kind = Tok::PastAlways;
    return {kind, s, 0.0, start};
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  FormulaPtr run() {
    FormulaPtr phi = parse_until();
    expect(Tok::End, "unexpected trailing input");
    return phi;
  }

private:
  const Token& peek() const { return tokens_[idx_]; }
  Token advance() { return tokens_[idx_++]; }

  void expect(Tok kind, const char* msg) {
    if (peek().kind != kind) throw ParseError(msg, peek().pos);
    advance();
  }

  // Lowest precedence, right associative.
  FormulaPtr parse_until() {
    FormulaPtr left = parse_or();
    const Tok k = peek().kind;
    if (k == Tok::Until || k == Tok::UntilMatching || k == Tok::SinceTok ||
        k == Tok::SinceMatching) {
      advance();
      Interval iv = parse_interval();
      FormulaPtr right = parse_until();
      const UntilFlavor flavor = (k == Tok::UntilMatching || k == Tok::SinceMatching)
                                     ? UntilFlavor::NonStrictMatching
                                     : UntilFlavor::StrictNonMatching;
      if (k == Tok::Until || k == Tok::UntilMatching) {
        return Formula::until(left, right, iv, flavor);
      }
      return Formula::since(left, right, iv, flavor);
    }
    return left;
  }

  FormulaPtr parse_or() {
    FormulaPtr left = parse_and();
    while (peek().kind == Tok::Or) {
      advance();
      left = Formula::disjunction(left, parse_and());
    }
    return left;
  }

  FormulaPtr parse_and() {
    FormulaPtr left = parse_unary();
    while (peek().kind == Tok::And) {
      advance();
      left = Formula::conjunction(left, parse_unary());
    }
    return left;
  }

  FormulaPtr parse_unary() {
    switch (peek().kind) {
    case Tok::Not:
      advance();
      return Formula::negation(parse_unary());
    case Tok::FutureEventually:
    case Tok::FutureAlways:
    case Tok::PastEventually:
    case Tok::PastAlways: {
      const Token op = advance();
      Interval iv = parse_interval();
      FormulaPtr child = parse_unary();
      const TimeDirection dir = (op.kind == Tok::PastEventually ||
                                 op.kind == Tok::PastAlways)
                                    ? TimeDirection::Past
                                    : TimeDirection::Future;
      if (op.kind == Tok::FutureEventually || op.kind == Tok::PastEventually) {
        return Formula::eventually(child, iv, dir);
      }
      return Formula::always(child, iv, dir);
    }
    default:
      return parse_atom();
    }
  }

  FormulaPtr parse_atom() {
    const Token t = peek();
    switch (t.kind) {
    case Tok::True:
      advance();
      return Formula::truth();
    case Tok::Ident:
      advance();
      return Formula::predicate(t.text);
    case Tok::LParen: {
      advance();
      FormulaPtr inner = parse_until();
      expect(Tok::RParen, "expected ')'");
      return inner;
    }
    default:
      throw ParseError("expected formula", t.pos);
    }
  }

  Interval parse_interval() {
    expect(Tok::LBracket, "temporal operator requires interval '[lo,hi]'");
    const Token lo_tok = peek();
    if (lo_tok.kind != Tok::Number) {
      throw ParseError("interval lower bound must be a nonnegative number",
                       lo_tok.pos);
    }
    advance();
    expect(Tok::Comma, "expected ',' in interval");
    const Token hi_tok = peek();
    double hi;
    if (hi_tok.kind == Tok::Number) {
      hi = hi_tok.number;
    } else if (hi_tok.kind == Tok::Inf) {
      hi = std::numeric_limits<double>::infinity();
    } else {
      throw ParseError("interval upper bound must be a number or 'inf'",
                       hi_tok.pos);
    }
    advance();
    expect(Tok::RBracket, "expected ']' after interval");
    if (lo_tok.number > hi) {
      throw ParseError("malformed interval: lower bound exceeds upper bound",
                       lo_tok.pos);
    }
    return Interval(lo_tok.number, hi);
  }

  std::vector<Token> tokens_;
  std::size_t idx_ = 0;
};

} // namespace

FormulaPtr parse_formula(const std::string& text) {
  return Parser(Lexer(text).run()).run();
}

} // namespace stlrisk
