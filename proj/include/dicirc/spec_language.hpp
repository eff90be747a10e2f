#pragma once

// Textual notation for trace structures, e.g.
//
//   pref*[a1?;p1!;a0?;p0!] || pref*[b?;(q!|p1!;a0?;q!)]
//
// Binding strength, tightest first: symbols and brackets, `pref`, `||`, `;`,
// `|`. A `#` starts a comment that runs to the end of the line.

#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dicirc/error.hpp"
#include "dicirc/trace.hpp"

namespace dicirc {

struct SpecExpr {
  enum class Kind { Input, Output, Seq, Alt, Star, Pref, Weave };

  Kind kind = Kind::Input;
  Symbol name;                     // leaves only
  std::vector<SpecExpr> children;  // composite nodes

  static SpecExpr input(Symbol s) { return {Kind::Input, std::move(s), {}}; }
  static SpecExpr output(Symbol s) { return {Kind::Output, std::move(s), {}}; }
  static SpecExpr node(Kind k, std::vector<SpecExpr> c) { return {k, {}, std::move(c)}; }

  bool is_leaf() const { return kind == Kind::Input || kind == Kind::Output; }

  friend bool operator==(const SpecExpr&, const SpecExpr&) = default;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, std::string message, std::set<std::string> expected)
      : Error(format(line, column, message, expected)),
        line_(line),
        column_(column),
        message_(std::move(message)),
        expected_(std::move(expected)) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }
  const std::set<std::string>& expected() const { return expected_; }

 private:
  static std::string format(std::size_t line, std::size_t column, const std::string& message,
                            const std::set<std::string>& expected) {
    std::string out = std::to_string(line) + ":" + std::to_string(column) + ": " + message;
    if (!expected.empty()) {
      out += " (expected ";
      bool first = true;
      for (const auto& e : expected) {
        if (!first) out += ", ";
        out += e;
        first = false;
      }
      out += ")";
    }
    return out;
  }

  std::size_t line_;
  std::size_t column_;
  std::string message_;
  std::set<std::string> expected_;
};

namespace detail {

enum class Tok { Ident, Pref, Query, Bang, Semi, Bar, Weave, Star, LBracket, RBracket, LParen, RParen, End };

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::Ident: return "symbol name";
    case Tok::Pref: return "'pref'";
    case Tok::Query: return "'?'";
    case Tok::Bang: return "'!'";
    case Tok::Semi: return "';'";
    case Tok::Bar: return "'|'";
    case Tok::Weave: return "'||'";
    case Tok::Star: return "'*'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    std::size_t l = line, cc = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      std::string word(src.substr(i, j - i));
      out.push_back({word == "pref" ? Tok::Pref : Tok::Ident, word, l, cc});
      advance(j - i);
      continue;
    }
    Tok t;
    std::size_t len = 1;
    switch (c) {
      case '?': t = Tok::Query; break;
      case '!': t = Tok::Bang; break;
      case ';': t = Tok::Semi; break;
      case '*': t = Tok::Star; break;
      case '[': t = Tok::LBracket; break;
      case ']': t = Tok::RBracket; break;
      case '(': t = Tok::LParen; break;
      case ')': t = Tok::RParen; break;
      case '|':
        if (i + 1 < src.size() && src[i + 1] == '|') {
          t = Tok::Weave;
          len = 2;
        } else {
          t = Tok::Bar;
        }
        break;
      default:
        throw ParseError(l, cc, std::string("unexpected character '") + c + "'", {});
    }
    out.push_back({t, std::string(src.substr(i, len)), l, cc});
    advance(len);
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

  SpecExpr parse_all() {
    SpecExpr e = alt();
    expect(Tok::End, {Tok::Semi, Tok::Bar, Tok::Weave});
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }

  [[noreturn]] void fail(std::set<Tok> expected) const {
    std::set<std::string> names;
    for (Tok t : expected) names.insert(describe(t));
    const Token& t = peek();
    if (t.kind == Tok::End && pos_ > 0) {
      // Point at the last real token so the position stays inside the text.
      const Token& last = tokens_[pos_ - 1];
      throw ParseError(last.line, last.column, "unexpected end of input after '" + last.text + "'",
                       std::move(names));
    }
    if (t.kind == Tok::End) throw ParseError(t.line, t.column, "empty expression", std::move(names));
    throw ParseError(t.line, t.column, "unexpected '" + t.text + "'", std::move(names));
  }

  // `also` lists tokens that would have been accepted by an enclosing loop,
  // for the error's expectation set.
  void expect(Tok kind, std::set<Tok> also = {}) {
    if (peek().kind != kind) {
      also.insert(kind);
      fail(std::move(also));
    }
    ++pos_;
  }

  SpecExpr alt() {
    std::vector<SpecExpr> parts{seq()};
    while (peek().kind == Tok::Bar) {
      ++pos_;
      parts.push_back(seq());
    }
    return parts.size() == 1 ? std::move(parts[0]) : SpecExpr::node(SpecExpr::Kind::Alt, std::move(parts));
  }

  SpecExpr seq() {
    std::vector<SpecExpr> parts{weave()};
    while (peek().kind == Tok::Semi) {
      ++pos_;
      parts.push_back(weave());
    }
    return parts.size() == 1 ? std::move(parts[0]) : SpecExpr::node(SpecExpr::Kind::Seq, std::move(parts));
  }

  SpecExpr weave() {
    std::vector<SpecExpr> parts{unary()};
    while (peek().kind == Tok::Weave) {
      ++pos_;
      parts.push_back(unary());
    }
    return parts.size() == 1 ? std::move(parts[0]) : SpecExpr::node(SpecExpr::Kind::Weave, std::move(parts));
  }

  SpecExpr unary() {
    if (peek().kind == Tok::Pref) {
      ++pos_;
      return SpecExpr::node(SpecExpr::Kind::Pref, {unary()});
    }
    return atom();
  }

  SpecExpr atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Ident: {
        Symbol name = t.text;
        ++pos_;
        if (peek().kind == Tok::Query) {
          ++pos_;
          return SpecExpr::input(std::move(name));
        }
        if (peek().kind == Tok::Bang) {
          ++pos_;
          return SpecExpr::output(std::move(name));
        }
        fail({Tok::Query, Tok::Bang});
      }
      case Tok::Star: {
        ++pos_;
        expect(Tok::LBracket);
        SpecExpr body = alt();
        expect(Tok::RBracket, {Tok::Semi, Tok::Bar, Tok::Weave});
        return SpecExpr::node(SpecExpr::Kind::Star, {std::move(body)});
      }
      case Tok::LParen: {
        ++pos_;
        SpecExpr body = alt();
        expect(Tok::RParen, {Tok::Semi, Tok::Bar, Tok::Weave});
        return body;
      }
      default:
        fail({Tok::Ident, Tok::Pref, Tok::Star, Tok::LParen});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

inline int precedence(SpecExpr::Kind k) {
  switch (k) {
    case SpecExpr::Kind::Alt: return 1;
    case SpecExpr::Kind::Seq: return 2;
    case SpecExpr::Kind::Weave: return 3;
    case SpecExpr::Kind::Pref: return 4;
    default: return 5;
  }
}

inline void print_into(std::string& out, const SpecExpr& e, int min_prec) {
  bool paren = precedence(e.kind) < min_prec;
  if (paren) out += '(';
  switch (e.kind) {
    case SpecExpr::Kind::Input: out += e.name + "?"; break;
    case SpecExpr::Kind::Output: out += e.name + "!"; break;
    case SpecExpr::Kind::Star:
      out += "*[";
      print_into(out, e.children.at(0), 0);
      out += "]";
      break;
    case SpecExpr::Kind::Pref:
      out += "pref";
      // Keep a following name from fusing with the keyword.
      if (const auto& c = e.children.at(0); c.kind != SpecExpr::Kind::Star && precedence(c.kind) >= 4)
        out += ' ';
      print_into(out, e.children.at(0), 4);
      break;
    case SpecExpr::Kind::Seq:
    case SpecExpr::Kind::Alt:
    case SpecExpr::Kind::Weave: {
      const char* sep = e.kind == SpecExpr::Kind::Seq ? ";" : e.kind == SpecExpr::Kind::Alt ? "|" : " || ";
      int child_prec = precedence(e.kind) + 1;
      for (std::size_t i = 0; i < e.children.size(); ++i) {
        if (i) out += sep;
        print_into(out, e.children[i], child_prec);
      }
      break;
    }
  }
  if (paren) out += ')';
}

struct Elaborated {
  TraceStructure structure;
  Alphabet marked_inputs;
  Alphabet marked_outputs;
};

inline Elaborated elaborate_node(const SpecExpr& e) {
  using K = SpecExpr::Kind;
  switch (e.kind) {
    case K::Input: return {input_symbol(e.name), {e.name}, {}};
    case K::Output: return {output_symbol(e.name), {}, {e.name}};
    case K::Star: {
      auto inner = elaborate_node(e.children.at(0));
      inner.structure = repeat(inner.structure);
      return inner;
    }
    case K::Pref: {
      auto inner = elaborate_node(e.children.at(0));
      inner.structure = pref(inner.structure);
      return inner;
    }
    case K::Seq:
    case K::Alt:
    case K::Weave: {
      if (e.children.empty()) throw Error("composite expression without operands");
      std::vector<Elaborated> parts;
      for (const auto& c : e.children) parts.push_back(elaborate_node(c));
      if (e.kind != K::Weave) {
        for (std::size_t i = 0; i < parts.size(); ++i)
          for (std::size_t j = 0; j < parts.size(); ++j) {
            if (i == j) continue;
            auto clash = set_intersection(parts[i].marked_inputs, parts[j].marked_outputs);
            if (!clash.empty())
              throw DirectionConflictError("symbol '" + *clash.begin() +
                                           "' is marked both '?' and '!' within one weave operand");
          }
      }
      Elaborated acc = parts[0];
      for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto& p = parts[i];
        acc.structure = e.kind == K::Seq   ? concat(acc.structure, p.structure)
                        : e.kind == K::Alt ? unite(acc.structure, p.structure)
                                           : weave(acc.structure, p.structure);
        acc.marked_inputs = set_union(acc.marked_inputs, p.marked_inputs);
        acc.marked_outputs = set_union(acc.marked_outputs, p.marked_outputs);
      }
      return acc;
    }
  }
  throw Error("unknown expression kind");
}

}  // namespace detail

inline SpecExpr parse(std::string_view text) { return detail::Parser(text).parse_all(); }

// Folds the expression through the trace algebra: `;` concat, `|` union,
// `*[ ]` repetition, `pref` prefix closure, `||` weave.
inline TraceStructure elaborate(const SpecExpr& e) { return detail::elaborate_node(e).structure; }

inline TraceStructure parse_structure(std::string_view text) { return elaborate(parse(text)); }

inline std::string print(const SpecExpr& e) {
  std::string out;
  detail::print_into(out, e, 0);
  return out;
}

// A structure has no retained expression, so it prints as its canonical JSON
// document, flagged as such.
struct Printed {
  std::string text;
  bool is_expression = false;
};

inline Printed print(const TraceStructure& r) { return {to_json(r).dump(), false}; }

}  // namespace dicirc
