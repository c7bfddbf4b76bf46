#include "cabl/parser.hpp"

#include <cctype>
#include <optional>
#include <vector>

namespace cabl::logic {

namespace {

enum class Tok {
  Name,     // lowercase identifier
  Var,      // uppercase/underscore identifier
  Int,
  Punct,    // one of ( ) [ ] | , . :- = \= < =< > >= + - * // mod @ /
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  int line = 1;
  int col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(tok_.line, tok_.col, msg);
  }

 private:
  void advance() {
    skip_space();
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_ = {Tok::End, "", 0, line_, col_};
      return;
    }
    char c = src_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      tok_ = {Tok::Name, read_ident(), 0, tok_.line, tok_.col};
      return;
    }
    if (std::isupper(static_cast<unsigned char>(c)) || c == '_') {
      tok_ = {Tok::Var, read_ident(), 0, tok_.line, tok_.col};
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        v = v * 10 + (src_[pos_] - '0');
        bump();
      }
      tok_ = {Tok::Int, "", v, tok_.line, tok_.col};
      return;
    }
    // multi-char punctuation first
    auto two = src_.substr(pos_, 2);
    for (std::string_view p : {":-", "\\=", "=<", ">=", "//"}) {
      if (two == p) {
        bump();
        bump();
        tok_ = {Tok::Punct, std::string(p), 0, tok_.line, tok_.col};
        return;
      }
    }
    static const std::string singles = "()[]|,.=<>+-*@/";
    if (singles.find(c) != std::string::npos) {
      bump();
      tok_ = {Tok::Punct, std::string(1, c), 0, tok_.line, tok_.col};
      return;
    }
    throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
  }

  std::string read_ident() {
    std::string out;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(c);
        bump();
      } else {
        break;
      }
    }
    return out;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  KnowledgeBase parse() {
    while (lex_.peek().kind != Tok::End) {
      if (is_punct("@")) {
        parse_decl();
      } else {
        parse_clause();
      }
    }
    return KnowledgeBase(std::move(rules_), std::move(concepts_), std::move(target_));
  }

 private:
  bool is_punct(std::string_view p) const {
    return lex_.peek().kind == Tok::Punct && lex_.peek().text == p;
  }
  bool is_name(std::string_view n) const {
    return lex_.peek().kind == Tok::Name && lex_.peek().text == n;
  }

  Token expect_punct(std::string_view p, const std::string& what) {
    if (!is_punct(p)) lex_.fail("expected '" + std::string(p) + "' " + what);
    return lex_.next();
  }

  void parse_decl() {
    lex_.next();  // '@'
    if (lex_.peek().kind != Tok::Name) lex_.fail("expected 'concept' or 'target' after '@'");
    std::string which = lex_.next().text;
    if (which != "concept" && which != "target")
      lex_.fail("unknown declaration '@" + which + "'");
    if (lex_.peek().kind != Tok::Name) lex_.fail("expected predicate name in declaration");
    std::string name = lex_.next().text;
    expect_punct("/", "in declaration");
    if (lex_.peek().kind != Tok::Int) lex_.fail("expected arity after '/'");
    int arity = static_cast<int>(lex_.next().value);
    expect_punct(".", "after declaration");
    PredKey key{name, arity};
    if (which == "concept") {
      for (const PredKey& c : concepts_)
        if (c == key) lex_.fail("duplicate @concept declaration " + key.to_string());
      concepts_.push_back(key);
    } else {
      if (!target_.name.empty()) lex_.fail("duplicate @target declaration");
      target_ = key;
    }
  }

  void parse_clause() {
    Atom head = parse_atom();
    std::vector<Literal> body;
    if (is_punct(":-")) {
      lex_.next();
      body.push_back(parse_literal());
      while (is_punct(",")) {
        lex_.next();
        body.push_back(parse_literal());
      }
    }
    expect_punct(".", "at end of clause");
    rules_.push_back(Rule{static_cast<int>(rules_.size()), std::move(head), std::move(body)});
  }

  Atom parse_atom() {
    if (lex_.peek().kind != Tok::Name) lex_.fail("expected predicate name");
    Token t = lex_.next();
    std::vector<Term> args;
    if (is_punct("(")) {
      lex_.next();
      args.push_back(parse_term());
      while (is_punct(",")) {
        lex_.next();
        args.push_back(parse_term());
      }
      expect_punct(")", "to close argument list");
    }
    return Atom{t.text, std::move(args)};
  }

  Literal parse_literal() {
    Term lhs = parse_term();
    if (is_name("is")) {
      lex_.next();
      return Builtin{BuiltinKind::Is, std::move(lhs), parse_expr()};
    }
    for (auto [p, k] : {std::pair<std::string_view, BuiltinKind>{"=", BuiltinKind::Eq},
                        {"\\=", BuiltinKind::Neq},
                        {"<", BuiltinKind::Lt},
                        {"=<", BuiltinKind::Le},
                        {">", BuiltinKind::Gt},
                        {">=", BuiltinKind::Ge}}) {
      if (is_punct(p)) {
        lex_.next();
        return Builtin{k, std::move(lhs), parse_term()};
      }
    }
    // Plain atom: the term must be a symbol or a lowercase compound.
    if (lhs.is_symbol() && !lhs.is_nil()) return Atom{lhs.name(), {}};
    if (lhs.is_compound() && !lhs.is_cons())
      return Atom{lhs.name(), lhs.args()};
    lex_.fail("expected an atom or builtin literal");
  }

  Term parse_term() {
    const Token& t = lex_.peek();
    switch (t.kind) {
      case Tok::Var:
        return Term::var(lex_.next().text);
      case Tok::Int:
        return Term::integer(lex_.next().value);
      case Tok::Name: {
        Token name = lex_.next();
        if (is_punct("(")) {
          lex_.next();
          std::vector<Term> args;
          args.push_back(parse_term());
          while (is_punct(",")) {
            lex_.next();
            args.push_back(parse_term());
          }
          expect_punct(")", "to close term arguments");
          return Term::compound(name.text, std::move(args));
        }
        return Term::symbol(name.text);
      }
      case Tok::Punct:
        if (t.text == "[") return parse_list();
        lex_.fail("unexpected '" + t.text + "' in term");
      default:
        lex_.fail("expected a term");
    }
  }

  Term parse_list() {
    Token open = lex_.next();  // '['
    std::vector<Term> items;
    if (is_punct("]")) {
      lex_.next();
      return Term::nil();
    }
    items.push_back(parse_term());
    while (is_punct(",")) {
      lex_.next();
      items.push_back(parse_term());
    }
    Term tail = Term::nil();
    if (is_punct("|")) {
      lex_.next();
      int tl = lex_.peek().line, tc = lex_.peek().col;
      tail = parse_term();
      if (!tail.is_var() && !tail.is_nil() && !tail.is_cons())
        throw ParseError(tl, tc, "list tail must be a variable or a list");
    }
    expect_punct("]", "to close list");
    (void)open;
    return Term::list(std::move(items), std::move(tail));
  }

  // expr := mul (("+"|"-") mul)* ; mul := primary (("*"|"//"|"mod") primary)*
  Term parse_expr() {
    Term lhs = parse_mul();
    while (is_punct("+") || is_punct("-")) {
      std::string op = lex_.next().text;
      Term rhs = parse_mul();
      lhs = Term::compound(op, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Term parse_mul() {
    Term lhs = parse_primary();
    while (is_punct("*") || is_punct("//") || is_name("mod")) {
      std::string op = lex_.next().text;
      Term rhs = parse_primary();
      lhs = Term::compound(op, {std::move(lhs), std::move(rhs)});
    }
    return lhs;
  }

  Term parse_primary() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Int) return Term::integer(lex_.next().value);
    if (t.kind == Tok::Var) return Term::var(lex_.next().text);
    if (t.kind == Tok::Name && t.text == "abs") {
      lex_.next();
      expect_punct("(", "after abs");
      Term inner = parse_expr();
      expect_punct(")", "to close abs");
      return Term::compound("abs", {std::move(inner)});
    }
    if (is_punct("(")) {
      lex_.next();
      Term inner = parse_expr();
      expect_punct(")", "to close expression");
      return inner;
    }
    lex_.fail("expected an arithmetic expression");
  }

  Lexer lex_;
  std::vector<Rule> rules_;
  std::vector<PredKey> concepts_;
  PredKey target_;
};

}  // namespace

KnowledgeBase parse_program(std::string_view text) { return Parser(text).parse(); }

}  // namespace cabl::logic
