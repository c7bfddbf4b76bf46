#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cabl/kb.hpp"

namespace cabl::logic {

struct ParseError : std::runtime_error {
  ParseError(int line, int column, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + msg),
        line(line),
        column(column) {}
  int line;
  int column;
};

/// Parses a Horn-clause program.
///
/// Grammar:
///   program := (decl | clause | comment)*
///   decl    := "@concept" name "/" digits "." | "@target" name "/" digits "."
///   clause  := atom "." | atom ":-" body "."
///   body    := literal ("," literal)*
///   literal := atom | term "is" expr | term ("="|"\="|"<"|"=<"|">"|">=") term
///   atom    := name [ "(" term ("," term)* ")" ]
///   term    := VAR | name [ "(" ... ")" ] | INT | "[" [term ("," term)* ["|" term]] "]"
///   expr    := expr ("+"|"-") expr | expr ("*"|"//"|"mod") expr
///            | "abs" "(" expr ")" | "(" expr ")" | INT | VAR
///   comment := "%" to end of line
///
/// VAR = [A-Z_][A-Za-z0-9_]*, name = [a-z][A-Za-z0-9_]*.
/// Throws ParseError with line/column, or KbError for semantic violations.
KnowledgeBase parse_program(std::string_view text);

}  // namespace cabl::logic
