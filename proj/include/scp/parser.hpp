#pragma once

// Concrete syntax: a small Haskell-like surface language.
//
//   program := def+          def := ident ident* "=" expr ";"
//   expr    := "\" ident+ "->" expr | "let" ident "=" expr "in" expr
//            | "letrec" ident ident* "=" expr "in" expr
//            | "case" expr "of" "{" alt (";" alt)* "}" | cons
//   cons    := arith (":" cons)?
//   arith   := term (("+" | "-") term)*      term := app ("*" app)*
//   app     := atom+
//   atom    := int | ident | Ctor | "(" expr ")" | "(-" int ")" | "(+)"
//            | "[" "]" | "[" expr ("," expr)* "]"
//   pat     := int | "-" int | Ctor ident* | "[]" | "(" ident ":" ident ")"
//            | "(" Ctor ident* ")" | "_"
//
// Comments run from "--" to end of line.

#include "scp/syntax.hpp"

#include <stdexcept>
#include <string>

namespace scp {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

Program parse_program(const std::string& text);

/// Parses a single expression. Identifiers in `globals` that are not bound
/// locally become function symbols; every other free identifier is a
/// variable.
ExprPtr parse_expression(const std::string& text, const NameSet& globals = {});

std::string pretty(const ExprPtr& e);
std::string pretty(const Program& p);
std::string pretty(const Pattern& p);

}  // namespace scp
