#include "scp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace scp {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

namespace {

enum class Tok {
  Int,
  Ident,
  Ctor,
  Sym,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
};

bool ident_start(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0 || c == '_';
}
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '\'';
}

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    int l = line;
    int cl = col;
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])) != 0) advance(1);
      out.push_back({Tok::Int, text.substr(start, i - start), l, cl});
    } else if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) advance(1);
      out.push_back({Tok::Ident, text.substr(start, i - start), l, cl});
    } else if (std::isupper(static_cast<unsigned char>(c)) != 0) {
      while (i < text.size() && ident_char(text[i])) advance(1);
      out.push_back({Tok::Ctor, text.substr(start, i - start), l, cl});
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      advance(2);
      out.push_back({Tok::Sym, "->", l, cl});
    } else if (std::string("()[]{};,\\=+-*:").find(c) != std::string::npos) {
      advance(1);
      out.push_back({Tok::Sym, std::string(1, c), l, cl});
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const NameSet kKeywords = {"let", "letrec", "in", "case", "of"};

class Parser {
 public:
  Parser(std::vector<Token> toks, NameSet globals)
      : toks_(std::move(toks)), globals_(std::move(globals)) {}

  Program program() {
    // First pass: collect top-level names so forward references resolve.
    NameSet names;
    int depth = 0;
    bool at_start = true;
    for (const auto& t : toks_) {
      if (at_start && t.kind == Tok::Ident && kKeywords.count(t.text) == 0U)
        names.insert(t.text);
      at_start = false;
      if (t.kind != Tok::Sym) continue;
      if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
      if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
      if (t.text == ";" && depth == 0) at_start = true;
    }
    globals_.insert(names.begin(), names.end());

    Program p;
    if (peek().kind == Tok::End) fail("empty program");
    while (peek().kind != Tok::End) {
      Token name = expect_ident();
      if (name.text == kFixName) fail_at(name, "'fix' is reserved");
      if (p.find(name.text) != nullptr)
        fail_at(name, "duplicate definition of '" + name.text + "'");
      std::vector<std::string> params;
      while (peek().kind == Tok::Ident) params.push_back(expect_ident().text);
      expect("=");
      scopes_.clear();
      for (const auto& x : params) scopes_.push_back(x);
      ExprPtr body = expr();
      scopes_.clear();
      p.defs.push_back(Definition{name.text, mk::lambdas(params, body)});
      if (peek().kind == Tok::End) break;
      expect(";");
    }
    return p;
  }

  ExprPtr single() {
    ExprPtr e = expr();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  NameSet globals_;
  std::vector<std::string> scopes_;
  std::vector<std::string> letrecs_;

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  bool is_sym(const std::string& s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Sym && peek(ahead).text == s;
  }
  bool is_kw(const std::string& s) const {
    return peek().kind == Tok::Ident && peek().text == s;
  }
  Token next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  [[noreturn]] void fail_at(const Token& t, const std::string& msg) const {
    throw ParseError(msg, t.line, t.column);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail_at(peek(), msg); }

  void expect(const std::string& sym) {
    if (!is_sym(sym))
      fail("expected '" + sym + "' but found '" +
           (peek().kind == Tok::End ? std::string("end of input") : peek().text) + "'");
    ++pos_;
  }
  void expect_kw(const std::string& kw) {
    if (!is_kw(kw)) fail("expected '" + kw + "'");
    ++pos_;
  }
  Token expect_ident() {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text) != 0U)
      fail("expected identifier");
    if (peek().text == "_") fail("'_' is not a valid name here");
    return next();
  }

  bool bound_locally(const std::string& x) const {
    return std::find(scopes_.rbegin(), scopes_.rend(), x) != scopes_.rend();
  }

  ExprPtr resolve(const std::string& x) {
    if (bound_locally(x)) return mk::var(x);
    if (std::find(letrecs_.begin(), letrecs_.end(), x) != letrecs_.end() ||
        globals_.count(x) != 0U)
      return mk::global(x);
    return mk::var(x);
  }

  bool starts_keyword_expr() const {
    return is_sym("\\") || is_kw("let") || is_kw("letrec") || is_kw("case");
  }

  ExprPtr expr() {
    if (is_sym("\\")) {
      ++pos_;
      std::vector<std::string> params;
      while (peek().kind == Tok::Ident && kKeywords.count(peek().text) == 0U)
        params.push_back(expect_ident().text);
      if (params.empty()) fail("lambda needs at least one parameter");
      expect("->");
      for (const auto& x : params) scopes_.push_back(x);
      ExprPtr body = expr();
      scopes_.resize(scopes_.size() - params.size());
      return mk::lambdas(params, body);
    }
    if (is_kw("let")) {
      ++pos_;
      std::string x = expect_ident().text;
      expect("=");
      ExprPtr bound = expr();
      expect_kw("in");
      scopes_.push_back(x);
      ExprPtr body = expr();
      scopes_.pop_back();
      return mk::let(x, bound, body);
    }
    if (is_kw("letrec")) {
      Token at = next();
      std::string g = expect_ident().text;
      std::vector<std::string> params;
      while (peek().kind == Tok::Ident && kKeywords.count(peek().text) == 0U)
        params.push_back(expect_ident().text);
      expect("=");
      letrecs_.push_back(g);
      // The letrec name shadows any enclosing local binder of the same name.
      std::vector<std::string> saved = scopes_;
      scopes_.erase(std::remove(scopes_.begin(), scopes_.end(), g), scopes_.end());
      std::size_t outer = scopes_.size();
      for (const auto& x : params) scopes_.push_back(x);
      ExprPtr rhs = mk::lambdas(params, expr());
      scopes_.resize(outer);
      expect_kw("in");
      ExprPtr body = expr();
      scopes_ = std::move(saved);
      letrecs_.pop_back();
      if (!rhs->is<Lambda>()) fail_at(at, "letrec right-hand side must be a lambda");
      if (!rhs->free_vars().empty())
        fail_at(at, "letrec right-hand side must not have free variables (found '" +
                        *rhs->free_vars().begin() + "')");
      return mk::letrec(g, rhs, body);
    }
    if (is_kw("case")) {
      ++pos_;
      ExprPtr scrut = expr();
      expect_kw("of");
      expect("{");
      std::vector<Alt> alts;
      for (;;) {
        if (is_sym("}")) break;
        Token at = peek();
        Pattern p = pattern();
        for (const auto& a : alts)
          if (a.pattern.kind != Pattern::Kind::Default && p.kind == a.pattern.kind &&
              (p.kind == Pattern::Kind::Int ? p.value == a.pattern.value
                                            : p.ctor == a.pattern.ctor))
            fail_at(at, "duplicate case alternative");
        expect("->");
        for (const auto& x : p.vars) scopes_.push_back(x);
        ExprPtr body = expr();
        scopes_.resize(scopes_.size() - p.vars.size());
        alts.push_back(Alt{std::move(p), body});
        if (is_sym(";")) {
          ++pos_;
          continue;
        }
        break;
      }
      expect("}");
      if (alts.empty()) fail("case needs at least one alternative");
      return mk::case_of(scrut, std::move(alts));
    }
    return cons();
  }

  Pattern pattern() {
    if (peek().kind == Tok::Int) return Pattern::integer(Integer(next().text));
    if (is_sym("-") && peek(1).kind == Tok::Int) {
      ++pos_;
      return Pattern::integer(-Integer(next().text));
    }
    if (peek().kind == Tok::Ident && peek().text == "_") {
      ++pos_;
      return Pattern::wildcard();
    }
    if (is_sym("[") && is_sym("]", 1)) {
      pos_ += 2;
      return Pattern::constructor(kNilCtor, {});
    }
    if (peek().kind == Tok::Ctor) return ctor_pattern();
    if (is_sym("(")) {
      ++pos_;
      if (is_sym("-") && peek(1).kind == Tok::Int) {
        ++pos_;
        Pattern p = Pattern::integer(-Integer(next().text));
        expect(")");
        return p;
      }
      if (peek().kind == Tok::Ctor) {
        Pattern p = ctor_pattern();
        expect(")");
        return p;
      }
      std::string x = expect_ident().text;
      expect(":");
      std::string xs = expect_ident().text;
      expect(")");
      if (x == xs) fail("pattern variables must be distinct");
      return Pattern::constructor(kConsCtor, {x, xs});
    }
    fail("expected a pattern");
  }

  Pattern ctor_pattern() {
    std::string k = next().text;
    std::vector<std::string> vars;
    while (peek().kind == Tok::Ident && kKeywords.count(peek().text) == 0U) {
      Token t = expect_ident();
      if (std::find(vars.begin(), vars.end(), t.text) != vars.end())
        fail_at(t, "pattern variables must be distinct");
      vars.push_back(t.text);
    }
    return Pattern::constructor(k, std::move(vars));
  }

  ExprPtr operand(ExprPtr (Parser::*level)()) {
    if (starts_keyword_expr()) return expr();
    return (this->*level)();
  }

  ExprPtr cons() {
    ExprPtr head = arith();
    if (is_sym(":")) {
      ++pos_;
      ExprPtr tail = starts_keyword_expr() ? expr() : cons();
      return mk::cons(head, tail);
    }
    return head;
  }

  ExprPtr arith() {
    ExprPtr lhs = term();
    while (is_sym("+") || is_sym("-")) {
      Op op = next().text == "+" ? Op::Add : Op::Sub;
      lhs = mk::prim(op, lhs, operand(&Parser::term));
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = app();
    while (is_sym("*")) {
      ++pos_;
      lhs = mk::prim(Op::Mul, lhs, operand(&Parser::app));
    }
    return lhs;
  }

  bool atom_start() const {
    const Token& t = peek();
    if (t.kind == Tok::Int || t.kind == Tok::Ctor) return true;
    if (t.kind == Tok::Ident) return kKeywords.count(t.text) == 0U;
    return is_sym("(") || is_sym("[");
  }

  ExprPtr app() {
    if (peek().kind == Tok::Ctor) {
      std::string k = next().text;
      std::vector<ExprPtr> args;
      while (atom_start()) args.push_back(atom());
      return mk::ctor(k, std::move(args));
    }
    if (!atom_start()) fail("expected an expression");
    ExprPtr head = atom();
    while (atom_start()) head = mk::app(head, atom());
    return head;
  }

  ExprPtr atom() {
    Token t = peek();
    if (t.kind == Tok::Int) {
      ++pos_;
      return mk::integer(Integer(t.text));
    }
    if (t.kind == Tok::Ctor) {
      ++pos_;
      return mk::ctor(t.text);
    }
    if (t.kind == Tok::Ident) {
      Token id = expect_ident();
      return resolve(id.text);
    }
    if (is_sym("[")) {
      ++pos_;
      std::vector<ExprPtr> items;
      if (!is_sym("]")) {
        items.push_back(expr());
        while (is_sym(",")) {
          ++pos_;
          items.push_back(expr());
        }
      }
      expect("]");
      return mk::list(items);
    }
    if (is_sym("(")) {
      ++pos_;
      if ((is_sym("+") || is_sym("-") || is_sym("*")) && is_sym(")", 1)) {
        std::string s = next().text;
        ++pos_;
        Op op = s == "+" ? Op::Add : s == "-" ? Op::Sub : Op::Mul;
        std::string a = "a";
        std::string b = "b";
        return mk::lambdas({a, b}, mk::prim(op, mk::var(a), mk::var(b)));
      }
      if (is_sym("-") && peek(1).kind == Tok::Int && is_sym(")", 2)) {
        ++pos_;
        Integer n = -Integer(next().text);
        ++pos_;
        return mk::integer(n);
      }
      ExprPtr e = expr();
      expect(")");
      return e;
    }
    fail("expected an expression");
  }
};

// ---------------------------------------------------------------------------
// Printing

enum Level { kTop = 0, kCons = 1, kAdd = 2, kMul = 3, kApp = 4, kAtom = 5 };

class Printer {
 public:
  std::ostringstream out;

  void expr(const ExprPtr& e, int level, int indent) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, IntLit>) {
            if (n.value < 0)
              out << "(" << n.value << ")";
            else
              out << n.value;
          } else if constexpr (std::is_same_v<T, Var>) {
            out << n.name;
          } else if constexpr (std::is_same_v<T, Global>) {
            out << n.name;
          } else if constexpr (std::is_same_v<T, App>) {
            Spine sp = spine_of(e);
            open(level > kApp);
            expr(sp.head, sp.head->is<CtorApp>() ? kAtom : kApp, indent);
            for (const auto& a : sp.args) {
              out << " ";
              expr(a, kAtom, indent);
            }
            close(level > kApp);
          } else if constexpr (std::is_same_v<T, Lambda>) {
            LambdaView v = lambda_view(e);
            open(level > kTop);
            out << "\\";
            for (std::size_t i = 0; i < v.params.size(); ++i)
              out << (i == 0 ? "" : " ") << v.params[i];
            out << " -> ";
            expr(v.body, kTop, indent);
            close(level > kTop);
          } else if constexpr (std::is_same_v<T, CtorApp>) {
            ctor(e, n, level, indent);
          } else if constexpr (std::is_same_v<T, PrimOp>) {
            int mine = n.op == Op::Mul ? kMul : kAdd;
            open(level > mine);
            expr(n.lhs, mine, indent);
            out << " " << op_symbol(n.op) << " ";
            expr(n.rhs, mine + 1, indent);
            close(level > mine);
          } else if constexpr (std::is_same_v<T, Case>) {
            open(level > kTop);
            out << "case ";
            expr(n.scrutinee, kTop, indent);
            out << " of {";
            for (std::size_t i = 0; i < n.alts.size(); ++i) {
              newline(indent + 2);
              out << pretty(n.alts[i].pattern) << " -> ";
              expr(n.alts[i].body, kTop, indent + 4);
              if (i + 1 < n.alts.size()) out << ";";
            }
            newline(indent);
            out << "}";
            close(level > kTop);
          } else if constexpr (std::is_same_v<T, Let>) {
            open(level > kTop);
            out << "let " << n.binder << " = ";
            expr(n.bound, kTop, indent + 2);
            out << " in";
            newline(indent);
            expr(n.body, kTop, indent);
            close(level > kTop);
          } else if constexpr (std::is_same_v<T, Letrec>) {
            open(level > kTop);
            LambdaView v = lambda_view(n.rhs);
            out << "letrec " << n.name;
            for (const auto& x : v.params) out << " " << x;
            out << " = ";
            newline(indent + 4);
            expr(v.body, kTop, indent + 4);
            newline(indent);
            out << "in ";
            expr(n.body, kTop, indent);
            close(level > kTop);
          } else {
            out << "<<" << n.owner << ": ";
            expr(n.term, kTop, indent);
            out << ">>";
          }
        },
        e->node());
  }

 private:
  void open(bool paren) {
    if (paren) out << "(";
  }
  void close(bool paren) {
    if (paren) out << ")";
  }
  void newline(int indent) { out << "\n" << std::string(static_cast<std::size_t>(indent), ' '); }

  void ctor(const ExprPtr& e, const CtorApp& n, int level, int indent) {
    if (n.ctor == kNilCtor && n.args.empty()) {
      out << "[]";
      return;
    }
    if (n.ctor == kConsCtor && n.args.size() == 2) {
      // Proper lists print with list sugar, others with ':'.
      std::vector<ExprPtr> items;
      ExprPtr cur = e;
      while (const auto* c = cur->as<CtorApp>()) {
        if (c->ctor != kConsCtor || c->args.size() != 2) break;
        items.push_back(c->args[0]);
        cur = c->args[1];
      }
      const auto* end = cur->as<CtorApp>();
      if (end != nullptr && end->ctor == kNilCtor && end->args.empty()) {
        out << "[";
        for (std::size_t i = 0; i < items.size(); ++i) {
          if (i > 0) out << ", ";
          expr(items[i], kTop, indent);
        }
        out << "]";
        return;
      }
      open(level > kCons);
      expr(n.args[0], kCons + 1, indent);
      out << " : ";
      expr(n.args[1], kCons, indent);
      close(level > kCons);
      return;
    }
    bool paren = !n.args.empty() && level > kApp;
    open(paren);
    out << n.ctor;
    for (const auto& a : n.args) {
      out << " ";
      expr(a, kAtom, indent);
    }
    close(paren);
  }
};

}  // namespace

Program parse_program(const std::string& text) {
  Parser p(lex(text), {});
  return p.program();
}

ExprPtr parse_expression(const std::string& text, const NameSet& globals) {
  Parser p(lex(text), globals);
  return p.single();
}

std::string pretty(const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Int: {
      std::ostringstream s;
      s << p.value;
      return s.str();
    }
    case Pattern::Kind::Default:
      return "_";
    case Pattern::Kind::Ctor:
      break;
  }
  if (p.ctor == kNilCtor && p.vars.empty()) return "[]";
  if (p.ctor == kConsCtor && p.vars.size() == 2) return "(" + p.vars[0] + ":" + p.vars[1] + ")";
  std::string s = p.ctor;
  for (const auto& x : p.vars) s += " " + x;
  return s;
}

std::string pretty(const ExprPtr& e) {
  Printer pr;
  pr.expr(e, kTop, 0);
  return pr.out.str();
}

std::string pretty(const Program& p) {
  std::string out;
  for (const auto& d : p.defs) {
    LambdaView v = lambda_view(d.value);
    Printer pr;
    pr.out << d.name;
    for (const auto& x : v.params) pr.out << " " << x;
    pr.out << " = ";
    pr.expr(v.body, kTop, 2);
    out += pr.out.str() + ";\n";
  }
  return out;
}

}  // namespace scp
