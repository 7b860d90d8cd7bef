#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pric3/program.hpp"

namespace pric3 {

namespace detail {

enum class Tok {
  Ident, Number, String,
  LParen, RParen, LBracket, RBracket, Semi, Colon, Comma, Prime,
  Assign, Ne, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash, And, Or, Not, Arrow, DotDot,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
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
  auto is_digit = [&](std::size_t k) { return k < src.size() && std::isdigit(static_cast<unsigned char>(src[k])); };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    SourceLoc loc{line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Tok::Ident, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (is_digit(i) || (c == '.' && is_digit(i + 1))) {
      std::size_t j = i;
      while (is_digit(j)) ++j;
      if (j < src.size() && src[j] == '.' && is_digit(j + 1)) {
        ++j;
        while (is_digit(j)) ++j;
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (is_digit(k)) {
          j = k;
          while (is_digit(j)) ++j;
        }
      }
      out.push_back({Tok::Number, std::string(src.substr(i, j - i)), loc});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '"') throw ModelError("unterminated string", line, col);
      out.push_back({Tok::String, std::string(src.substr(i + 1, j - i - 1)), loc});
      advance(j - i + 1);
      continue;
    }
    auto two = src.substr(i, 2);
    Tok kind;
    std::size_t len = 2;
    if (two == "->") kind = Tok::Arrow;
    else if (two == "..") kind = Tok::DotDot;
    else if (two == "!=") kind = Tok::Ne;
    else if (two == "<=") kind = Tok::Le;
    else if (two == ">=") kind = Tok::Ge;
    else {
      len = 1;
      switch (c) {
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case ';': kind = Tok::Semi; break;
        case ':': kind = Tok::Colon; break;
        case ',': kind = Tok::Comma; break;
        case '\'': kind = Tok::Prime; break;
        case '=': kind = Tok::Assign; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '&': kind = Tok::And; break;
        case '|': kind = Tok::Or; break;
        case '!': kind = Tok::Not; break;
        default: throw ModelError(std::string("unexpected character '") + c + "'", line, col);
      }
    }
    out.push_back({kind, std::string(src.substr(i, len)), loc});
    advance(len);
  }
  out.push_back({Tok::End, "<end of input>", {line, col}});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, const ConstantMap& overrides) : toks_(tokenize(src)), overrides_(overrides) {}

  ProgramModel run() {
    ProgramModel model;
    bool have_module = false;
    while (!at(Tok::End)) {
      if (at_word("mdp") || at_word("dtmc") || at_word("nondeterministic") || at_word("probabilistic")) {
        ++pos_;
      } else if (at_word("const")) {
        parse_const();
      } else if (at_word("module")) {
        if (have_module)
          throw ModelError("only a single module is supported", cur().loc.line, cur().loc.column);
        have_module = true;
        parse_module(model);
      } else if (at_word("label")) {
        parse_label(model);
      } else {
        throw unexpected("'module', 'const' or 'label'");
      }
    }
    if (!have_module) throw ModelError("no module found", cur().loc.line, cur().loc.column);
    resolve(model);
    return model;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_word(std::string_view w) const { return at(Tok::Ident) && cur().text == w; }

  ModelError unexpected(const std::string& wanted) const {
    return ModelError("expected " + wanted + " but found '" + cur().text + "'", cur().loc.line, cur().loc.column);
  }

  const Token& expect(Tok k, const char* what) {
    if (!at(k)) throw unexpected(what);
    return toks_[pos_++];
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) throw unexpected("'" + std::string(w) + "'");
    ++pos_;
  }

  void parse_const() {
    expect_word("const");
    if (at_word("int") || at_word("double") || at_word("bool")) ++pos_;
    const Token& name = expect(Tok::Ident, "constant name");
    std::optional<Probability> value;
    if (at(Tok::Assign)) {
      ++pos_;
      value = eval_constant(*parse_expr());
    }
    expect(Tok::Semi, "';'");
    if (auto it = overrides_.find(name.text); it != overrides_.end()) value = it->second;
    if (value) constants_[name.text] = *value;
    else undefined_.push_back(name.text);
  }

  void parse_module(ProgramModel& model) {
    expect_word("module");
    model.module_name = expect(Tok::Ident, "module name").text;
    while (!at_word("endmodule")) {
      if (at(Tok::End)) throw unexpected("'endmodule'");
      if (at(Tok::LBracket)) model.commands.push_back(parse_command());
      else model.variables.push_back(parse_variable());
    }
    ++pos_;
  }

  std::int64_t constant_int(const ExprPtr& e, const char* what) {
    Probability v = eval_constant(*e);
    if (v.get_den() != 1 || !v.get_num().fits_slong_p())
      throw ModelError(std::string(what) + " must be an integer", e->loc.line, e->loc.column);
    return v.get_num().get_si();
  }

  Variable parse_variable() {
    Variable v;
    const Token& name = expect(Tok::Ident, "variable declaration or command");
    v.name = name.text;
    v.loc = name.loc;
    expect(Tok::Colon, "':'");
    expect(Tok::LBracket, "'['");
    v.lower = constant_int(parse_expr(), "lower bound");
    expect(Tok::DotDot, "'..'");
    v.upper = constant_int(parse_expr(), "upper bound");
    expect(Tok::RBracket, "']'");
    v.init = v.lower;
    if (at_word("init")) {
      ++pos_;
      v.init = constant_int(parse_expr(), "initial value");
    }
    expect(Tok::Semi, "';'");
    return v;
  }

  Command parse_command() {
    Command c;
    c.loc = cur().loc;
    expect(Tok::LBracket, "'['");
    if (at(Tok::Ident)) c.action = toks_[pos_++].text;
    expect(Tok::RBracket, "']'");
    c.guard = parse_expr();
    expect(Tok::Arrow, "'->'");
    do {
      c.branches.push_back(parse_branch());
    } while (at(Tok::Plus) && (++pos_, true));
    expect(Tok::Semi, "';'");
    return c;
  }

  bool at_update() const {
    return (at(Tok::LParen) && peek(1).kind == Tok::Ident && peek(2).kind == Tok::Prime) ||
           (at_word("true") && (peek(1).kind == Tok::Semi || peek(1).kind == Tok::Plus));
  }

  Branch parse_branch() {
    Branch b;
    b.loc = cur().loc;
    if (at_update()) {
      b.probability = 1;
    } else {
      ExprPtr p = parse_expr();
      b.probability = eval_constant(*p);
      expect(Tok::Colon, "':'");
    }
    if (at_word("true")) {
      ++pos_;
      return b;
    }
    do {
      Assignment a;
      a.loc = cur().loc;
      expect(Tok::LParen, "'('");
      a.target = expect(Tok::Ident, "variable").text;
      expect(Tok::Prime, "'''");
      expect(Tok::Assign, "'='");
      a.value = parse_expr();
      expect(Tok::RParen, "')'");
      b.updates.push_back(std::move(a));
    } while (at(Tok::And) && (++pos_, true));
    return b;
  }

  void parse_label(ProgramModel& model) {
    SourceLoc loc = cur().loc;
    expect_word("label");
    std::string name;
    if (at(Tok::String) || at(Tok::Ident)) name = toks_[pos_++].text;
    else throw unexpected("label name");
    expect(Tok::Assign, "'='");
    allow_prime_ = true;
    ExprPtr e = parse_expr();
    allow_prime_ = false;
    if (at(Tok::Semi)) ++pos_;
    if (name == "bad") {
      model.label_name = name;
      model.bad_label = e;
      model.label_loc = loc;
    }
  }

  // Precedence: | < & < ! < comparison < + - < * / < unary minus.
  ExprPtr parse_expr() { return parse_or(); }

  ExprPtr parse_or() {
    auto l = parse_and();
    while (at(Tok::Or)) {
      auto loc = toks_[pos_++].loc;
      l = fold(Expr::make_binary(ExprOp::Or, l, parse_and(), loc));
    }
    return l;
  }
  ExprPtr parse_and() {
    auto l = parse_not();
    while (at(Tok::And)) {
      auto loc = toks_[pos_++].loc;
      l = fold(Expr::make_binary(ExprOp::And, l, parse_not(), loc));
    }
    return l;
  }
  ExprPtr parse_not() {
    if (at(Tok::Not)) {
      auto loc = toks_[pos_++].loc;
      return fold(Expr::make_unary(ExprOp::Not, parse_not(), loc));
    }
    return parse_cmp();
  }
  ExprPtr parse_cmp() {
    auto l = parse_add();
    std::optional<ExprOp> op;
    switch (cur().kind) {
      case Tok::Assign: op = ExprOp::Eq; break;
      case Tok::Ne: op = ExprOp::Ne; break;
      case Tok::Lt: op = ExprOp::Lt; break;
      case Tok::Le: op = ExprOp::Le; break;
      case Tok::Gt: op = ExprOp::Gt; break;
      case Tok::Ge: op = ExprOp::Ge; break;
      default: break;
    }
    if (!op) return l;
    auto loc = toks_[pos_++].loc;
    return fold(Expr::make_binary(*op, l, parse_add(), loc));
  }
  ExprPtr parse_add() {
    auto l = parse_mul();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      auto op = at(Tok::Plus) ? ExprOp::Add : ExprOp::Sub;
      auto loc = toks_[pos_++].loc;
      l = fold(Expr::make_binary(op, l, parse_mul(), loc));
    }
    return l;
  }
  ExprPtr parse_mul() {
    auto l = parse_unary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      auto op = at(Tok::Star) ? ExprOp::Mul : ExprOp::Div;
      auto loc = toks_[pos_++].loc;
      l = fold(Expr::make_binary(op, l, parse_unary(), loc));
    }
    return l;
  }
  ExprPtr parse_unary() {
    if (at(Tok::Minus)) {
      auto loc = toks_[pos_++].loc;
      return fold(Expr::make_unary(ExprOp::Neg, parse_unary(), loc));
    }
    return parse_primary();
  }
  ExprPtr parse_primary() {
    const Token& t = cur();
    if (t.kind == Tok::Number) {
      ++pos_;
      return Expr::make_literal(parse_rational(t.text), t.loc);
    }
    if (t.kind == Tok::LParen) {
      ++pos_;
      auto e = parse_expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (t.kind == Tok::Ident) {
      ++pos_;
      if (t.text == "true" || t.text == "false") return Expr::make_bool(t.text == "true", t.loc);
      if (allow_prime_ && at(Tok::Prime)) ++pos_;
      if (auto it = constants_.find(t.text); it != constants_.end()) return Expr::make_literal(it->second, t.loc);
      for (const auto& u : undefined_)
        if (u == t.text)
          throw ModelError("constant '" + t.text + "' has no value (use --const " + t.text + "=...)", t.loc.line,
                           t.loc.column);
      return Expr::make_var(t.text, -1, t.loc);
    }
    throw unexpected("expression");
  }

  static bool is_constant(const ExprPtr& e) {
    return e->kind == Expr::Kind::Literal || e->kind == Expr::Kind::Boolean;
  }

  static ExprPtr fold(ExprPtr e) {
    bool foldable = e->kind == Expr::Kind::Unary ? is_constant(e->lhs) : is_constant(e->lhs) && is_constant(e->rhs);
    if (!foldable) return e;
    Probability v = eval_constant(*e);
    bool boolean_op = e->op == ExprOp::Not || e->op == ExprOp::And || e->op == ExprOp::Or || e->op == ExprOp::Eq ||
                      e->op == ExprOp::Ne || e->op == ExprOp::Lt || e->op == ExprOp::Le || e->op == ExprOp::Gt ||
                      e->op == ExprOp::Ge;
    if (boolean_op) return Expr::make_bool(v != 0, e->loc);
    return Expr::make_literal(v, e->loc);
  }

  static ExprPtr resolve_expr(const ExprPtr& e, const ProgramModel& m) {
    if (!e) return e;
    switch (e->kind) {
      case Expr::Kind::Variable: return Expr::make_var(e->name, m.variable_index(e->name), e->loc);
      case Expr::Kind::Unary: return Expr::make_unary(e->op, resolve_expr(e->lhs, m), e->loc);
      case Expr::Kind::Binary:
        return Expr::make_binary(e->op, resolve_expr(e->lhs, m), resolve_expr(e->rhs, m), e->loc);
      default: return e;
    }
  }

  static void resolve(ProgramModel& m) {
    for (auto& c : m.commands) {
      c.guard = resolve_expr(c.guard, m);
      for (auto& b : c.branches)
        for (auto& u : b.updates) {
          u.var_index = m.variable_index(u.target);
          u.value = resolve_expr(u.value, m);
        }
    }
    m.bad_label = resolve_expr(m.bad_label, m);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const ConstantMap& overrides_;
  ConstantMap constants_;
  std::vector<std::string> undefined_;
  bool allow_prime_ = false;
};

}  // namespace detail

// Parse without semantic validation. Syntax errors and unresolvable constants still throw.
inline ProgramModel parse_program_unchecked(std::string_view source, const ConstantMap& constants = {}) {
  return detail::Parser(source, constants).run();
}

// Parse and validate; the first diagnostic becomes a ModelError.
inline ProgramModel parse_program(std::string_view source, const ConstantMap& constants = {}) {
  ProgramModel model = parse_program_unchecked(source, constants);
  auto diags = validate_program(model);
  if (!diags.empty()) {
    const auto& d = diags.front();
    throw ModelError(std::string(category_name(d.category)) + ": " + d.message, d.loc.line, d.loc.column);
  }
  return model;
}

}  // namespace pric3
