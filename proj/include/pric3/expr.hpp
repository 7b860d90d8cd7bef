#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "pric3/errors.hpp"
#include "pric3/rational.hpp"

namespace pric3 {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class ExprOp { Add, Sub, Mul, Div, Neg, Not, And, Or, Eq, Ne, Lt, Le, Gt, Ge };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Literal, Boolean, Variable, Unary, Binary };

  Kind kind = Kind::Literal;
  Probability literal;
  bool boolean = false;
  std::string name;
  int var_index = -1;  // -1 while unresolved or undeclared
  ExprOp op = ExprOp::Add;
  ExprPtr lhs;
  ExprPtr rhs;
  SourceLoc loc;

  static ExprPtr make_literal(Probability v, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Literal;
    e->literal = std::move(v);
    e->loc = loc;
    return e;
  }
  static ExprPtr make_bool(bool b, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Boolean;
    e->boolean = b;
    e->loc = loc;
    return e;
  }
  static ExprPtr make_var(std::string name, int index, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Variable;
    e->name = std::move(name);
    e->var_index = index;
    e->loc = loc;
    return e;
  }
  static ExprPtr make_unary(ExprOp op, ExprPtr child, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Unary;
    e->op = op;
    e->lhs = std::move(child);
    e->loc = loc;
    return e;
  }
  static ExprPtr make_binary(ExprOp op, ExprPtr l, ExprPtr r, SourceLoc loc = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::Binary;
    e->op = op;
    e->lhs = std::move(l);
    e->rhs = std::move(r);
    e->loc = loc;
    return e;
  }
};

inline const char* op_symbol(ExprOp op) {
  switch (op) {
    case ExprOp::Add: return "+";
    case ExprOp::Sub: return "-";
    case ExprOp::Mul: return "*";
    case ExprOp::Div: return "/";
    case ExprOp::Neg: return "-";
    case ExprOp::Not: return "!";
    case ExprOp::And: return "&";
    case ExprOp::Or: return "|";
    case ExprOp::Eq: return "=";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
  }
  return "?";
}

// Source locations and resolved indices are ignored.
inline bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return a == b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Literal: return a->literal == b->literal;
    case Expr::Kind::Boolean: return a->boolean == b->boolean;
    case Expr::Kind::Variable: return a->name == b->name;
    case Expr::Kind::Unary: return a->op == b->op && structurally_equal(a->lhs, b->lhs);
    case Expr::Kind::Binary:
      return a->op == b->op && structurally_equal(a->lhs, b->lhs) && structurally_equal(a->rhs, b->rhs);
  }
  return false;
}

inline std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      if (e.literal.get_den() == 1 && e.literal >= 0) return to_string(e.literal);
      return "(" + to_string(e.literal) + ")";
    case Expr::Kind::Boolean: return e.boolean ? "true" : "false";
    case Expr::Kind::Variable: return e.name;
    case Expr::Kind::Unary: return std::string(op_symbol(e.op)) + "(" + print_expr(*e.lhs) + ")";
    case Expr::Kind::Binary:
      return "(" + print_expr(*e.lhs) + " " + op_symbol(e.op) + " " + print_expr(*e.rhs) + ")";
  }
  return {};
}

template <class Fn>
void for_each_variable(const ExprPtr& e, Fn&& fn) {
  if (!e) return;
  if (e->kind == Expr::Kind::Variable) fn(*e);
  for_each_variable(e->lhs, fn);
  for_each_variable(e->rhs, fn);
}

// Arithmetic over rationals with booleans as 0/1; used for constant folding.
inline Probability eval_constant(const Expr& e) {
  auto truth = [](bool b) { return Probability(b ? 1 : 0); };
  switch (e.kind) {
    case Expr::Kind::Literal: return e.literal;
    case Expr::Kind::Boolean: return truth(e.boolean);
    case Expr::Kind::Variable:
      throw ModelError("'" + e.name + "' is not a constant", e.loc.line, e.loc.column);
    case Expr::Kind::Unary: {
      Probability v = eval_constant(*e.lhs);
      return e.op == ExprOp::Neg ? Probability(-v) : truth(v == 0);
    }
    case Expr::Kind::Binary: {
      Probability l = eval_constant(*e.lhs), r = eval_constant(*e.rhs);
      switch (e.op) {
        case ExprOp::Add: return l + r;
        case ExprOp::Sub: return l - r;
        case ExprOp::Mul: return l * r;
        case ExprOp::Div:
          if (r == 0) throw ModelError("division by zero", e.loc.line, e.loc.column);
          return l / r;
        case ExprOp::And: return truth(l != 0 && r != 0);
        case ExprOp::Or: return truth(l != 0 || r != 0);
        case ExprOp::Eq: return truth(l == r);
        case ExprOp::Ne: return truth(l != r);
        case ExprOp::Lt: return truth(l < r);
        case ExprOp::Le: return truth(l <= r);
        case ExprOp::Gt: return truth(l > r);
        case ExprOp::Ge: return truth(l >= r);
        default: break;
      }
    }
  }
  throw InternalError("malformed expression");
}

// Integer evaluation over a state valuation; booleans are 0/1.
inline std::int64_t eval_int(const Expr& e, std::span<const std::int64_t> val) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      if (e.literal.get_den() != 1 || !e.literal.get_num().fits_slong_p())
        throw ModelError("non-integer value " + to_string(e.literal) + " in a state expression", e.loc.line,
                         e.loc.column);
      return e.literal.get_num().get_si();
    case Expr::Kind::Boolean: return e.boolean ? 1 : 0;
    case Expr::Kind::Variable:
      if (e.var_index < 0) throw ModelError("undeclared variable '" + e.name + "'", e.loc.line, e.loc.column);
      return val[static_cast<std::size_t>(e.var_index)];
    case Expr::Kind::Unary: {
      auto v = eval_int(*e.lhs, val);
      return e.op == ExprOp::Neg ? -v : (v == 0 ? 1 : 0);
    }
    case Expr::Kind::Binary: {
      if (e.op == ExprOp::And) return eval_int(*e.lhs, val) != 0 && eval_int(*e.rhs, val) != 0;
      if (e.op == ExprOp::Or) return eval_int(*e.lhs, val) != 0 || eval_int(*e.rhs, val) != 0;
      auto l = eval_int(*e.lhs, val), r = eval_int(*e.rhs, val);
      switch (e.op) {
        case ExprOp::Add: return l + r;
        case ExprOp::Sub: return l - r;
        case ExprOp::Mul: return l * r;
        case ExprOp::Div:
          if (r == 0 || l % r != 0)
            throw ModelError("inexact integer division", e.loc.line, e.loc.column);
          return l / r;
        case ExprOp::Eq: return l == r;
        case ExprOp::Ne: return l != r;
        case ExprOp::Lt: return l < r;
        case ExprOp::Le: return l <= r;
        case ExprOp::Gt: return l > r;
        case ExprOp::Ge: return l >= r;
        default: break;
      }
    }
  }
  throw InternalError("malformed expression");
}

}  // namespace pric3
