#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pric3/expr.hpp"

namespace pric3 {

struct Variable {
  std::string name;
  std::int64_t lower = 0;
  std::int64_t upper = 0;
  std::int64_t init = 0;
  SourceLoc loc;
};

struct Assignment {
  std::string target;
  int var_index = -1;
  ExprPtr value;
  SourceLoc loc;
};

struct Branch {
  Probability probability;
  std::vector<Assignment> updates;
  SourceLoc loc;
};

struct Command {
  std::string action;
  ExprPtr guard;
  std::vector<Branch> branches;
  SourceLoc loc;
};

struct ProgramModel {
  std::string module_name;
  std::vector<Variable> variables;
  std::vector<Command> commands;
  std::string label_name = "bad";
  ExprPtr bad_label;  // null when the source has no bad label
  SourceLoc label_loc;

  int variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
      if (variables[i].name == name) return static_cast<int>(i);
    return -1;
  }
};

using ConstantMap = std::map<std::string, Probability>;

enum class DiagnosticCategory {
  Syntax,
  ProbabilitySum,
  ProbabilityRange,
  Range,
  UndeclaredVariable,
  DuplicateVariable,
  MissingLabel,
};

inline const char* category_name(DiagnosticCategory c) {
  switch (c) {
    case DiagnosticCategory::Syntax: return "syntax";
    case DiagnosticCategory::ProbabilitySum: return "probability-sum";
    case DiagnosticCategory::ProbabilityRange: return "probability-range";
    case DiagnosticCategory::Range: return "range";
    case DiagnosticCategory::UndeclaredVariable: return "undeclared-variable";
    case DiagnosticCategory::DuplicateVariable: return "duplicate-variable";
    case DiagnosticCategory::MissingLabel: return "missing-label";
  }
  return "unknown";
}

struct Diagnostic {
  DiagnosticCategory category;
  std::string message;
  SourceLoc loc;

  std::string to_string() const {
    std::ostringstream os;
    if (loc.line > 0) os << loc.line << ":" << loc.column << ": ";
    os << category_name(category) << ": " << message;
    return os.str();
  }
};

inline std::vector<Diagnostic> validate_program(const ProgramModel& model) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const auto& v : model.variables) {
    if (!names.insert(v.name).second)
      out.push_back({DiagnosticCategory::DuplicateVariable, "variable '" + v.name + "' declared twice", v.loc});
    if (v.lower > v.upper)
      out.push_back({DiagnosticCategory::Range,
                     "empty range [" + std::to_string(v.lower) + ".." + std::to_string(v.upper) + "] for '" + v.name + "'",
                     v.loc});
    else if (v.init < v.lower || v.init > v.upper)
      out.push_back({DiagnosticCategory::Range,
                     "initial value " + std::to_string(v.init) + " of '" + v.name + "' outside [" +
                         std::to_string(v.lower) + ".." + std::to_string(v.upper) + "]",
                     v.loc});
  }

  auto check_refs = [&](const ExprPtr& e) {
    for_each_variable(e, [&](const Expr& var) {
      if (model.variable_index(var.name) < 0)
        out.push_back({DiagnosticCategory::UndeclaredVariable, "undeclared variable '" + var.name + "'", var.loc});
    });
  };

  for (const auto& c : model.commands) {
    check_refs(c.guard);
    Probability total(0);
    for (const auto& b : c.branches) {
      if (b.probability <= 0 || b.probability > 1)
        out.push_back({DiagnosticCategory::ProbabilityRange,
                       "branch probability " + pric3::to_string(b.probability) + " outside (0,1]", b.loc});
      total += b.probability;
      for (const auto& u : b.updates) {
        if (model.variable_index(u.target) < 0)
          out.push_back({DiagnosticCategory::UndeclaredVariable, "update of undeclared variable '" + u.target + "'",
                         u.loc});
        check_refs(u.value);
      }
    }
    if (total != 1)
      out.push_back({DiagnosticCategory::ProbabilitySum, "probability sum " + pric3::to_string(total) + " != 1", c.loc});
  }

  if (!model.bad_label)
    out.push_back({DiagnosticCategory::MissingLabel, "missing label \"bad\"", {}});
  else
    check_refs(model.bad_label);
  return out;
}

// Canonical text form; parsing it yields a structurally equal model.
inline std::string print_program(const ProgramModel& model) {
  std::ostringstream os;
  os << "mdp\n\nmodule " << (model.module_name.empty() ? "main" : model.module_name) << "\n";
  for (const auto& v : model.variables)
    os << "  " << v.name << " : [" << v.lower << ".." << v.upper << "] init " << v.init << ";\n";
  if (!model.variables.empty()) os << "\n";
  for (const auto& c : model.commands) {
    os << "  [" << c.action << "] " << print_expr(*c.guard) << " ->";
    for (std::size_t b = 0; b < c.branches.size(); ++b) {
      const auto& br = c.branches[b];
      os << (b ? " + " : " ") << to_string(br.probability) << ":";
      if (br.updates.empty()) os << "true";
      for (std::size_t u = 0; u < br.updates.size(); ++u)
        os << (u ? "&" : "") << "(" << br.updates[u].target << "'=" << print_expr(*br.updates[u].value) << ")";
    }
    os << ";\n";
  }
  os << "endmodule\n";
  if (model.bad_label) os << "\nlabel \"" << model.label_name << "\" = " << print_expr(*model.bad_label) << ";\n";
  return os.str();
}

inline bool structurally_equal(const ProgramModel& a, const ProgramModel& b) {
  if (a.module_name != b.module_name || a.variables.size() != b.variables.size() ||
      a.commands.size() != b.commands.size() || a.label_name != b.label_name ||
      !structurally_equal(a.bad_label, b.bad_label))
    return false;
  for (std::size_t i = 0; i < a.variables.size(); ++i) {
    const auto &x = a.variables[i], &y = b.variables[i];
    if (x.name != y.name || x.lower != y.lower || x.upper != y.upper || x.init != y.init) return false;
  }
  for (std::size_t i = 0; i < a.commands.size(); ++i) {
    const auto &x = a.commands[i], &y = b.commands[i];
    if (x.action != y.action || !structurally_equal(x.guard, y.guard) || x.branches.size() != y.branches.size())
      return false;
    for (std::size_t j = 0; j < x.branches.size(); ++j) {
      const auto &p = x.branches[j], &q = y.branches[j];
      if (p.probability != q.probability || p.updates.size() != q.updates.size()) return false;
      for (std::size_t k = 0; k < p.updates.size(); ++k)
        if (p.updates[k].target != q.updates[k].target || !structurally_equal(p.updates[k].value, q.updates[k].value))
          return false;
    }
  }
  return true;
}

}  // namespace pric3
