#pragma once

#include <stdexcept>
#include <string>

namespace absynth {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct QuantifiedInput : Error {
  explicit QuantifiedInput(const std::string& w = "formula has a quantifier") : Error(w) {}
};

struct MissingAssignment : Error {
  explicit MissingAssignment(const std::string& var) : Error("no value for variable " + var) {}
};

struct SyntaxError : Error {
  int line, column;
  SyntaxError(const std::string& msg, int line_, int col_)
      : Error(msg + " at line " + std::to_string(line_) + ", column " + std::to_string(col_)),
        line(line_),
        column(col_) {}
};

struct UndeclaredVariable : Error {
  explicit UndeclaredVariable(const std::string& name) : Error("undeclared variable " + name) {}
};

struct LoopInLoopFreeContext : Error {
  LoopInLoopFreeContext() : Error("while-loop in a loop-free context") {}
};

struct ResourceLimit : Error {
  explicit ResourceLimit(const std::string& w) : Error("resource limit exceeded: " + w) {}
};

struct NotAFunction : Error {
  explicit NotAFunction(const std::string& w) : Error("defining formula is not a function: " + w) {}
};

struct NoInvariantOfShape : Error {
  NoInvariantOfShape() : Error("no inductive invariant of the requested shape") {}
};

struct NoBoundsAvailable : Error {
  explicit NoBoundsAvailable(const std::string& var) : Error("no interval bounds for " + var) {}
};

struct DuplicateForm : Error {
  explicit DuplicateForm(const std::string& w) : Error("duplicate template form: " + w) {}
};

struct UncutCycle : Error {
  explicit UncutCycle(const std::string& w) : Error("cycle not covered by the cut set: " + w) {}
};

struct EmptyPrecondition : Error {
  EmptyPrecondition() : Error("no start state found within the sampling budget") {}
};

struct NotStabilized : Error {
  NotStabilized() : Error("iteration did not stabilize within the bound") {}
};

}  // namespace absynth
