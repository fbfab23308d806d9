#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ddeid {

/// Byte range [begin, end) into a model source, used for diagnostics.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Raised when evaluation hits an undefined operation (log of a nonpositive
/// value, division by zero, non-differentiable point under dual numbers, ...).
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, SourceSpan span, int equation = -1)
      : std::runtime_error(what), span_(span), equation_(equation) {}

  SourceSpan span() const { return span_; }
  int equation() const { return equation_; }

  DomainError with_equation(int eq) const {
    return DomainError(what(), span_, eq);
  }

 private:
  SourceSpan span_;
  int equation_;
};

enum class NodeKind {
  Constant,
  State,   // state var `index`, delay slot `slot` (0 = undelayed)
  Input,   // input var `index`, delay slot `slot`
  Param,   // parameter `index`
  Neg,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

inline bool is_unary_function(NodeKind k) {
  return k == NodeKind::Sin || k == NodeKind::Cos || k == NodeKind::Exp ||
         k == NodeKind::Log || k == NodeKind::Sqrt || k == NodeKind::Abs;
}

inline bool is_binary(NodeKind k) {
  return k == NodeKind::Add || k == NodeKind::Sub || k == NodeKind::Mul ||
         k == NodeKind::Div || k == NodeKind::Pow;
}

inline const char* function_name(NodeKind k) {
  switch (k) {
    case NodeKind::Sin: return "sin";
    case NodeKind::Cos: return "cos";
    case NodeKind::Exp: return "exp";
    case NodeKind::Log: return "log";
    case NodeKind::Sqrt: return "sqrt";
    case NodeKind::Abs: return "abs";
    default: return "";
  }
}

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;
  int index = 0;
  int slot = 0;
  NodePtr lhs;  // sole operand of unary nodes
  NodePtr rhs;
  SourceSpan span;
};

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  static Expr constant(double v, SourceSpan s = {}) {
    return make({NodeKind::Constant, v, 0, 0, nullptr, nullptr, s});
  }
  static Expr state(int var, int slot, SourceSpan s = {}) {
    return make({NodeKind::State, 0.0, var, slot, nullptr, nullptr, s});
  }
  static Expr input(int var, int slot, SourceSpan s = {}) {
    return make({NodeKind::Input, 0.0, var, slot, nullptr, nullptr, s});
  }
  static Expr param(int idx, SourceSpan s = {}) {
    return make({NodeKind::Param, 0.0, idx, 0, nullptr, nullptr, s});
  }
  static Expr unary(NodeKind k, const Expr& a, SourceSpan s = {}) {
    return make({k, 0.0, 0, 0, a.root_, nullptr, s});
  }
  static Expr binary(NodeKind k, const Expr& a, const Expr& b,
                     SourceSpan s = {}) {
    return make({k, 0.0, 0, 0, a.root_, b.root_, s});
  }

  const Node& root() const { return *root_; }
  const NodePtr& ptr() const { return root_; }
  bool empty() const { return !root_; }

 private:
  static Expr make(Node n) { return Expr(std::make_shared<const Node>(n)); }
  NodePtr root_;
};

// ---------------------------------------------------------------------------
// Numeric interface. A numeric type N used with evaluate() must provide, via
// ADL or these overloads: arithmetic, sin, cos, exp, log, sqrt, value_of,
// checked_abs and checked_sqrt.

inline double value_of(double x) { return x; }

inline double checked_abs(double x, SourceSpan) { return std::abs(x); }

inline double checked_sqrt(double x, SourceSpan s) {
  if (x < 0.0) throw DomainError("sqrt of negative value", s);
  return std::sqrt(x);
}

namespace detail {

/// Integer value of a subtree made only of constants, if it has one.
inline bool constant_integer(const Node& n, long long& out) {
  double v = 0.0;
  struct Folder {
    static bool fold(const Node& n, double& v) {
      switch (n.kind) {
        case NodeKind::Constant: v = n.value; return true;
        case NodeKind::Neg: {
          if (!fold(*n.lhs, v)) return false;
          v = -v;
          return true;
        }
        default: return false;
      }
    }
  };
  if (!Folder::fold(n, v)) return false;
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e6) {
    return false;
  }
  out = static_cast<long long>(v);
  return true;
}

template <class N>
N integer_power(const N& base, long long e, SourceSpan s) {
  if (e == 0) return N(1.0);
  bool invert = e < 0;
  unsigned long long m = invert ? static_cast<unsigned long long>(-e)
                                : static_cast<unsigned long long>(e);
  // left-to-right repeated multiplication: x, x*x, x*x*x, ...
  N result = base;
  for (unsigned long long i = 1; i < m; ++i) result = result * base;
  if (invert) {
    if (value_of(result) == 0.0) throw DomainError("division by zero", s);
    result = N(1.0) / result;
  }
  return result;
}

}  // namespace detail

/// Evaluates a tree. `Env` supplies `state(var, slot)`, `input(var, slot)`
/// and `param(i)`, each returning N.
template <class N, class Env>
N evaluate(const Node& n, const Env& env) {
  switch (n.kind) {
    case NodeKind::Constant: return N(n.value);
    case NodeKind::State: return env.state(n.index, n.slot);
    case NodeKind::Input: return env.input(n.index, n.slot);
    case NodeKind::Param: return env.param(n.index);
    case NodeKind::Neg: return -evaluate<N>(*n.lhs, env);
    case NodeKind::Sin: {
      using std::sin;
      return sin(evaluate<N>(*n.lhs, env));
    }
    case NodeKind::Cos: {
      using std::cos;
      return cos(evaluate<N>(*n.lhs, env));
    }
    case NodeKind::Exp: {
      using std::exp;
      return exp(evaluate<N>(*n.lhs, env));
    }
    case NodeKind::Log: {
      using std::log;
      N a = evaluate<N>(*n.lhs, env);
      if (!(value_of(a) > 0.0)) {
        throw DomainError("log of nonpositive value", n.span);
      }
      return log(a);
    }
    case NodeKind::Sqrt: return checked_sqrt(evaluate<N>(*n.lhs, env), n.span);
    case NodeKind::Abs: return checked_abs(evaluate<N>(*n.lhs, env), n.span);
    case NodeKind::Add:
      return evaluate<N>(*n.lhs, env) + evaluate<N>(*n.rhs, env);
    case NodeKind::Sub:
      return evaluate<N>(*n.lhs, env) - evaluate<N>(*n.rhs, env);
    case NodeKind::Mul:
      return evaluate<N>(*n.lhs, env) * evaluate<N>(*n.rhs, env);
    case NodeKind::Div: {
      N a = evaluate<N>(*n.lhs, env);
      N b = evaluate<N>(*n.rhs, env);
      if (value_of(b) == 0.0) throw DomainError("division by zero", n.span);
      return a / b;
    }
    case NodeKind::Pow: {
      N base = evaluate<N>(*n.lhs, env);
      long long e = 0;
      if (detail::constant_integer(*n.rhs, e)) {
        return detail::integer_power(base, e, n.span);
      }
      N ex = evaluate<N>(*n.rhs, env);
      if (!(value_of(base) > 0.0)) {
        throw DomainError("non-integer power of nonpositive base", n.span);
      }
      using std::exp;
      using std::log;
      return exp(ex * log(base));
    }
  }
  throw std::logic_error("unknown expression node");
}

template <class N, class Env>
N evaluate(const Expr& e, const Env& env) {
  return evaluate<N>(e.root(), env);
}

/// Structural equality (spans ignored).
inline bool same_structure(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Constant: return a.value == b.value;
    case NodeKind::State:
    case NodeKind::Input: return a.index == b.index && a.slot == b.slot;
    case NodeKind::Param: return a.index == b.index;
    default: break;
  }
  if (!same_structure(*a.lhs, *b.lhs)) return false;
  if (is_binary(a.kind)) return same_structure(*a.rhs, *b.rhs);
  return true;
}

inline bool same_structure(const Expr& a, const Expr& b) {
  return same_structure(a.root(), b.root());
}

inline std::size_t node_count(const Node& n) {
  std::size_t c = 1;
  if (n.lhs) c += node_count(*n.lhs);
  if (n.rhs) c += node_count(*n.rhs);
  return c;
}

/// Names used when printing a tree back to model-language text.
struct NameTable {
  std::vector<std::string> states;
  std::vector<std::string> inputs;
  std::vector<std::string> params;
  std::vector<std::string> state_delays;  // labels of slots 1..l
  std::vector<std::string> input_delays;  // labels of slots 1..r
};

namespace detail {

// Binding strength of the printed form.
inline int print_precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void print(const Node& n, const NameTable& names, std::string& out);

inline void print_operand(const Node& n, int min_prec, const NameTable& names,
                          std::string& out) {
  if (print_precedence(n) < min_prec) {
    out += '(';
    print(n, names, out);
    out += ')';
  } else {
    print(n, names, out);
  }
}

inline void print(const Node& n, const NameTable& names, std::string& out) {
  auto label = [](const std::vector<std::string>& v, int i,
                  const char* prefix) {
    if (i >= 0 && static_cast<std::size_t>(i) < v.size()) return v[i];
    return std::string(prefix) + std::to_string(i + 1);
  };
  switch (n.kind) {
    case NodeKind::Constant: out += format_number(n.value); return;
    case NodeKind::State:
      if (n.slot == 0) {
        out += label(names.states, n.index, "x");
      } else {
        out += "delay(" + label(names.states, n.index, "x") + ", " +
               label(names.state_delays, n.slot - 1, "tau") + ")";
      }
      return;
    case NodeKind::Input:
      if (n.slot == 0) {
        out += label(names.inputs, n.index, "u");
      } else {
        out += "delay(" + label(names.inputs, n.index, "u") + ", " +
               label(names.input_delays, n.slot - 1, "nu") + ")";
      }
      return;
    case NodeKind::Param: out += label(names.params, n.index, "p"); return;
    case NodeKind::Neg:
      out += '-';
      print_operand(*n.lhs, 3, names, out);
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
      int p = print_precedence(n);
      print_operand(*n.lhs, p, names, out);
      switch (n.kind) {
        case NodeKind::Add: out += " + "; break;
        case NodeKind::Sub: out += " - "; break;
        case NodeKind::Mul: out += "*"; break;
        default: out += "/"; break;
      }
      print_operand(*n.rhs, p + 1, names, out);
      return;
    }
    case NodeKind::Pow:
      print_operand(*n.lhs, 5, names, out);
      out += '^';
      print_operand(*n.rhs, 3, names, out);
      return;
    default:
      out += function_name(n.kind);
      out += '(';
      print(*n.lhs, names, out);
      out += ')';
      return;
  }
}

}  // namespace detail

/// Prints a tree with the minimal parentheses needed to reparse it to the
/// same structure.
inline std::string to_string(const Expr& e, const NameTable& names) {
  std::string out;
  detail::print(e.root(), names, out);
  return out;
}

}  // namespace ddeid
