#pragma once

// Model language
//
//   # comment to end of line
//   [states]       names, separated by spaces or commas
//   [inputs]       name [= ubar]                    (one per line)
//   [params]       name = value [in [lo, hi]]        (one per line)
//   [delays]       [state|input] name = value [in [lo, hi]]
//   [equations]    dNAME = expr                      (one per state)
//   [output]       identity | one matrix row per line
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | func '(' expr ')' | 'delay' '(' name ',' name ')'
//            | '(' expr ')'
//
// The kind of an unprefixed delay is taken from the variable it is applied
// to. See docs/model-format.md for the full reference.

#include <cctype>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ddeid/expr.hpp"
#include "ddeid/model.hpp"

namespace ddeid {

struct Diagnostic {
  SourceSpan span;
  std::string message;
  int line = 0;    // 1-based
  int column = 0;  // 1-based
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Optional sampling boxes for structural (multi-point) analysis.
struct ParameterBox {
  std::vector<std::optional<Interval>> p_s;
  std::vector<std::optional<Interval>> tau;
  std::vector<std::optional<Interval>> nu;

  bool any() const {
    for (const auto* v : {&p_s, &tau, &nu})
      for (const auto& b : *v)
        if (b) return true;
    return false;
  }
};

struct ModelFile {
  ModelSpec spec;
  ParameterPoint nominal;
  ParameterBox box;
  std::string source;
};

struct ParseResult {
  std::optional<ModelFile> model;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return model.has_value(); }
};

namespace parse_detail {

enum class Tok { Number, Ident, Op, End, Bad };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourceSpan span;
};

class Lexer {
 public:
  Lexer(std::string_view src, std::size_t begin, std::size_t end)
      : src_(src), pos_(begin), end_(end) {}

  Token next() {
    while (pos_ < end_ && std::isspace(static_cast<unsigned char>(src_[pos_])))
      ++pos_;
    Token t;
    t.span = {pos_, pos_};
    if (pos_ >= end_) return t;
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < end_ &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::size_t start = pos_;
      while (pos_ < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        ++pos_;
      if (pos_ < end_ && src_[pos_] == '.') {
        ++pos_;
        while (pos_ < end_ &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      }
      if (pos_ < end_ && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
        std::size_t save = pos_;
        ++pos_;
        if (pos_ < end_ && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
        if (pos_ < end_ && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          while (pos_ < end_ &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
        } else {
          pos_ = save;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src_.substr(start, pos_ - start));
      t.number = std::strtod(t.text.c_str(), nullptr);
      t.span = {start, pos_};
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < end_ &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        ++pos_;
      t.kind = Tok::Ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      t.span = {start, pos_};
      return t;
    }
    static constexpr std::string_view ops = "+-*/^(),=[]";
    t.span = {pos_, pos_ + 1};
    t.text = std::string(1, c);
    t.kind = ops.find(c) != std::string_view::npos ? Tok::Op : Tok::Bad;
    ++pos_;
    return t;
  }

 private:
  std::string_view src_;
  std::size_t pos_;
  std::size_t end_;
};

struct ParseFailure {
  SourceSpan span;
  std::string message;
};

// Delay references are first recorded against the declaration index; slots
// are assigned by kind once every equation has been read.
struct DelayUse {
  int delay = 0;
  bool on_state = true;
  SourceSpan span;
};

struct Symbols {
  std::map<std::string, int> states, inputs, params, delays;
};

class ExprParser {
 public:
  ExprParser(std::string_view src, std::size_t begin, std::size_t end,
             const Symbols& sym, std::vector<DelayUse>& uses)
      : lex_(src, begin, end), sym_(sym), uses_(uses) {
    advance();
  }

  Expr parse_all() {
    Expr e = expr();
    if (cur_.kind != Tok::End) fail(cur_, "unexpected '" + cur_.text + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseFailure{t.span, msg};
  }

  void advance() {
    cur_ = lex_.next();
    if (cur_.kind == Tok::Bad) fail(cur_, "invalid character '" + cur_.text + "'");
  }

  bool is_op(const char* op) const {
    return cur_.kind == Tok::Op && cur_.text == op;
  }

  void expect(const char* op) {
    if (!is_op(op)) {
      fail(cur_, std::string("expected '") + op + "'" +
                     (cur_.kind == Tok::End ? " before end of line"
                                            : ", found '" + cur_.text + "'"));
    }
    advance();
  }

  static SourceSpan join(SourceSpan a, SourceSpan b) { return {a.begin, b.end}; }

  Expr expr() {
    Expr lhs = term();
    while (is_op("+") || is_op("-")) {
      NodeKind k = cur_.text == "+" ? NodeKind::Add : NodeKind::Sub;
      advance();
      Expr rhs = term();
      lhs = Expr::binary(k, lhs, rhs, join(lhs.root().span, rhs.root().span));
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (is_op("*") || is_op("/")) {
      NodeKind k = cur_.text == "*" ? NodeKind::Mul : NodeKind::Div;
      advance();
      Expr rhs = unary();
      lhs = Expr::binary(k, lhs, rhs, join(lhs.root().span, rhs.root().span));
    }
    return lhs;
  }

  Expr unary() {
    if (is_op("-")) {
      SourceSpan s = cur_.span;
      advance();
      Expr operand = unary();
      return Expr::unary(NodeKind::Neg, operand, join(s, operand.root().span));
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (is_op("^")) {
      advance();
      Expr ex = unary();
      return Expr::binary(NodeKind::Pow, base, ex,
                          join(base.root().span, ex.root().span));
    }
    return base;
  }

  Expr primary() {
    Token t = cur_;
    if (t.kind == Tok::Number) {
      advance();
      return Expr::constant(t.number, t.span);
    }
    if (is_op("(")) {
      advance();
      Expr e = expr();
      expect(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      advance();
      if (is_op("(")) return call(t);
      if (auto it = sym_.states.find(t.text); it != sym_.states.end())
        return Expr::state(it->second, 0, t.span);
      if (auto it = sym_.inputs.find(t.text); it != sym_.inputs.end())
        return Expr::input(it->second, 0, t.span);
      if (auto it = sym_.params.find(t.text); it != sym_.params.end())
        return Expr::param(it->second, t.span);
      if (sym_.delays.count(t.text))
        fail(t, "delay '" + t.text + "' can only appear inside delay(...)");
      if (function_kind(t.text))
        fail(t, "function '" + t.text + "' requires an argument list");
      fail(t, "unknown identifier '" + t.text + "'");
    }
    if (t.kind == Tok::End) fail(t, "unexpected end of expression");
    fail(t, "unexpected '" + t.text + "'");
  }

  static std::optional<NodeKind> function_kind(const std::string& name) {
    static const std::map<std::string, NodeKind> fns = {
        {"sin", NodeKind::Sin},   {"cos", NodeKind::Cos},
        {"exp", NodeKind::Exp},   {"log", NodeKind::Log},
        {"sqrt", NodeKind::Sqrt}, {"abs", NodeKind::Abs}};
    auto it = fns.find(name);
    if (it == fns.end()) return std::nullopt;
    return it->second;
  }

  Expr call(const Token& name) {
    advance();  // '('
    if (name.text == "delay") return delay_call(name);
    auto kind = function_kind(name.text);
    if (!kind) fail(name, "unknown function '" + name.text + "'");
    std::vector<Expr> args;
    if (!is_op(")")) {
      args.push_back(expr());
      while (is_op(",")) {
        advance();
        args.push_back(expr());
      }
    }
    Token close = cur_;
    expect(")");
    if (args.size() != 1) {
      throw ParseFailure{join(name.span, close.span),
                         "function '" + name.text + "' takes 1 argument, got " +
                             std::to_string(args.size())};
    }
    return Expr::unary(*kind, args[0], join(name.span, close.span));
  }

  Expr delay_call(const Token& name) {
    Token var = cur_;
    if (var.kind != Tok::Ident)
      fail(var, "delay expects a state or input name as first argument");
    advance();
    if (!is_op(",")) {
      if (is_op(")")) {
        throw ParseFailure{join(name.span, cur_.span),
                           "delay takes 2 arguments, got 1"};
      }
      expect(",");
    }
    advance();
    Token lag = cur_;
    if (lag.kind != Tok::Ident) fail(lag, "delay expects a delay name");
    advance();
    if (is_op(",")) {
      throw ParseFailure{join(name.span, cur_.span),
                         "delay takes 2 arguments, got more"};
    }
    Token close = cur_;
    expect(")");
    SourceSpan span = join(name.span, close.span);
    auto d = sym_.delays.find(lag.text);
    if (d == sym_.delays.end()) fail(lag, "unknown delay '" + lag.text + "'");
    if (auto it = sym_.states.find(var.text); it != sym_.states.end()) {
      uses_.push_back({d->second, true, lag.span});
      return Expr::state(it->second, d->second + 1, span);
    }
    if (auto it = sym_.inputs.find(var.text); it != sym_.inputs.end()) {
      uses_.push_back({d->second, false, lag.span});
      return Expr::input(it->second, d->second + 1, span);
    }
    fail(var, "delay applies to states and inputs only, '" + var.text +
                  "' is neither");
  }

  Lexer lex_;
  Token cur_;
  const Symbols& sym_;
  std::vector<DelayUse>& uses_;
};

inline NodePtr remap_slots(const NodePtr& n, const std::vector<int>& slot_of) {
  if (!n) return n;
  if ((n->kind == NodeKind::State || n->kind == NodeKind::Input) && n->slot > 0) {
    Node copy = *n;
    copy.slot = slot_of[n->slot - 1];
    return std::make_shared<const Node>(copy);
  }
  if (!n->lhs) return n;
  Node copy = *n;
  copy.lhs = remap_slots(n->lhs, slot_of);
  copy.rhs = remap_slots(n->rhs, slot_of);
  return std::make_shared<const Node>(copy);
}

struct Line {
  std::size_t begin;
  std::size_t end;  // excludes comment and newline
};

inline bool reserved(const std::string& s) {
  static const std::set<std::string> words = {
      "sin", "cos", "exp", "log", "sqrt", "abs", "delay", "in",
      "state", "input", "identity"};
  return words.count(s) > 0;
}

struct DelayDecl {
  std::string name;
  double value = 0.0;
  std::optional<Interval> box;
  int kind = 0;  // 0 unknown, 1 state, 2 input
  SourceSpan span;
};

struct ValueDecl {
  std::string name;
  double value = 0.0;
  std::optional<Interval> box;
};

}  // namespace parse_detail

inline void locate(std::string_view src, Diagnostic& d) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < d.span.begin && i < src.size(); ++i) {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  d.line = line;
  d.column = col;
}

/// Parses a model file. On failure returns at least one diagnostic.
inline ParseResult parse_model(const std::string& source) {
  using namespace parse_detail;
  ParseResult result;
  std::vector<Diagnostic>& diags = result.diagnostics;
  auto report = [&](SourceSpan s, std::string msg) {
    Diagnostic d{s, std::move(msg)};
    locate(source, d);
    diags.push_back(std::move(d));
  };

  std::map<std::string, std::vector<Line>> sections;
  std::vector<std::string> order;
  std::string current;
  std::size_t pos = 0;
  while (pos <= source.size()) {
    std::size_t nl = source.find('\n', pos);
    if (nl == std::string::npos) nl = source.size();
    std::size_t end = nl;
    std::size_t hash = source.find('#', pos);
    if (hash != std::string::npos && hash < end) end = hash;
    std::size_t b = pos;
    while (b < end && std::isspace(static_cast<unsigned char>(source[b]))) ++b;
    std::size_t e = end;
    while (e > b && std::isspace(static_cast<unsigned char>(source[e - 1]))) --e;
    if (b < e) {
      if (source[b] == '[' && source[e - 1] == ']') {
        current = source.substr(b + 1, e - b - 2);
        static const std::set<std::string> known = {
            "states", "inputs", "params", "delays", "equations", "output"};
        if (!known.count(current)) {
          report({b, e}, "unknown section [" + current + "]");
        } else if (sections.count(current)) {
          report({b, e}, "duplicate section [" + current + "]");
        } else {
          sections[current];
          order.push_back(current);
        }
      } else if (current.empty()) {
        report({b, e}, "content outside of any section");
      } else {
        sections[current].push_back({b, e});
      }
    }
    pos = nl + 1;
  }
  if (!sections.count("states")) report({0, 0}, "missing [states] section");
  if (!sections.count("equations"))
    report({0, 0}, "missing [equations] section");

  ModelFile file;
  file.source = source;
  ModelSpec& spec = file.spec;
  Symbols sym;
  std::set<std::string> taken;

  auto declare = [&](const Token& t, std::map<std::string, int>& table,
                     std::vector<std::string>& names) {
    if (reserved(t.text)) {
      report(t.span, "'" + t.text + "' is a reserved word");
      return;
    }
    if (!taken.insert(t.text).second) {
      report(t.span, "duplicate name '" + t.text + "'");
      return;
    }
    table[t.text] = static_cast<int>(names.size());
    names.push_back(t.text);
  };

  for (const Line& ln : sections["states"]) {
    Lexer lex(source, ln.begin, ln.end);
    for (Token t = lex.next(); t.kind != Tok::End; t = lex.next()) {
      if (t.kind == Tok::Op && t.text == ",") continue;
      if (t.kind != Tok::Ident) {
        report(t.span, "expected a state name");
        break;
      }
      declare(t, sym.states, spec.state_names);
    }
  }

  // name [= value] [in [lo, hi]] with an optional leading keyword
  auto parse_decl = [&](const Line& ln, bool value_required,
                        std::string* prefix) -> std::optional<ValueDecl> {
    Lexer lex(source, ln.begin, ln.end);
    Token t = lex.next();
    if (prefix && t.kind == Tok::Ident && (t.text == "state" || t.text == "input")) {
      *prefix = t.text;
      t = lex.next();
    }
    if (t.kind != Tok::Ident) {
      report(t.span, "expected a name");
      return std::nullopt;
    }
    ValueDecl d;
    d.name = t.text;
    Token name_tok = t;
    auto number = [&](double& out) -> bool {
      Token v = lex.next();
      double sign = 1.0;
      if (v.kind == Tok::Op && (v.text == "-" || v.text == "+")) {
        sign = v.text == "-" ? -1.0 : 1.0;
        v = lex.next();
      }
      if (v.kind != Tok::Number) {
        report(v.span, "expected a number");
        return false;
      }
      out = sign * v.number;
      return true;
    };
    t = lex.next();
    if (t.kind == Tok::End) {
      if (value_required) {
        report(name_tok.span, "'" + d.name + "' needs a value");
        return std::nullopt;
      }
      return d;
    }
    if (!(t.kind == Tok::Op && t.text == "=")) {
      report(t.span, "expected '='");
      return std::nullopt;
    }
    if (!number(d.value)) return std::nullopt;
    t = lex.next();
    if (t.kind == Tok::End) return d;
    if (!(t.kind == Tok::Ident && t.text == "in")) {
      report(t.span, "expected 'in [lo, hi]' or end of line");
      return std::nullopt;
    }
    Interval iv;
    Token br = lex.next();
    if (!(br.kind == Tok::Op && br.text == "[")) {
      report(br.span, "expected '['");
      return std::nullopt;
    }
    if (!number(iv.lo)) return std::nullopt;
    Token comma = lex.next();
    if (!(comma.kind == Tok::Op && comma.text == ",")) {
      report(comma.span, "expected ','");
      return std::nullopt;
    }
    if (!number(iv.hi)) return std::nullopt;
    Token close = lex.next();
    if (!(close.kind == Tok::Op && close.text == "]")) {
      report(close.span, "expected ']'");
      return std::nullopt;
    }
    Token tail = lex.next();
    if (tail.kind != Tok::End) {
      report(tail.span, "unexpected '" + tail.text + "'");
      return std::nullopt;
    }
    if (!(iv.lo <= iv.hi)) {
      report(close.span, "empty interval");
      return std::nullopt;
    }
    d.box = iv;
    return d;
  };

  std::vector<double> u_bar;
  for (const Line& ln : sections["inputs"]) {
    auto d = parse_decl(ln, false, nullptr);
    if (!d) continue;
    if (d->box) report({ln.begin, ln.end}, "inputs do not take a sampling box");
    Lexer lex(source, ln.begin, ln.end);
    declare(lex.next(), sym.inputs, spec.input_names);
    u_bar.push_back(d->value);
  }

  std::vector<ValueDecl> params;
  for (const Line& ln : sections["params"]) {
    auto d = parse_decl(ln, true, nullptr);
    if (!d) continue;
    Lexer lex(source, ln.begin, ln.end);
    declare(lex.next(), sym.params, spec.param_names);
    params.push_back(*d);
  }

  std::vector<DelayDecl> delays;
  std::map<std::string, int> delay_index;
  for (const Line& ln : sections["delays"]) {
    std::string prefix;
    auto d = parse_decl(ln, true, &prefix);
    if (!d) continue;
    Lexer lex(source, ln.begin, ln.end);
    Token t = lex.next();
    if (!prefix.empty()) t = lex.next();
    if (reserved(t.text)) {
      report(t.span, "'" + t.text + "' is a reserved word");
      continue;
    }
    if (!taken.insert(t.text).second) {
      report(t.span, "duplicate name '" + t.text + "'");
      continue;
    }
    DelayDecl dd{d->name, d->value, d->box,
                 prefix == "state" ? 1 : (prefix == "input" ? 2 : 0), t.span};
    sym.delays[dd.name] = static_cast<int>(delays.size());
    delays.push_back(dd);
  }

  // equations
  const int n = static_cast<int>(spec.state_names.size());
  std::vector<Expr> eqs(n);
  std::vector<DelayUse> uses;
  for (const Line& ln : sections["equations"]) {
    Lexer lex(source, ln.begin, ln.end);
    Token lhs = lex.next();
    Token eq = lex.next();
    if (lhs.kind != Tok::Ident || lhs.text.size() < 2 || lhs.text[0] != 'd') {
      report(lhs.span, "equation must start with d<state> =");
      continue;
    }
    if (!(eq.kind == Tok::Op && eq.text == "=")) {
      report(eq.span, "expected '=' after " + lhs.text);
      continue;
    }
    std::string state = lhs.text.substr(1);
    auto it = sym.states.find(state);
    if (it == sym.states.end()) {
      report(lhs.span, "'" + state + "' is not a declared state");
      continue;
    }
    if (!eqs[it->second].empty()) {
      report(lhs.span, "duplicate equation for '" + state + "'");
      continue;
    }
    try {
      ExprParser p(source, eq.span.end, ln.end, sym, uses);
      eqs[it->second] = p.parse_all();
    } catch (const ParseFailure& f) {
      report(f.span, f.message);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (eqs[i].empty() && sections.count("equations") &&
        !sections["equations"].empty()) {
      bool had_error = false;
      for (const auto& d : diags)
        for (const Line& ln : sections["equations"])
          if (d.span.begin >= ln.begin && d.span.begin <= ln.end)
            had_error = true;
      if (!had_error)
        report({0, 0}, "missing equation for state '" + spec.state_names[i] + "'");
    }
  }
  if (sections.count("equations") && sections["equations"].empty() && n > 0)
    report({0, 0}, "no equations given");

  // resolve delay kinds
  for (const DelayUse& u : uses) {
    DelayDecl& d = delays[u.delay];
    int kind = u.on_state ? 1 : 2;
    if (d.kind == 0) {
      d.kind = kind;
    } else if (d.kind != kind) {
      report(u.span, "delay '" + d.name + "' is declared as a " +
                         (d.kind == 1 ? "state" : "input") +
                         " delay but applied to " +
                         (u.on_state ? "a state" : "an input"));
    }
  }
  std::vector<int> slot_of(delays.size(), 0);
  std::vector<double> tau, nu;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    DelayDecl& d = delays[i];
    if (d.kind == 0) d.kind = 1;
    if (d.kind == 1) {
      spec.state_delay_names.push_back(d.name);
      tau.push_back(d.value);
      file.box.tau.push_back(d.box);
      slot_of[i] = static_cast<int>(spec.state_delay_names.size());
    } else {
      spec.input_delay_names.push_back(d.name);
      nu.push_back(d.value);
      file.box.nu.push_back(d.box);
      slot_of[i] = static_cast<int>(spec.input_delay_names.size());
    }
  }
  for (Expr& e : eqs)
    if (!e.empty()) e = Expr(remap_slots(e.ptr(), slot_of));
  spec.equations = std::move(eqs);

  // output map
  spec.output_map = Matrix::Identity(n, n);
  if (sections.count("output")) {
    const auto& lines = sections["output"];
    if (lines.size() == 1 &&
        source.substr(lines[0].begin, lines[0].end - lines[0].begin) ==
            "identity") {
      // default
    } else if (!lines.empty()) {
      std::vector<std::vector<double>> rows;
      bool bad = false;
      for (const Line& ln : lines) {
        Lexer lex(source, ln.begin, ln.end);
        std::vector<double> row;
        for (Token t = lex.next(); t.kind != Tok::End; t = lex.next()) {
          double sign = 1.0;
          if (t.kind == Tok::Op && t.text == ",") continue;
          if (t.kind == Tok::Op && t.text == "-") {
            sign = -1.0;
            t = lex.next();
          }
          if (t.kind != Tok::Number) {
            report(t.span, "output rows hold numbers only");
            bad = true;
            break;
          }
          row.push_back(sign * t.number);
        }
        if (!bad && static_cast<int>(row.size()) != n) {
          report({ln.begin, ln.end}, "output row needs " + std::to_string(n) +
                                         " entries");
          bad = true;
        }
        if (bad) break;
        rows.push_back(row);
      }
      if (!bad) {
        spec.output_map.resize(static_cast<Eigen::Index>(rows.size()), n);
        for (std::size_t i = 0; i < rows.size(); ++i)
          for (int j = 0; j < n; ++j)
            spec.output_map(static_cast<Eigen::Index>(i), j) = rows[i][j];
      }
    }
  }

  auto to_vec = [](const std::vector<double>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
  };
  std::vector<double> pv;
  for (const auto& d : params) {
    pv.push_back(d.value);
    file.box.p_s.push_back(d.box);
  }
  file.nominal.p_s = to_vec(pv);
  file.nominal.tau = to_vec(tau);
  file.nominal.nu = to_vec(nu);
  file.nominal.u_bar = to_vec(u_bar);

  if (diags.empty()) result.model = std::move(file);
  return result;
}

/// Parses a single right-hand side against a model header. Used by tests and
/// tooling that build models programmatically.
inline Expr parse_expression(const std::string& text, const ModelSpec& header,
                             std::vector<Diagnostic>* diags = nullptr) {
  using namespace parse_detail;
  Symbols sym;
  for (int i = 0; i < header.n(); ++i) sym.states[header.state_names[i]] = i;
  for (int i = 0; i < header.k(); ++i) sym.inputs[header.input_names[i]] = i;
  for (int i = 0; i < header.p(); ++i) sym.params[header.param_names[i]] = i;
  std::vector<int> slot_of;
  for (int i = 0; i < header.l(); ++i) {
    sym.delays[header.state_delay_names[i]] = static_cast<int>(slot_of.size());
    slot_of.push_back(i + 1);
  }
  for (int i = 0; i < header.r(); ++i) {
    sym.delays[header.input_delay_names[i]] = static_cast<int>(slot_of.size());
    slot_of.push_back(i + 1);
  }
  std::vector<DelayUse> uses;
  try {
    ExprParser p(text, 0, text.size(), sym, uses);
    Expr e = p.parse_all();
    for (const DelayUse& u : uses) {
      bool state_delay = u.delay < header.l();
      if (state_delay != u.on_state)
        throw ParseFailure{u.span, "delay applied to the wrong kind of variable"};
    }
    return Expr(remap_slots(e.ptr(), slot_of));
  } catch (const ParseFailure& f) {
    if (diags) {
      Diagnostic d{f.span, f.message};
      locate(text, d);
      diags->push_back(d);
    }
    return Expr();
  }
}

}  // namespace ddeid
