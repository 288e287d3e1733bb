#include "dsat/costfn.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace dsat {

struct CostExpr::Node {
  Kind kind;
  double value = 0;  // Const: the constant; Pow: the exponent
  Var var = 0;       // Freq only
  NodePtr a, b;      // operands
};

namespace {

using Kind = CostExpr::Kind;

bool is_binary(Kind k) {
  return k == Kind::Add || k == Kind::Sub || k == Kind::Mul || k == Kind::Div;
}

bool is_unary_fn(Kind k) {
  return k == Kind::Neg || k == Kind::Abs || k == Kind::Sign ||
         k == Kind::Exp || k == Kind::Log || k == Kind::Sqrt;
}

}  // namespace

CostExpr::CostExpr() : node_(nullptr) {}

static CostExpr::Kind node_kind_of(const CostExpr& e) { return e.kind(); }

CostExpr CostExpr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = value;
  return CostExpr(std::move(n));
}

CostExpr CostExpr::freq(Var v) {
  if (v < 1) throw Error("frequency variable must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::Freq;
  n->var = v;
  return CostExpr(std::move(n));
}

Kind CostExpr::kind() const { return node_ ? node_->kind : Kind::Const; }

double CostExpr::const_value() const {
  if (!node_) return 0.0;
  assert(node_->kind == Kind::Const || node_->kind == Kind::Pow);
  return node_->value;
}

Var CostExpr::freq_var() const {
  assert(node_ && node_->kind == Kind::Freq);
  return node_->var;
}

CostExpr CostExpr::left() const {
  assert(node_ && node_->a);
  return CostExpr(node_->a);
}

CostExpr CostExpr::right() const {
  assert(node_ && node_->b);
  return CostExpr(node_->b);
}

static CostExpr make_binary(Kind k, const CostExpr& a, const CostExpr& b);

namespace {

CostExpr wrap(std::shared_ptr<const CostExpr::Node> n);

}  // namespace

// Builders. Unary minus folds over constants so that negative constants have
// a single canonical representation (the parser produces the same form).

CostExpr operator+(const CostExpr& a, const CostExpr& b) {
  return make_binary(Kind::Add, a, b);
}
CostExpr operator-(const CostExpr& a, const CostExpr& b) {
  return make_binary(Kind::Sub, a, b);
}
CostExpr operator*(const CostExpr& a, const CostExpr& b) {
  return make_binary(Kind::Mul, a, b);
}
CostExpr operator/(const CostExpr& a, const CostExpr& b) {
  return make_binary(Kind::Div, a, b);
}

CostExpr operator-(const CostExpr& e) {
  if (e.kind() == Kind::Const) return CostExpr::constant(-e.const_value());
  auto n = std::make_shared<CostExpr::Node>();
  n->kind = Kind::Neg;
  n->a = e.node_;
  return CostExpr(std::move(n));
}

CostExpr pow(const CostExpr& base, double exponent) {
  auto n = std::make_shared<CostExpr::Node>();
  n->kind = Kind::Pow;
  n->a = base.node_;
  n->value = exponent;
  return CostExpr(std::move(n));
}

static CostExpr make_unary(Kind k, const CostExpr& e) {
  auto n = std::make_shared<CostExpr::Node>();
  n->kind = k;
  n->a = e.node_;
  return CostExpr(std::move(n));
}

CostExpr abs(const CostExpr& e) { return make_unary(Kind::Abs, e); }
CostExpr sign(const CostExpr& e) { return make_unary(Kind::Sign, e); }
CostExpr exp(const CostExpr& e) { return make_unary(Kind::Exp, e); }
CostExpr log(const CostExpr& e) { return make_unary(Kind::Log, e); }
CostExpr sqrt(const CostExpr& e) { return make_unary(Kind::Sqrt, e); }

static CostExpr make_binary(Kind k, const CostExpr& a, const CostExpr& b) {
  auto n = std::make_shared<CostExpr::Node>();
  n->kind = k;
  n->a = a.node_;
  n->b = b.node_;
  return CostExpr(std::move(n));
}

namespace {

CostExpr wrap(std::shared_ptr<const CostExpr::Node> n) {
  struct Access : CostExpr {
    explicit Access(NodePtr p) : CostExpr(std::move(p)) {}
  };
  return Access(std::move(n));
}

double checked_pow(double base, double exponent) {
  if (base == 0.0 && exponent < 0.0)
    throw EvalError("zero raised to a negative power");
  if (base < 0.0 && exponent != std::trunc(exponent))
    throw EvalError("fractional power of a negative base");
  return std::pow(base, exponent);
}

double finite_or_throw(double x) {
  if (!std::isfinite(x)) throw EvalError("non-finite result in evaluation");
  return x;
}

}  // namespace

double CostExpr::evaluate(const FreqMap& freqs) const {
  if (!node_) return 0.0;
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Const:
      return n.value;
    case Kind::Freq: {
      auto it = freqs.find(n.var);
      if (it == freqs.end())
        throw EvalError("no frequency value for f(" + std::to_string(n.var) +
                        ")");
      return it->second;
    }
    case Kind::Add:
      return finite_or_throw(wrap(n.a).evaluate(freqs) +
                             wrap(n.b).evaluate(freqs));
    case Kind::Sub:
      return finite_or_throw(wrap(n.a).evaluate(freqs) -
                             wrap(n.b).evaluate(freqs));
    case Kind::Mul:
      return finite_or_throw(wrap(n.a).evaluate(freqs) *
                             wrap(n.b).evaluate(freqs));
    case Kind::Div: {
      double denom = wrap(n.b).evaluate(freqs);
      if (denom == 0.0) throw EvalError("division by zero");
      return finite_or_throw(wrap(n.a).evaluate(freqs) / denom);
    }
    case Kind::Neg:
      return -wrap(n.a).evaluate(freqs);
    case Kind::Pow:
      return finite_or_throw(checked_pow(wrap(n.a).evaluate(freqs), n.value));
    case Kind::Abs:
      return std::fabs(wrap(n.a).evaluate(freqs));
    case Kind::Sign: {
      double x = wrap(n.a).evaluate(freqs);
      return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    }
    case Kind::Exp:
      return finite_or_throw(std::exp(wrap(n.a).evaluate(freqs)));
    case Kind::Log: {
      double x = wrap(n.a).evaluate(freqs);
      if (x <= 0.0) throw EvalError("log of a nonpositive value");
      return finite_or_throw(std::log(x));
    }
    case Kind::Sqrt: {
      double x = wrap(n.a).evaluate(freqs);
      if (x < 0.0) throw EvalError("sqrt of a negative value");
      return std::sqrt(x);
    }
  }
  throw Error("corrupt expression node");
}

CostExpr CostExpr::derivative(Var v) const {
  if (!node_) return constant(0.0);
  const Node& n = *node_;
  auto A = [&] { return wrap(n.a); };
  auto B = [&] { return wrap(n.b); };
  CostExpr d = [&]() -> CostExpr {
    switch (n.kind) {
      case Kind::Const:
        return constant(0.0);
      case Kind::Freq:
        return constant(n.var == v ? 1.0 : 0.0);
      case Kind::Add:
        return A().derivative(v) + B().derivative(v);
      case Kind::Sub:
        return A().derivative(v) - B().derivative(v);
      case Kind::Mul:
        return A().derivative(v) * B() + A() * B().derivative(v);
      case Kind::Div:
        return (A().derivative(v) * B() - A() * B().derivative(v)) /
               pow(B(), 2.0);
      case Kind::Neg:
        return -A().derivative(v);
      case Kind::Pow:
        return constant(n.value) * pow(A(), n.value - 1.0) * A().derivative(v);
      case Kind::Abs:
        return sign(A()) * A().derivative(v);
      case Kind::Sign:
        return constant(0.0);  // piecewise constant
      case Kind::Exp:
        return exp(A()) * A().derivative(v);
      case Kind::Log:
        return A().derivative(v) / A();
      case Kind::Sqrt:
        return A().derivative(v) / (constant(2.0) * sqrt(A()));
    }
    throw Error("corrupt expression node");
  }();
  return d.simplified();
}

namespace {

bool is_const(const CostExpr& e, double v) {
  return e.kind() == Kind::Const && e.const_value() == v;
}

}  // namespace

CostExpr CostExpr::simplified() const {
  if (!node_) return constant(0.0);
  const Node& n = *node_;
  if (n.kind == Kind::Const || n.kind == Kind::Freq) return *this;

  CostExpr a = wrap(n.a).simplified();
  CostExpr b = is_binary(n.kind) ? wrap(n.b).simplified() : CostExpr();

  // Rebuild the node over simplified children.
  CostExpr out = [&]() -> CostExpr {
    switch (n.kind) {
      case Kind::Add:
        if (is_const(a, 0.0)) return b;
        if (is_const(b, 0.0)) return a;
        return a + b;
      case Kind::Sub:
        if (is_const(b, 0.0)) return a;
        if (is_const(a, 0.0)) return -b;
        return a - b;
      case Kind::Mul:
        if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
        if (is_const(a, 1.0)) return b;
        if (is_const(b, 1.0)) return a;
        return a * b;
      case Kind::Div:
        if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
        if (is_const(b, 1.0)) return a;
        return a / b;
      case Kind::Neg:
        if (a.kind() == Kind::Neg) return a.left();
        return -a;  // folds over constants
      case Kind::Pow:
        if (n.value == 1.0) return a;
        if (n.value == 0.0) return constant(1.0);
        return pow(a, n.value);
      case Kind::Abs:
        return abs(a);
      case Kind::Sign:
        return sign(a);
      case Kind::Exp:
        return exp(a);
      case Kind::Log:
        return log(a);
      case Kind::Sqrt:
        return sqrt(a);
      default:
        throw Error("corrupt expression node");
    }
  }();

  // Constant folding: a node whose operands are all constants evaluates now,
  // unless doing so would raise a domain error.
  const Node* m = out.node_.get();
  if (m && m->kind != Kind::Const && m->kind != Kind::Freq) {
    bool const_ops = m->a && m->a->kind == Kind::Const &&
                     (!is_binary(m->kind) || (m->b && m->b->kind == Kind::Const));
    if (const_ops) {
      try {
        return constant(out.evaluate({}));
      } catch (const EvalError&) {
        // keep symbolic form
      }
    }
  }
  return out;
}

void CostExpr::collect_freq_vars(std::set<Var>& out) const {
  if (!node_) return;
  if (node_->kind == Kind::Freq) {
    out.insert(node_->var);
    return;
  }
  if (node_->a) wrap(node_->a).collect_freq_vars(out);
  if (node_->b) wrap(node_->b).collect_freq_vars(out);
}

bool operator==(const CostExpr& a, const CostExpr& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Kind::Const:
      return a.const_value() == b.const_value();
    case Kind::Freq:
      return a.freq_var() == b.freq_var();
    case Kind::Pow:
      return a.const_value() == b.const_value() && a.left() == b.left();
    default:
      if (is_binary(a.kind()))
        return a.left() == b.left() && a.right() == b.right();
      return a.left() == b.left();
  }
}

// ---------------------------------------------------------------------------
// Printing
//
// Precedence levels: Add/Sub 1, Mul/Div 2, unary minus 3, Pow 4, atoms 5.
// A child is parenthesized when its level is below what its context needs;
// right operands of left-associative operators need one level more.

std::string format_double(double value) {
  assert(std::isfinite(value));
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, res.ptr);
  if (s.find('e') == std::string::npos && s.find('E') == std::string::npos)
    return s;
  // Exponent notation would not survive the grammar / probability-token
  // rule; shortest fixed notation round-trips as well.
  std::string fixed(448, '\0');
  res = std::to_chars(fixed.data(), fixed.data() + fixed.size(), value,
                      std::chars_format::fixed);
  fixed.resize(static_cast<size_t>(res.ptr - fixed.data()));
  return fixed;
}

namespace {

int node_level(const CostExpr& e) {
  switch (e.kind()) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    case Kind::Const:
      return e.const_value() < 0 ? 3 : 5;  // negative prints a leading '-'
    default:
      return 5;
  }
}

void print_expr(const CostExpr& e, int min_level, std::string& out) {
  bool parens = node_level(e) < min_level;
  if (parens) out += '(';
  switch (e.kind()) {
    case Kind::Const:
      out += format_double(e.const_value());
      break;
    case Kind::Freq:
      out += "f(" + std::to_string(e.freq_var()) + ")";
      break;
    case Kind::Add:
      print_expr(e.left(), 1, out);
      out += '+';
      print_expr(e.right(), 2, out);
      break;
    case Kind::Sub:
      print_expr(e.left(), 1, out);
      out += '-';
      print_expr(e.right(), 2, out);
      break;
    case Kind::Mul:
      print_expr(e.left(), 2, out);
      out += '*';
      print_expr(e.right(), 3, out);
      break;
    case Kind::Div:
      print_expr(e.left(), 2, out);
      out += '/';
      print_expr(e.right(), 3, out);
      break;
    case Kind::Neg:
      out += '-';
      print_expr(e.left(), 3, out);
      break;
    case Kind::Pow:
      print_expr(e.left(), 5, out);
      out += '^';
      out += format_double(e.const_value());
      break;
    case Kind::Abs:
      out += "abs(";
      print_expr(e.left(), 1, out);
      out += ')';
      break;
    case Kind::Sign:
      out += "sign(";
      print_expr(e.left(), 1, out);
      out += ')';
      break;
    case Kind::Exp:
      out += "exp(";
      print_expr(e.left(), 1, out);
      out += ')';
      break;
    case Kind::Log:
      out += "log(";
      print_expr(e.left(), 1, out);
      out += ')';
      break;
    case Kind::Sqrt:
      out += "sqrt(";
      print_expr(e.left(), 1, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

}  // namespace

std::string CostExpr::to_string() const {
  std::string out;
  print_expr(*this, 1, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class CostParser {
 public:
  CostParser(std::string_view text, const std::set<Var>& declared, int line)
      : text_(text), declared_(declared), line_(line) {}

  CostExpr parse() {
    CostExpr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, line_, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  CostExpr parse_expr() {
    CostExpr e = parse_term();
    for (;;) {
      if (eat('+'))
        e = e + parse_term();
      else if (eat('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  CostExpr parse_term() {
    CostExpr e = parse_unary();
    for (;;) {
      if (eat('*'))
        e = e * parse_unary();
      else if (eat('/'))
        e = e / parse_unary();
      else
        return e;
    }
  }

  CostExpr parse_unary() {
    if (eat('-')) return -parse_unary();  // folds over numeric literals
    return parse_power();
  }

  CostExpr parse_power() {
    CostExpr base = parse_atom();
    skip_ws();
    if (!eat('^')) return base;
    size_t caret = pos_;
    CostExpr exponent = parse_unary().simplified();  // right-associative
    if (exponent.kind() != Kind::Const) {
      throw ParseError("exponent must be a numeric constant", line_,
                       static_cast<int>(caret));
    }
    return pow(base, exponent.const_value());
  }

  CostExpr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      CostExpr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c >= '0' && c <= '9') return parse_number();
    if (c == '.') return parse_number();
    if (c >= 'a' && c <= 'z') return parse_call();
    fail(std::string("unexpected character '") + c + "'");
  }

  CostExpr parse_number() {
    size_t start = pos_;
    while (pos_ < text_.size() &&
           ((text_[pos_] >= '0' && text_[pos_] <= '9') || text_[pos_] == '.'))
      ++pos_;
    // Optional exponent part: e/E followed by optional sign and digits.
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && text_[p] >= '0' && text_[p] <= '9') {
        pos_ = p;
        while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9')
          ++pos_;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    char* end = nullptr;
    double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token == ".") {
      pos_ = start;
      fail("malformed numeric literal '" + token + "'");
    }
    return CostExpr::constant(v);
  }

  CostExpr parse_call() {
    size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= 'a' && text_[pos_] <= 'z')
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (name == "f") {
      if (!eat('(')) fail("expected '(' after f");
      Var v = parse_var();
      if (!eat(')')) fail("expected ')' after f(<var>");
      if (!declared_.count(v)) {
        throw ParseError(
            "frequency variable f(" + std::to_string(v) +
                ") is not a declared parameter atom",
            line_, static_cast<int>(start) + 1);
      }
      return CostExpr::freq(v);
    }
    CostExpr (*fn)(const CostExpr&) = nullptr;
    if (name == "abs")
      fn = static_cast<CostExpr (*)(const CostExpr&)>(&abs);
    else if (name == "sign")
      fn = &sign;
    else if (name == "exp")
      fn = static_cast<CostExpr (*)(const CostExpr&)>(&exp);
    else if (name == "log")
      fn = static_cast<CostExpr (*)(const CostExpr&)>(&log);
    else if (name == "sqrt")
      fn = static_cast<CostExpr (*)(const CostExpr&)>(&sqrt);
    else {
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    if (!eat('(')) fail("expected '(' after " + name);
    CostExpr arg = parse_expr();
    if (!eat(')')) fail("expected ')'");
    return fn(arg);
  }

  Var parse_var() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9')
      ++pos_;
    if (pos_ == start) fail("expected a variable number");
    long v = std::strtol(std::string(text_.substr(start, pos_ - start)).c_str(),
                         nullptr, 10);
    if (v < 1 || v > INT32_MAX) fail("variable number out of range");
    return static_cast<Var>(v);
  }

  std::string_view text_;
  const std::set<Var>& declared_;
  int line_;
  size_t pos_ = 0;
};

}  // namespace

CostExpr parse_cost(std::string_view text, const std::set<Var>& declared,
                    int line) {
  return CostParser(text, declared, line).parse();
}

CostExpr sum_terms(std::span<const CostExpr> terms) {
  if (terms.empty()) throw Error("sum_terms over an empty sequence");
  if (terms.size() == 1) return terms[0];
  CostExpr total = terms[0];
  for (size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
  return total / CostExpr::constant(static_cast<double>(terms.size()));
}

static_assert(sizeof(node_kind_of) != 0);  // silence unused warning

}  // namespace dsat
