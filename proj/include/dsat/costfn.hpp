// Differentiable cost expressions over atom-frequency variables f(v).
//
// Node kinds: constants, f(v), + - * / ^ (constant exponent), unary minus,
// abs, exp, log, sqrt, and sign (the subgradient of abs, with sign(0) = 0).
// Trees are immutable and share subtrees; all operations are value-based.

#ifndef DSAT_COSTFN_HPP
#define DSAT_COSTFN_HPP

#include <memory>
#include <set>
#include <span>
#include <string>
#include <unordered_map>

#include "dsat/core.hpp"

namespace dsat {

using FreqMap = std::unordered_map<Var, double>;

class CostExpr {
 public:
  enum class Kind {
    Const,
    Freq,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,  // base ^ constant exponent
    Abs,
    Sign,
    Exp,
    Log,
    Sqrt,
  };

  // Default-constructed expression is the constant 0.
  CostExpr();

  static CostExpr constant(double value);
  static CostExpr freq(Var v);

  Kind kind() const;
  double const_value() const;  // Const: value, Pow: exponent
  Var freq_var() const;        // Freq only
  CostExpr left() const;       // first operand of unary/binary nodes
  CostExpr right() const;      // second operand of binary nodes

  // Standard real arithmetic. Throws EvalError on log of a nonpositive
  // value, sqrt of a negative value, division by zero, 0 raised to a
  // negative power, a negative base with fractional exponent, or a frequency
  // variable missing from `freqs`. Never returns NaN silently.
  double evaluate(const FreqMap& freqs) const;

  // Symbolic partial derivative with respect to f(v). Total on valid trees;
  // d|u| = sign(u) * u' with sign(0) = 0.
  CostExpr derivative(Var v) const;

  // Value-preserving constant folding and 0/1 identities. Folding skips
  // subtrees whose constant evaluation would raise a domain error.
  CostExpr simplified() const;

  // Grammar-compatible rendering; parse(to_string()) reproduces the tree.
  std::string to_string() const;

  void collect_freq_vars(std::set<Var>& out) const;

  // Structural equality (with a shared-subtree fast path).
  friend bool operator==(const CostExpr& a, const CostExpr& b);

  friend CostExpr operator+(const CostExpr& a, const CostExpr& b);
  friend CostExpr operator-(const CostExpr& a, const CostExpr& b);
  friend CostExpr operator*(const CostExpr& a, const CostExpr& b);
  friend CostExpr operator/(const CostExpr& a, const CostExpr& b);
  friend CostExpr operator-(const CostExpr& a);
  friend CostExpr pow(const CostExpr& base, double exponent);
  friend CostExpr abs(const CostExpr& e);
  friend CostExpr sign(const CostExpr& e);
  friend CostExpr exp(const CostExpr& e);
  friend CostExpr log(const CostExpr& e);
  friend CostExpr sqrt(const CostExpr& e);

 private:
  struct Node;
  using NodePtr = std::shared_ptr<const Node>;

  explicit CostExpr(NodePtr node) : node_(std::move(node)) {}

  NodePtr node_;
};

// Parses the objective grammar: numeric literals, f(<var>), infix + - * / ^,
// unary minus, abs/sign/exp/log/sqrt, parentheses. Precedence ^ > unary
// minus > * / > + -, with ^ right-associative. Exponents must fold to
// numeric constants. Every f(v) must have v in `declared`.
//
// Errors are reported as ParseError with 1-based line/column positions;
// `line` is the line number attributed to the whole expression (cost lines
// inside enhanced CNF files pass their file line here).
CostExpr parse_cost(std::string_view text, const std::set<Var>& declared,
                    int line = 1);

// Arithmetic mean of the terms (sum divided by term count), simplified.
// Throws Error on an empty sequence.
CostExpr sum_terms(std::span<const CostExpr> terms);

// Lossless shortest decimal rendering of a double, guaranteed to contain a
// '.' or be an integer literal (never exponent notation), so that the result
// survives the cost grammar and the PCNF probability-token rule.
std::string format_double(double value);

}  // namespace dsat

#endif  // DSAT_COSTFN_HPP
