// Core propositional types: variables, literals, clauses, total models and
// model multisets with per-atom frequency statistics.

#ifndef DSAT_CORE_HPP
#define DSAT_CORE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dsat {

// Variables are positive DIMACS ids, 1-based. 0 is never a valid variable.
using Var = int32_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input-syntax error. Lines are 1-based; column 0 means "whole line".
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int column_ = 0)
      : Error("line " + std::to_string(line_) + ": " + msg),
        line(line_),
        column(column_) {}
};

// Arithmetic domain error (log of nonpositive value, division by zero, ...).
struct EvalError : Error {
  using Error::Error;
};

// A literal is a variable with a polarity, stored in signed DIMACS encoding:
// +v for the positive literal, -v for the negated one. Never 0.
class Lit {
 public:
  constexpr Lit() : code_(0) {}
  constexpr Lit(Var v, bool positive) : code_(positive ? v : -v) {}

  static constexpr Lit from_dimacs(int32_t code) {
    Lit l;
    l.code_ = code;
    return l;
  }

  constexpr Var var() const { return code_ < 0 ? -code_ : code_; }
  constexpr bool positive() const { return code_ > 0; }
  constexpr int32_t to_dimacs() const { return code_; }
  constexpr bool valid() const { return code_ != 0; }

  constexpr Lit operator-() const { return from_dimacs(-code_); }

  friend constexpr bool operator==(Lit a, Lit b) = default;
  friend constexpr auto operator<=>(Lit a, Lit b) = default;

 private:
  int32_t code_;
};

using Clause = std::vector<Lit>;

// Sorts by variable, drops duplicate literals in place. Returns true if the
// clause contains complementary literals (a tautology); such clauses are left
// as-is and should be dropped by the caller.
bool normalize_clause(Clause& clause);

// Builds a clause from signed DIMACS codes. Zero codes are rejected.
Clause make_clause(std::initializer_list<int32_t> codes);
Clause make_clause(std::span<const int32_t> codes);

// A total truth assignment over variables 1..num_vars, packed 1 bit per
// variable so that equal models hash and compare cheaply.
class Model {
 public:
  Model() = default;
  explicit Model(Var num_vars);

  Var num_vars() const { return num_vars_; }

  bool value(Var v) const;
  void assign(Var v, bool value);

  // True iff some literal of the clause is true under this model.
  // Requires every clause variable to be within 1..num_vars.
  bool satisfies(const Clause& clause) const;

  // Restriction to variables 1..keep_vars (keep_vars <= num_vars).
  Model project(Var keep_vars) const;

  size_t hash() const;
  std::string to_dimacs_string() const;  // "1 -2 3"

  friend bool operator==(const Model& a, const Model& b) = default;
  // Lexicographic on the packed bits, variable 1 least significant.
  friend bool operator<(const Model& a, const Model& b);

 private:
  Var num_vars_ = 0;
  std::vector<uint64_t> words_;
};

struct ModelHash {
  size_t operator()(const Model& m) const { return m.hash(); }
};

// True iff every clause is satisfied by the model. Throws Error if a clause
// mentions a variable outside the model (the model would not be total there).
bool check_model(std::span<const Clause> clauses, const Model& model);

// Multiset of total models. Counts are unit increments; per-variable true
// counters are maintained incrementally so frequency() is O(1).
class ModelMultiset {
 public:
  ModelMultiset() = default;
  explicit ModelMultiset(Var num_vars);

  Var num_vars() const { return num_vars_; }
  uint64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }
  size_t distinct() const { return counts_.size(); }

  // Increments the count of `model` (must be total over num_vars).
  void add(const Model& model);

  // Merges another multiset over the same variable range.
  void merge(const ModelMultiset& other);

  // Fraction of entries (with multiplicity) where v is true. Throws Error on
  // an empty multiset or out-of-range variable.
  double frequency(Var v) const;

  // Fraction of entries satisfying the query clause. Throws Error on an
  // empty multiset or out-of-range query variable.
  double query_probability(const Clause& query) const;

  // Multiset of projections onto variables 1..keep_vars; equal projections
  // merge with counts added.
  ModelMultiset project(Var keep_vars) const;

  const std::unordered_map<Model, uint64_t, ModelHash>& entries() const {
    return counts_;
  }

 private:
  Var num_vars_ = 0;
  std::unordered_map<Model, uint64_t, ModelHash> counts_;
  std::vector<uint64_t> true_counts_;  // index v-1
  uint64_t total_ = 0;
};

// SplitMix64: tiny deterministic PRNG used for seed derivation and phase
// randomization. Not cryptographic.
struct SplitMix64 {
  uint64_t state = 0;

  explicit SplitMix64(uint64_t seed = 0) : state(seed) {}

  static constexpr uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t next() { return mix(state += 0x9e3779b97f4a7c15ULL); }
  bool flip() { return next() >> 63; }
  // Uniform in [0, n). n must be positive.
  uint64_t below(uint64_t n) { return next() % n; }
};

// Deterministic seed derivation: independent streams per (base, salt) pair.
inline uint64_t derive_seed(uint64_t base, uint64_t salt) {
  return SplitMix64::mix(base + 0x9e3779b97f4a7c15ULL * (salt + 1));
}

}  // namespace dsat

#endif  // DSAT_CORE_HPP
