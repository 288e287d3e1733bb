#include "dsat/core.hpp"

#include <algorithm>
#include <cassert>

namespace dsat {

bool normalize_clause(Clause& clause) {
  std::sort(clause.begin(), clause.end(), [](Lit a, Lit b) {
    if (a.var() != b.var()) return a.var() < b.var();
    return a.positive() && !b.positive();
  });
  clause.erase(std::unique(clause.begin(), clause.end()), clause.end());
  for (size_t i = 1; i < clause.size(); ++i)
    if (clause[i].var() == clause[i - 1].var()) return true;  // tautology
  return false;
}

Clause make_clause(std::span<const int32_t> codes) {
  Clause c;
  c.reserve(codes.size());
  for (int32_t code : codes) {
    if (code == 0) throw Error("literal code 0 is not a literal");
    c.push_back(Lit::from_dimacs(code));
  }
  return c;
}

Clause make_clause(std::initializer_list<int32_t> codes) {
  return make_clause(std::span<const int32_t>(codes.begin(), codes.size()));
}

Model::Model(Var num_vars)
    : num_vars_(num_vars), words_((static_cast<size_t>(num_vars) + 63) / 64) {
  if (num_vars < 0) throw Error("negative variable count");
}

bool Model::value(Var v) const {
  if (v < 1 || v > num_vars_) throw Error("variable out of model range");
  size_t bit = static_cast<size_t>(v - 1);
  return (words_[bit >> 6] >> (bit & 63)) & 1;
}

void Model::assign(Var v, bool value) {
  if (v < 1 || v > num_vars_) throw Error("variable out of model range");
  size_t bit = static_cast<size_t>(v - 1);
  uint64_t mask = uint64_t{1} << (bit & 63);
  if (value)
    words_[bit >> 6] |= mask;
  else
    words_[bit >> 6] &= ~mask;
}

bool Model::satisfies(const Clause& clause) const {
  for (Lit l : clause)
    if (value(l.var()) == l.positive()) return true;
  return false;
}

Model Model::project(Var keep_vars) const {
  if (keep_vars < 0 || keep_vars > num_vars_)
    throw Error("projection range exceeds model");
  Model out(keep_vars);
  for (size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[w];
  // Clear bits above keep_vars in the last word.
  if (keep_vars % 64 != 0 && !out.words_.empty())
    out.words_.back() &= (uint64_t{1} << (keep_vars % 64)) - 1;
  return out;
}

size_t Model::hash() const {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(num_vars_);
  for (uint64_t w : words_) h = SplitMix64::mix(h ^ w) + 0x2545f4914f6cdd1dULL;
  return static_cast<size_t>(h);
}

std::string Model::to_dimacs_string() const {
  std::string s;
  for (Var v = 1; v <= num_vars_; ++v) {
    if (!s.empty()) s += ' ';
    if (!value(v)) s += '-';
    s += std::to_string(v);
  }
  return s;
}

bool operator<(const Model& a, const Model& b) {
  if (a.num_vars_ != b.num_vars_) return a.num_vars_ < b.num_vars_;
  for (size_t w = a.words_.size(); w-- > 0;)
    if (a.words_[w] != b.words_[w]) return a.words_[w] < b.words_[w];
  return false;
}

bool check_model(std::span<const Clause> clauses, const Model& model) {
  for (const Clause& c : clauses) {
    bool sat = false;
    for (Lit l : c) {
      if (l.var() < 1 || l.var() > model.num_vars())
        throw Error("model is not total over clause variables");
      if (model.value(l.var()) == l.positive()) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

ModelMultiset::ModelMultiset(Var num_vars)
    : num_vars_(num_vars), true_counts_(static_cast<size_t>(num_vars), 0) {}

void ModelMultiset::add(const Model& model) {
  if (model.num_vars() != num_vars_)
    throw Error("model range does not match multiset");
  ++counts_[model];
  ++total_;
  for (Var v = 1; v <= num_vars_; ++v)
    if (model.value(v)) ++true_counts_[static_cast<size_t>(v - 1)];
}

void ModelMultiset::merge(const ModelMultiset& other) {
  if (other.num_vars_ != num_vars_)
    throw Error("multiset variable ranges differ");
  for (const auto& [model, count] : other.counts_) counts_[model] += count;
  for (size_t i = 0; i < true_counts_.size(); ++i)
    true_counts_[i] += other.true_counts_[i];
  total_ += other.total_;
}

double ModelMultiset::frequency(Var v) const {
  if (total_ == 0) throw Error("frequency undefined on empty multiset");
  if (v < 1 || v > num_vars_) throw Error("variable out of multiset range");
  return static_cast<double>(true_counts_[static_cast<size_t>(v - 1)]) /
         static_cast<double>(total_);
}

double ModelMultiset::query_probability(const Clause& query) const {
  if (total_ == 0)
    throw Error("query probability undefined on empty multiset");
  uint64_t sat = 0;
  for (const auto& [model, count] : counts_)
    if (model.satisfies(query)) sat += count;
  return static_cast<double>(sat) / static_cast<double>(total_);
}

ModelMultiset ModelMultiset::project(Var keep_vars) const {
  ModelMultiset out(keep_vars);
  for (const auto& [model, count] : counts_) {
    Model p = model.project(keep_vars);
    out.counts_[p] += count;
    for (Var v = 1; v <= keep_vars; ++v)
      if (p.value(v)) out.true_counts_[static_cast<size_t>(v - 1)] += count;
  }
  out.total_ = total_;
  return out;
}

}  // namespace dsat
