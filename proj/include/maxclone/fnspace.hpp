#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "maxclone/relation.hpp"

namespace maxclone {

class PartialFunction {
 public:
  static constexpr int kUndef = -1;

  PartialFunction(int d, int n);  // nowhere defined
  PartialFunction(int d, int n, std::vector<int> table);

  int domain() const noexcept { return d_; }
  int arity() const noexcept { return n_; }
  const std::vector<int>& table() const noexcept { return table_; }

  int at(std::uint64_t idx) const { return table_[idx]; }
  int operator()(std::span<const int> args) const { return table_[encode(args, d_)]; }
  void define(std::span<const int> args, int value);
  bool is_total() const noexcept;

  friend bool operator==(const PartialFunction&, const PartialFunction&) = default;
  // Lexicographic on the table, undefined after every value.
  friend std::strong_ordering operator<=>(const PartialFunction& a, const PartialFunction& b);

 private:
  int d_;
  int n_;
  std::vector<int> table_;
};

// Boolean helpers.
PartialFunction join_fn();
PartialFunction meet_fn();
PartialFunction negation_fn();
PartialFunction majority_fn();
PartialFunction minority_fn();  // x ^ y ^ z
PartialFunction constant_fn(int d, int n, int c);
PartialFunction projection_fn(int d, int n, int i);

bool preserves(const PartialFunction& f, const Relation& r);
bool preserves_all(const PartialFunction& f, std::span<const Relation> gamma);

// Every box A_1 x ... x A_n of k-subsets has at least k distinct defined outputs.
bool k_subset_surjective(const PartialFunction& f, int k);
bool subset_surjective(const PartialFunction& f);

// Binary total function on d = k that is l-subset surjective exactly for l != m.
PartialFunction example4_function(int k, int m);

enum class FunctionMode { Total, Partial };

std::uint64_t function_count(int d, int n, FunctionMode mode);

// Streams every function of arity n in canonical order; the visitor may
// return false to stop early.
void enumerate_functions(int d, int n, FunctionMode mode,
                         const std::function<bool(const PartialFunction&)>& visit);
std::vector<PartialFunction> enumerate_functions(int d, int n, FunctionMode mode);

struct FunctionSet {
  int d = 2;
  int max_arity = 0;
  std::vector<std::vector<PartialFunction>> by_arity;  // index = arity, 1..max_arity filled

  std::size_t size() const;
  std::vector<PartialFunction> all() const;
};

FunctionSet pol(std::span<const Relation> gamma, int d, int arity_cap);
FunctionSet ppol(std::span<const Relation> gamma, int d, int arity_cap);
FunctionSet mk_ppol(std::span<const Relation> gamma, std::span<const int> k_set, int d, int arity_cap);

// Relations of arity 0..cap preserved by every function (d = 2, cap <= 4).
std::vector<Relation> inv(std::span<const PartialFunction> fs, int d, int arity_cap);

}  // namespace maxclone
