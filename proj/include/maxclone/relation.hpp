#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxclone/errors.hpp"

namespace maxclone {

using Tuple = std::vector<int>;

inline constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 24;
inline constexpr int kMaxDomain = 6;

// d^n, throwing ResourceError past kMaxCells.
std::uint64_t cell_count(int d, int n);

// Index of a tuple: big-endian radix d, position 0 most significant.
std::uint64_t encode(std::span<const int> t, int d);
Tuple decode(std::uint64_t idx, int d, int n);

class Relation {
 public:
  Relation(int d, int n);  // empty relation

  static Relation full(int d, int n);

  int domain() const noexcept { return d_; }
  int arity() const noexcept { return n_; }
  std::uint64_t cells() const noexcept { return cells_; }

  bool test(std::uint64_t idx) const noexcept { return (words_[idx >> 6] >> (idx & 63)) & 1U; }
  bool contains(std::span<const int> t) const;
  void set(std::uint64_t idx, bool v = true) noexcept;
  void insert(std::span<const int> t);

  std::uint64_t size() const noexcept;
  bool empty() const noexcept;
  bool is_full() const noexcept;

  // Member tuples in increasing index order.
  std::vector<Tuple> tuples() const;
  std::vector<std::uint64_t> indices() const;

  Relation operator&(const Relation& o) const;
  Relation operator|(const Relation& o) const;
  Relation complement() const;

  friend bool operator==(const Relation&, const Relation&) = default;
  // Total order: (d, n, bit vector read from the highest index down).
  friend std::strong_ordering operator<=>(const Relation& a, const Relation& b);

  std::size_t hash() const noexcept;

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  // "00 01 11" style listing; "{}" when empty, "()" for the arity-0 true relation.
  std::string to_string() const;

 private:
  void check_same_shape(const Relation& o) const;

  int d_;
  int n_;
  std::uint64_t cells_;
  std::vector<std::uint64_t> words_;
};

struct RelationHash {
  std::size_t operator()(const Relation& r) const noexcept { return r.hash(); }
};

Relation make_relation(int d, int n, const std::vector<Tuple>& tuples);
// Tuples given as digit strings, e.g. {"01","10"}.
Relation make_relation(int d, int n, const std::vector<std::string>& tuples);

// Parameters are read per name:
//   eq / "=": d, arity 2.   delta0, delta1, neq, EQ: Boolean.
//   imp k, nimp k: arity k+1.   or k, nand k: arity k.
//   compl k l: arity k+l.   affine k c: x1^..^xk = c.   relm m.
Relation catalog(const std::string& name, std::span<const int> params = {}, int d = 2);

Relation eq_rel(int d);
Relation delta(int c);
Relation neq();
Relation imp(int k = 1);
Relation nimp(int k = 1);
Relation or_rel(int k = 2);
Relation nand_rel(int k = 2);
Relation compl_rel(int k, int l);
Relation affine_rel(int k, int c);
// Equivalence with classes D_1..D_m, |D_i| = i, on m(m+1)/2 elements.
Relation relm(int m);
// Class (1-based) of a domain element of relm(m).
int relm_class(int m, int element);

// Positions are 0-based throughout.

// b (arity m) is a member iff (b[sigma[0]], ..., b[sigma[n-1]]) is in r.
Relation substitute(const Relation& r, std::span<const int> sigma, int m);

Relation conjoin(const Relation& r1, std::span<const int> scope1, const Relation& r2,
                 std::span<const int> scope2, int out_arity);

// Counts of extensions over the positions in j, indexed by the outer tuple
// (the remaining positions, in order).
std::vector<std::uint64_t> extension_counts(const Relation& r, std::span<const int> j);

Relation exists(const Relation& r, std::span<const int> positions);
Relation exists(const Relation& r, int position);
Relation forall(const Relation& r, int position);
Relation exists_k(const Relation& r, int position, int k);
// Keeps outer tuples whose extension count equals the global maximum;
// an empty r yields the full relation.
Relation max_quantify(const Relation& r, std::span<const int> j);

struct TrivialWitness {
  std::vector<int> zero;                // positions forced to 0
  std::vector<int> one;                 // positions forced to 1
  std::vector<std::vector<int>> eq;     // nontrivial equality classes
};

struct StructuralPredicates {
  bool is_affine = false;
  bool is_self_complement = false;
  bool is_or_closed = false;
  bool is_and_closed = false;
  bool is_log_supermodular = false;
  bool is_trivial = false;
  std::optional<TrivialWitness> trivial_witness;
};

StructuralPredicates structural_predicates(const Relation& r);

struct FilterAnalysis {
  std::vector<std::vector<int>> eq_classes;
  std::vector<int> support;
  std::uint64_t conforming_count = 0;
  bool is_filter = false;
  std::vector<Tuple> max_excluded;
  int r = 0;
};

FilterAnalysis filter_property(const Relation& r);

}  // namespace maxclone
