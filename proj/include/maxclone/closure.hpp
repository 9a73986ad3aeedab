#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "maxclone/fnspace.hpp"
#include "maxclone/relation.hpp"

namespace maxclone {

// ---- derivations -------------------------------------------------------------

struct DerivNode;
using Derivation = std::shared_ptr<const DerivNode>;

struct DerivNode {
  enum class Op { Seed, Subst, Conj, Exists, ExistsK, Max };
  Op op = Op::Seed;
  std::string name;                  // Seed
  std::shared_ptr<const Relation> seed;
  std::vector<int> p1, p2;           // sigma / scopes / quantified positions
  int m = 0;                         // output arity for Subst and Conj
  int k = 0;                         // ExistsK threshold
  std::vector<Derivation> kids;
  int entry = -1;                    // closure entry this node defines, if any
};

Derivation seed_node(std::string name, const Relation& r);
Derivation subst_node(Derivation x, std::vector<int> sigma, int m);
Derivation conj_node(Derivation x, std::vector<int> sx, Derivation y, std::vector<int> sy, int m);
Derivation exists_node(Derivation x, std::vector<int> j);
Derivation exists_k_node(Derivation x, int pos, int k);
Derivation max_node(Derivation x, std::vector<int> j);

Relation replay(const Derivation& d);
// Root expression; nodes that define other closure entries appear as #id.
std::string to_sexpr(const Derivation& d);
// "#id = ..." for every referenced entry (ascending), then the root expression.
std::vector<std::string> derivation_lines(const Derivation& d);

// ---- canonical cores ---------------------------------------------------------

// A relation without dummy or duplicated coordinates, in a permutation-canonical
// order. The source is recovered as substitute(core, orig, n) conjoined with
// EQ(j, dup_of[j]) for every duplicated coordinate j.
struct CoreForm {
  Relation core;
  std::vector<int> rep;                  // source coordinate -> core position
  std::vector<int> orig;                 // core position -> source coordinate
  std::vector<std::pair<int, int>> dups; // (j, i): coordinate j always equals i
};

CoreForm core_form(const Relation& r);
// Derivation of r from a derivation of its core.
Derivation expand_core(const CoreForm& cf, Derivation core_deriv, int arity);

// ---- closure -----------------------------------------------------------------

struct ClosureSignature {
  bool allow_substitution = true;
  bool allow_conjunction = true;
  bool allow_exists = false;
  std::set<int> exists_k;  // k >= 2; k == d is the universal quantifier
  bool allow_max_single = false;
  bool allow_max_block = false;
  int result_arity_cap = 4;
  int intermediate_arity_cap = 8;
  std::size_t frontier_budget = 200000;
  std::uint64_t work_budget = 0;  // operator applications before giving up; 0 = unlimited
  int iteration_limit = 64;

  static ClosureSignature partial_coclone(int d);
  static ClosureSignature coclone(int d);
  static ClosureSignature k_exists(int d, std::set<int> k);
  static ClosureSignature counting(int d);
  static ClosureSignature max_single(int d);
  static ClosureSignature max_block(int d);

  ClosureSignature& caps(int a, int b) {
    result_arity_cap = a;
    intermediate_arity_cap = b;
    return *this;
  }
  void validate() const;
};

enum class ClosureStatus { Fixpoint, BudgetExhausted, IterationLimit, Found };
std::string to_string(ClosureStatus s);

struct ClosureEntry {
  Relation core;
  Derivation deriv;
  int round = 0;
};

struct ClosureResult {
  int d = 2;
  ClosureSignature sig;
  ClosureStatus status = ClosureStatus::Fixpoint;
  int rounds = 0;
  std::vector<ClosureEntry> entries;  // canonical cores, arity <= intermediate cap

  // Every relation of arity 1..max_arity obtained from a core by substitution,
  // sorted, with a derivation each. Bounded closure: complete only up to caps.
  std::vector<std::pair<Relation, Derivation>> relations(int max_arity) const;
  std::vector<std::pair<Relation, Derivation>> relations() const { return relations(sig.result_arity_cap); }
  bool contains(const Relation& r) const;
};

// Stop predicate is checked on each new core; returning true ends the run with
// status Found.
ClosureResult close(std::span<const Relation> gamma, const ClosureSignature& sig, int d,
                    const std::function<bool(const Relation&)>& stop = {});

// Replayable witness for r, or nullopt if not reached within caps (which does
// not prove non-membership).
std::optional<Derivation> member(const Relation& r, std::span<const Relation> gamma, const ClosureSignature& sig);

// ---- rel_m oracle ------------------------------------------------------------

enum class RelmVariant { Plain, KExists, Counting, Max };

// Structural membership test over the rel_m domain: a partition into related
// blocks with per-block class thresholds (KExists: {1,k}, Counting: any,
// Max: {1,m}). Unless literal, blocks may be refined by equality and the empty
// relation is admitted where a threshold k >= 2 quantifier is available, since
// every closure contains the equality relation.
bool relm_oracle(int m, const Relation& r, RelmVariant v, int k = 1, bool literal = false);
// Every relation of arity 1..max_arity matching the description.
std::vector<Relation> relm_described(int m, int max_arity, RelmVariant v, int k = 1, bool literal = false);

// ---- max vs single-max separation -------------------------------------------

struct SeparationReport {
  bool found = false;
  std::optional<Relation> relation;
  std::optional<Derivation> derivation;
  std::optional<PartialFunction> obstruction;  // surjective polymorphism of gamma not preserving relation
  std::string message;
};

SeparationReport max_vs_single_max_witness(std::span<const Relation> gamma, const ClosureSignature& caps,
                                       std::span<const Relation> candidates = {});

}  // namespace maxclone
