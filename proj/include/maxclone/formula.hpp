#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maxclone/counting.hpp"
#include "maxclone/errors.hpp"
#include "maxclone/io.hpp"
#include "maxclone/relation.hpp"

namespace maxclone {

struct Formula {
  enum class Kind { Atom, And, Exists, ExistsK, Max };
  Kind kind = Kind::And;
  std::string rel;                // Atom
  std::vector<std::string> vars;  // atom arguments, or the bound variables
  int k = 1;                      // ExistsK
  std::vector<Formula> kids;

  static Formula atom(std::string rel, std::vector<std::string> vars);
  static Formula conj(std::vector<Formula> kids);
  static Formula exists(std::vector<std::string> vars, Formula f);
  static Formula exists_k(int k, std::string var, Formula f);
  static Formula mex(std::vector<std::string> vars, Formula f);

  friend bool operator==(const Formula&, const Formula&) = default;
};

// (atom NAME v...), (and f...), (exists (v...) f), (exists_k K (v) f), (mex (v...) f)
Formula parse_formula(const std::string& text);
std::string to_string(const Formula& f);
// Free variables in order of first occurrence.
std::vector<std::string> free_variables(const Formula& f);

// Relation over `order`, which must list every free variable (extra names
// become dummy coordinates).
Relation evaluate(const Formula& f, const std::vector<std::string>& order, const RelationLibrary& lib);
Relation evaluate(const Formula& f, const RelationLibrary& lib);

struct FlattenCountingResult {
  Formula prenex;
  std::vector<std::pair<std::string, std::string>> renamed;  // (old, new) per renamed binder
  bool verified = false;                                     // false only when evaluation was too large
};

FlattenCountingResult flatten_counting(const Formula& f, const RelationLibrary& lib);

struct FlattenStats {
  std::uint64_t M = 0;  // most inner-block witnesses b with some extension, over all outer tuples
  std::uint64_t N = 0;  // most extensions of a pair (a, b) into the nested block
  std::uint64_t L = 0;  // as M, restricted to tuples of the defined relation
  int c = 1;            // copies of the nested block
  bool strict_adjusted = false;  // ceiling landed on the threshold; floor + 1 used instead
};

struct FlattenMaxResult {
  std::vector<std::string> block;
  std::vector<Formula> atoms;
  std::vector<FlattenStats> stats;  // one per nested-block collapse
  bool verified = false;

  Formula formula() const;  // (mex (block) (and atoms)), or the bare conjunction
};

// Raised when two max-defined conjuncts share no tuple attaining both maxima.
class EmptyConjunctionError : public InputError {
 public:
  EmptyConjunctionError(const std::string& what, Relation left, std::vector<std::string> left_vars, Relation right,
                        std::vector<std::string> right_vars)
      : InputError(what), left(std::move(left)), left_vars(std::move(left_vars)), right(std::move(right)),
        right_vars(std::move(right_vars)) {}
  Relation left;
  std::vector<std::string> left_vars;
  Relation right;
  std::vector<std::string> right_vars;
};

FlattenMaxResult flatten_max(const Formula& f, const RelationLibrary& lib);

// Smallest c >= 1 with M (N-1)^c < L N^c, and the value the closed-form
// bound produces (with the strictness adjustment).
int minimal_copies(std::uint64_t M, std::uint64_t N, std::uint64_t L);
std::pair<int, bool> copies_from_bound(std::uint64_t M, std::uint64_t N, std::uint64_t L);

// ---- max-implementations and the reduction gadget ---------------------------

struct MaxImplementation {
  CspInstance instance;      // variables: x_vars first, then y_vars
  std::vector<int> x_vars;
  std::vector<int> y_vars;
  Relation target{2, 0};
  std::string target_name;
  mpz_class M;
};

// Counts extensions for every assignment of x_names and takes the maximisers
// as the target; throws VerificationError if `expected` disagrees.
MaxImplementation make_max_implementation(const CspInstance& inst, const std::vector<std::string>& x_names,
                                          const std::string& target_name,
                                          const std::optional<Relation>& expected = std::nullopt);
// From a flat formula (mex (y...) (and atoms...)); x = free variables in order.
MaxImplementation max_implementation_from(const Formula& flat, const RelationLibrary& lib,
                                          const std::string& target_name,
                                          const std::optional<Relation>& expected = std::nullopt);

struct GadgetResult {
  CspInstance p2;  // V1 first, in P1 order
  int m = 1;
  mpz_class M;
  int ell = 0;
};

// Smallest m with m > (|V1| ln d - ln eps) / (ln M - ln(M-1)); 1 when M = 1.
int gadget_copies(int v1, int d, const mpz_class& M, double eps);

GadgetResult ap_gadget(const CspInstance& p1, const MaxImplementation& gadget, double eps);

struct ReductionReport {
  mpz_class count1, count2;
  int m = 1;
  mpz_class M;
  int ell = 0;
  mpq_class raw_estimate;     // #P2 / M^(ell m)
  mpq_class estimate;         // raw, or 0 when raw < 1 (only an empty P1 can give that)
  mpq_class relative_error;   // |raw - #P1| / #P1, 0 when #P1 = 0
  mpz_class lower_bound, upper_bound;
  bool sandwich = false;
  bool within_eps = false;    // vacuous for unsatisfiable P1
  bool unsat_raw_nonzero = false;
  bool extensions_checked = false;
  bool extensions_ok = true;  // every solution extends M^(ell m) ways, others at most (M-1)^m M^((ell-1)m)

  bool pass() const { return sandwich && within_eps && extensions_ok; }
  std::string to_text() const;
};

ReductionReport verify_reduction(const CspInstance& p1, const MaxImplementation& gadget, double eps);

}  // namespace maxclone
