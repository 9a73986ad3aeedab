#pragma once

#include <gmpxx.h>

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maxclone/closure.hpp"
#include "maxclone/counting.hpp"
#include "maxclone/formula.hpp"
#include "maxclone/relation.hpp"

namespace maxclone {

enum class LabelTag {
  IBF, IR0, IR1, IR2, IM2,
  ISk0, IS0, ISk1, IS1, ISk02, IS02, ISk12, IS12,
  ID, ID1, IL, IL0, IL1, IL2, IL3, IN2, II2
};

struct MaxCoCloneLabel {
  LabelTag tag = LabelTag::II2;
  int k = 0;  // chain parameter for ISk*, 0 otherwise

  MaxCoCloneLabel() = default;
  MaxCoCloneLabel(LabelTag t, int chain = 0);

  bool is_chain() const noexcept;  // ISk0, ISk1, ISk02, ISk12
  bool is_limit() const noexcept;  // IS0, IS1, IS02, IS12
  // "IM2", "IS3_02", "IS0", ...
  std::string name() const;
  static MaxCoCloneLabel parse(const std::string& s);

  friend bool operator==(const MaxCoCloneLabel&, const MaxCoCloneLabel&) = default;
  friend auto operator<=>(const MaxCoCloneLabel&, const MaxCoCloneLabel&) = default;
};

enum class ApClass { FP, BIS_EQUIVALENT, SAT_EQUIVALENT };
std::string to_string(ApClass c);

struct RelationEvidence {
  StructuralPredicates predicates;
  bool zero_valid = false;
  bool one_valid = false;
  bool preserved_by_majority = false;
  std::optional<FilterAnalysis> filter;      // set for or-closed relations
  std::optional<FilterAnalysis> dual_filter;  // set for and-closed relations, on the 0/1 swap
};

struct Classification {
  MaxCoCloneLabel label;
  ApClass ap = ApClass::SAT_EQUIVALENT;
  int branch = 0;  // decision-tree step that fired, 1..7
  std::vector<RelationEvidence> evidence;
  std::vector<std::string> notes;
  // Bounded-closure derivation of a relation that pins the label, when requested and found.
  std::optional<Relation> witness;
  std::optional<Derivation> witness_derivation;
};

// Boolean relations only; throws InputError on d != 2 or an empty set.
Classification classify_max_coclone(std::span<const Relation> gamma, bool derive_witness = false);
ApClass trichotomy(std::span<const Relation> gamma);

// Bitwise complement of every tuple.
Relation swap01(const Relation& r);

bool label_membership(const Relation& r, const MaxCoCloneLabel& label);

// Basis rows per label. Limit rows take OR/NAND arities 2..limit_arity; the affine
// rows are cut at arity 3, except IL and IL3 which need the 4-ary equation.
std::vector<Relation> max_basis(const MaxCoCloneLabel& label, int limit_arity = 5);
std::vector<std::pair<std::string, Relation>> named_max_basis(const MaxCoCloneLabel& label, int limit_arity = 5);

// All labels with chains at 2..kmax plus the four limits.
std::vector<MaxCoCloneLabel> lattice_labels(int kmax);
// Covering pairs (lower, upper) of the max-co-clone lattice, chains cut at kmax.
std::vector<std::pair<MaxCoCloneLabel, MaxCoCloneLabel>> hasse_edges(int kmax);

// ---- switching identities and the IN2 witness --------------------------------

struct IdentityCheck {
  std::string name;
  Formula formula;
  Relation expected;
  Relation got;
  bool ok() const { return expected == got; }
};

// The three Compl switching identities at (k, l), where applicable.
std::vector<IdentityCheck> switching_identities(int k, int l);

enum class In2Variant {
  Literal,   // one auxiliary per k-subset in both halves
  PairWise,  // second half uses one auxiliary per complementary pair
};

struct In2Report {
  int k = 2;
  In2Variant variant = In2Variant::Literal;
  Formula formula;
  RelationLibrary library{2};  // relations named in the formula
  std::vector<std::string> x_vars, aux_vars;
  std::vector<mpz_class> profile;      // extensions by number of zeros; set only when symmetric
  bool symmetric = true;               // count depends only on the number of zeros
  Relation result{2, 0};               // tuples of maximal extension count
  Relation expected{2, 0};             // Compl_{2k,0}
  mpz_class predicted;                 // 2^(C(2k,k)/2)
  bool matches = false;
  bool profile_constant = false;       // one value for 0 < m < 2k, zero at the ends
  std::vector<IdentityCheck> identities;
  bool pass() const;
  std::string to_text() const;
};

// The auxiliary relation of the second half: y free when x_1..x_k are equal,
// else y = x_1.
Relation in2_side_relation(int k);
// PairWise variant: over (x_I, x_J, y) with |I| = |J| = k; y free when either
// half is constant, else y = x_1.
Relation in2_pair_relation(int k);

In2Report in2_witness(int k, In2Variant variant = In2Variant::Literal,
                      std::uint64_t node_limit = kDefaultNodeLimit);

// ---- universal implementation ------------------------------------------------

// One auxiliary z_a per tuple a of r, with IMP(z_a, x_i) where a_i = 1 and
// NAND(z_a, x_i) where a_i = 0; z_a is free exactly when x = a. Atoms are
// named IMP and NAND; free variables x1..xn.
Formula universal_formula(const Relation& r);
// The same as a verified max-implementation (M = 2).
MaxImplementation universal_implementation(const Relation& r);

// ---- lattice verification ----------------------------------------------------

struct LatticeOptions {
  int kmax = 4;
  int spot_arity = 3;          // A for the closure-preservation spot checks
  int spot_intermediate = 7;   // B for the same
  std::size_t spot_budget = 200000;
  std::uint64_t spot_work = 3000000;  // self-complement closures never saturate at B = 7
  int member_slack = 2;        // member searches use B = arity + slack
  std::size_t member_budget = 50000;
  bool spot_checks = true;
  int jobs = 1;  // worker threads for edges and spot checks
};

struct EdgeReport {
  MaxCoCloneLabel lower, upper;
  bool structural_inclusion = false;
  bool closure_inclusion = false;
  std::vector<std::string> unreached;  // lower generators not found in the bounded closure
  // Generators certified through universal_implementation instead, for edges
  // into II2 (whose basis then only has to reach NAND).
  std::vector<std::string> via_universal;
  bool strict = false;
  std::optional<std::string> strict_witness;  // upper generator outside the lower label
  bool pass() const { return structural_inclusion && closure_inclusion && strict; }
};

struct SpotCheck {
  MaxCoCloneLabel label;
  ClosureStatus status = ClosureStatus::Fixpoint;
  std::size_t entries = 0;
  std::size_t violations = 0;
  std::optional<Relation> first_violation;
  double seconds = 0;
  bool pass() const { return violations == 0; }
};

struct LatticeReport {
  std::vector<EdgeReport> edges;
  std::vector<SpotCheck> spots;
  // Covering pairs recomputed from the membership predicates agree with the edge list.
  bool covers_consistent = false;
  std::vector<std::string> cover_mismatches;
  bool pass() const;
  std::string to_text() const;
  std::string to_dot() const;
};

LatticeReport verify_lattice(const LatticeOptions& opt);

}  // namespace maxclone
