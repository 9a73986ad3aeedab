#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "maxclone/closure.hpp"
#include "maxclone/fnspace.hpp"

namespace maxclone {

struct GaloisCandidate {
  Relation rel;
  bool in_inv = false;      // preserved by every function checked
  bool in_closure = false;  // found in the bounded closure
  bool agree() const { return in_inv == in_closure; }
};

struct GaloisReport {
  int d = 2;
  std::set<int> k_set;
  int rel_arity = 0, fn_arity = 0;
  ClosureStatus status = ClosureStatus::Fixpoint;
  std::vector<Relation> closure;  // arity 1..rel_arity
  std::size_t functions = 0;
  std::vector<std::pair<Relation, PartialFunction>> violations;
  std::vector<GaloisCandidate> candidates;
  bool sound() const { return violations.empty(); }
  std::string to_text() const;
};

// Bounded <gamma>_K against mK-pPol(gamma) up to fn_arity: every closure
// member must be preserved by every function; candidates are compared on
// both sides.
GaloisReport galois_check(std::span<const Relation> gamma, int d, const std::set<int>& k_set, int rel_arity,
                          int fn_arity, std::span<const Relation> candidates = {}, int intermediate_cap = 0,
                          std::size_t budget = 200000);

}  // namespace maxclone
