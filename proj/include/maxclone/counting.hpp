#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "maxclone/io.hpp"
#include "maxclone/relation.hpp"

namespace maxclone {

struct Constraint {
  std::vector<int> scope;  // variable indices, repetitions allowed
  std::string name;
  Relation rel;
};

struct CspInstance {
  int d = 2;
  std::vector<std::string> vars;
  std::vector<Constraint> constraints;

  int var_index(const std::string& v) const;  // throws InputError
  int add_var(const std::string& v);
  void add(const std::string& name, const Relation& r, const std::vector<std::string>& scope);
  void validate() const;
};

// Search nodes the backtracking counter may visit before giving up.
inline constexpr std::uint64_t kDefaultNodeLimit = std::uint64_t{1} << 33;

// Exact number of solutions; backtracking with pruning once a constraint's
// scope is fully assigned, multiplying counts of independent components.
mpz_class count(const CspInstance& p, std::uint64_t node_limit = kDefaultNodeLimit);
// Solutions agreeing with `prefix` on the first prefix.size() variables.
mpz_class count_extensions(const CspInstance& p, std::span<const int> prefix,
                           std::uint64_t node_limit = kDefaultNodeLimit);
// Full enumeration of d^|V| assignments; reference for tests.
mpz_class count_naive(const CspInstance& p);

// `domain d`, `var ...` lines, `con NAME v...` lines, `end`.
CspInstance parse_instance(std::istream& in, const RelationLibrary& lib, const std::string& source = "<input>");
CspInstance read_instance(const std::string& path, const RelationLibrary& lib);
std::string format_instance(const CspInstance& p);

}  // namespace maxclone
