#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "maxclone/fnspace.hpp"
#include "maxclone/relation.hpp"

namespace maxclone {

// Named relations over one domain; names not defined here fall back to the
// catalog ("OR3", "Compl_3_0", "affine_3_1", "rel2", "delta0", ...).
class RelationLibrary {
 public:
  explicit RelationLibrary(int d = 2) : d_(d) {}

  int domain() const noexcept { return d_; }
  void add(const std::string& name, const Relation& r);
  bool defines(const std::string& name) const { return named_.count(name) != 0; }
  Relation resolve(const std::string& name) const;
  // Definition order is kept for reports.
  const std::vector<std::pair<std::string, Relation>>& entries() const noexcept { return order_; }

 private:
  int d_;
  std::map<std::string, Relation> named_;
  std::vector<std::pair<std::string, Relation>> order_;
};

Relation resolve_catalog_name(const std::string& name, int d);

// `domain d`, then `relation NAME ARITY` blocks of digit-string tuples, each
// closed by `end`; `#` starts a comment line.
RelationLibrary parse_relation_file(std::istream& in, const std::string& source = "<input>");
RelationLibrary read_relation_file(const std::string& path);
void write_relation_block(std::ostream& out, const std::string& name, const Relation& r);
std::string format_relation_file(const RelationLibrary& lib);

struct FunctionFile {
  int d = 2;
  std::vector<std::pair<std::string, PartialFunction>> functions;
};

// `function NAME ARITY`, one entry per input tuple in index order (digit or
// `-`), `end`. An optional `domain d` line precedes the blocks.
FunctionFile parse_function_file(std::istream& in, const std::string& source = "<input>");
void write_function_block(std::ostream& out, const std::string& name, const PartialFunction& f);

// Reads a whole file; throws InputError naming the path when it cannot be opened.
std::string slurp(const std::string& path);

}  // namespace maxclone
