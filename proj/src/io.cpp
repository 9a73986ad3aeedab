#include "maxclone/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "maxclone/errors.hpp"

namespace maxclone {

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": expected an integer, got '" + s + "'");
}

// Line reader that skips blanks and comments and tracks positions.
class Lines {
 public:
  Lines(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  bool next(std::vector<std::string>& toks) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      const auto start = line.find_first_not_of(" \t\r");
      if (start == std::string::npos || line[start] == '#') continue;
      toks = tokens(line);
      return true;
    }
    return false;
  }
  std::string where() const { return source_ + ":" + std::to_string(line_no_); }

 private:
  std::istream& in_;
  std::string source_;
  int line_no_ = 0;
};

}  // namespace

void RelationLibrary::add(const std::string& name, const Relation& r) {
  if (r.domain() != d_) throw InputError("relation '" + name + "' has domain " + std::to_string(r.domain()));
  if (!named_.emplace(name, r).second) throw InputError("relation '" + name + "' defined twice");
  order_.emplace_back(name, r);
}

Relation RelationLibrary::resolve(const std::string& name) const {
  if (auto it = named_.find(name); it != named_.end()) return it->second;
  return resolve_catalog_name(name, d_);
}

Relation resolve_catalog_name(const std::string& name, int d) {
  try {
    return catalog(name, {}, d);
  } catch (const InputError&) {
  }
  std::string base = name;
  std::vector<int> params;
  if (const auto us = name.find('_'); us != std::string::npos) {
    base = name.substr(0, us);
    std::stringstream rest(name.substr(us + 1));
    for (std::string part; std::getline(rest, part, '_');) params.push_back(parse_int(part, "relation name '" + name + "'"));
  } else {
    std::size_t cut = name.size();
    while (cut > 0 && std::isdigit(static_cast<unsigned char>(name[cut - 1]))) --cut;
    if (cut == name.size() || cut == 0) throw InputError("unknown relation '" + name + "'");
    base = name.substr(0, cut);
    params.push_back(parse_int(name.substr(cut), "relation name '" + name + "'"));
  }
  try {
    return catalog(base, params, d);
  } catch (const InputError& e) {
    throw InputError("unknown relation '" + name + "': " + e.what());
  }
}

RelationLibrary parse_relation_file(std::istream& in, const std::string& source) {
  Lines lines(in, source);
  std::vector<std::string> t;
  if (!lines.next(t) || t.size() != 2 || t[0] != "domain")
    throw InputError(lines.where() + ": expected 'domain <d>'");
  const int d = parse_int(t[1], lines.where());
  if (d < 2 || d > kMaxDomain) throw InputError(lines.where() + ": domain must be in [2,6]");
  RelationLibrary lib(d);
  while (lines.next(t)) {
    if (t.size() != 3 || t[0] != "relation") throw InputError(lines.where() + ": expected 'relation <name> <arity>'");
    const std::string name = t[1];
    const int n = parse_int(t[2], lines.where());
    const std::string head = lines.where();
    Relation r(d, n);
    bool closed = false;
    while (lines.next(t)) {
      if (t.size() == 1 && t[0] == "end") {
        closed = true;
        break;
      }
      if (t.size() != 1 || static_cast<int>(t[0].size()) != n)
        throw InputError(lines.where() + ": expected a tuple of " + std::to_string(n) + " digits");
      Tuple tup;
      for (char c : t[0]) {
        const int v = c - '0';
        if (v < 0 || v >= d) throw InputError(lines.where() + ": digit '" + std::string(1, c) + "' outside domain");
        tup.push_back(v);
      }
      r.insert(tup);
    }
    if (!closed) throw InputError(head + ": relation '" + name + "' lacks 'end'");
    try {
      lib.add(name, r);
    } catch (const InputError& e) {
      throw InputError(head + ": " + e.what());
    }
  }
  return lib;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError(path + ": cannot open");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RelationLibrary read_relation_file(const std::string& path) {
  std::istringstream in(slurp(path));
  return parse_relation_file(in, path);
}

void write_relation_block(std::ostream& out, const std::string& name, const Relation& r) {
  out << "relation " << name << ' ' << r.arity() << '\n';
  for (const auto& t : r.tuples()) {
    for (int v : t) out << v;
    out << '\n';
  }
  out << "end\n";
}

std::string format_relation_file(const RelationLibrary& lib) {
  std::ostringstream out;
  out << "domain " << lib.domain() << '\n';
  for (const auto& [name, r] : lib.entries()) write_relation_block(out, name, r);
  return out.str();
}

FunctionFile parse_function_file(std::istream& in, const std::string& source) {
  Lines lines(in, source);
  FunctionFile file;
  std::vector<std::string> t;
  bool have = lines.next(t);
  if (have && t.size() == 2 && t[0] == "domain") {
    file.d = parse_int(t[1], lines.where());
    if (file.d < 2 || file.d > kMaxDomain) throw InputError(lines.where() + ": domain must be in [2,6]");
    have = lines.next(t);
  }
  for (; have; have = lines.next(t)) {
    if (t.size() != 3 || t[0] != "function") throw InputError(lines.where() + ": expected 'function <name> <arity>'");
    const std::string name = t[1];
    const int n = parse_int(t[2], lines.where());
    const std::string head = lines.where();
    const std::uint64_t cells = cell_count(file.d, n);
    std::vector<int> table;
    bool closed = false;
    while (lines.next(t)) {
      if (t.size() == 1 && t[0] == "end") {
        closed = true;
        break;
      }
      if (t.size() != 1 || t[0].size() != 1) throw InputError(lines.where() + ": expected a digit or '-'");
      const char c = t[0][0];
      if (c == '-') {
        table.push_back(PartialFunction::kUndef);
      } else {
        const int v = c - '0';
        if (v < 0 || v >= file.d) throw InputError(lines.where() + ": value outside domain");
        table.push_back(v);
      }
    }
    if (!closed) throw InputError(head + ": function '" + name + "' lacks 'end'");
    if (table.size() != cells)
      throw InputError(head + ": function '" + name + "' needs " + std::to_string(cells) + " entries");
    file.functions.emplace_back(name, PartialFunction(file.d, n, std::move(table)));
  }
  return file;
}

void write_function_block(std::ostream& out, const std::string& name, const PartialFunction& f) {
  out << "function " << name << ' ' << f.arity() << '\n';
  for (int v : f.table()) {
    if (v == PartialFunction::kUndef)
      out << "-\n";
    else
      out << v << '\n';
  }
  out << "end\n";
}

}  // namespace maxclone
