#include "maxclone/counting.hpp"

#include <algorithm>
#include <sstream>

#include "maxclone/errors.hpp"

namespace maxclone {

int CspInstance::var_index(const std::string& v) const {
  const auto it = std::find(vars.begin(), vars.end(), v);
  if (it == vars.end()) throw InputError("unknown variable '" + v + "'");
  return static_cast<int>(it - vars.begin());
}

int CspInstance::add_var(const std::string& v) {
  if (std::find(vars.begin(), vars.end(), v) != vars.end()) throw InputError("variable '" + v + "' declared twice");
  vars.push_back(v);
  return static_cast<int>(vars.size()) - 1;
}

void CspInstance::add(const std::string& name, const Relation& r, const std::vector<std::string>& scope) {
  Constraint c{{}, name, r};
  for (const auto& v : scope) c.scope.push_back(var_index(v));
  constraints.push_back(std::move(c));
  const auto& last = constraints.back();
  if (static_cast<int>(last.scope.size()) != r.arity()) {
    constraints.pop_back();
    throw InputError("constraint '" + name + "' has " + std::to_string(scope.size()) + " variables, arity is " +
                     std::to_string(r.arity()));
  }
}

void CspInstance::validate() const {
  if (d < 2 || d > kMaxDomain) throw InputError("domain must be in [2,6]");
  const int n = static_cast<int>(vars.size());
  for (const auto& c : constraints) {
    if (c.rel.domain() != d) throw InputError("constraint '" + c.name + "' is over another domain");
    if (static_cast<int>(c.scope.size()) != c.rel.arity())
      throw InputError("constraint '" + c.name + "': scope length differs from arity");
    for (int v : c.scope)
      if (v < 0 || v >= n) throw InputError("constraint '" + c.name + "': variable index out of range");
  }
}

namespace {

// Backtracking over one connected component at a time: after each
// assignment the unassigned variables split along the constraints that still
// mention two of them, and component counts multiply.
class Counter {
 public:
  Counter(const CspInstance& p, std::uint64_t limit) : p_(p), limit_(limit) {
    p.validate();
    const std::size_t n = p.vars.size();
    incident_.resize(n);
    for (std::size_t c = 0; c < p.constraints.size(); ++c) {
      std::vector<int> seen;
      for (int v : p.constraints[c].scope)
        if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
          seen.push_back(v);
          incident_[static_cast<std::size_t>(v)].push_back(static_cast<int>(c));
        }
    }
    val_.assign(n, -1);
  }

  mpz_class run(std::span<const int> prefix) {
    const int n = static_cast<int>(p_.vars.size());
    const int fixed = static_cast<int>(prefix.size());
    if (fixed > n) throw InputError("prefix longer than the variable list");
    for (int i = 0; i < fixed; ++i) {
      const int a = prefix[static_cast<std::size_t>(i)];
      if (a < 0 || a >= p_.d) throw InputError("prefix value outside domain");
      val_[static_cast<std::size_t>(i)] = a;
    }
    for (const auto& c : p_.constraints)
      if (assigned(c) && !holds(c)) return 0;
    std::vector<int> rest;
    for (int v = fixed; v < n; ++v) rest.push_back(v);
    return count_split(rest);
  }

 private:
  bool assigned(const Constraint& c) const {
    return std::all_of(c.scope.begin(), c.scope.end(), [&](int v) { return val_[static_cast<std::size_t>(v)] >= 0; });
  }

  bool holds(const Constraint& c) const {
    std::uint64_t idx = 0;
    for (int v : c.scope) idx = idx * static_cast<std::uint64_t>(p_.d) + static_cast<std::uint64_t>(val_[static_cast<std::size_t>(v)]);
    return c.rel.test(idx);
  }

  // Product over the connected components of `vars` (all unassigned).
  mpz_class count_split(const std::vector<int>& vars) {
    mpz_class total = 1;
    std::vector<char> done(p_.vars.size(), 0);
    for (int start : vars) {
      if (done[static_cast<std::size_t>(start)]) continue;
      std::vector<int> comp{start};
      done[static_cast<std::size_t>(start)] = 1;
      for (std::size_t i = 0; i < comp.size(); ++i)
        for (int c : incident_[static_cast<std::size_t>(comp[i])])
          for (int w : p_.constraints[static_cast<std::size_t>(c)].scope)
            if (val_[static_cast<std::size_t>(w)] < 0 && !done[static_cast<std::size_t>(w)]) {
              done[static_cast<std::size_t>(w)] = 1;
              comp.push_back(w);
            }
      std::sort(comp.begin(), comp.end());
      total *= count_component(comp);
      if (total == 0) return 0;
    }
    return total;
  }

  mpz_class count_component(const std::vector<int>& comp) {
    if (comp.size() == 1 && incident_[static_cast<std::size_t>(comp[0])].empty()) return p_.d;
    // most constrained variable first, ties by declaration order
    int v = comp[0];
    for (int w : comp)
      if (incident_[static_cast<std::size_t>(w)].size() > incident_[static_cast<std::size_t>(v)].size()) v = w;
    std::vector<int> rest;
    for (int w : comp)
      if (w != v) rest.push_back(w);
    mpz_class total = 0;
    for (int a = 0; a < p_.d; ++a) {
      if (++nodes_ > limit_) throw ResourceError("counting exceeded the search-node limit");
      val_[static_cast<std::size_t>(v)] = a;
      bool ok = true;
      for (int c : incident_[static_cast<std::size_t>(v)]) {
        const auto& con = p_.constraints[static_cast<std::size_t>(c)];
        if (assigned(con) && !holds(con)) {
          ok = false;
          break;
        }
      }
      if (ok) total += count_split(rest);
    }
    val_[static_cast<std::size_t>(v)] = -1;
    return total;
  }

  const CspInstance& p_;
  std::uint64_t limit_;
  std::vector<std::vector<int>> incident_;
  std::vector<int> val_;
  std::uint64_t nodes_ = 0;
};

}  // namespace

mpz_class count(const CspInstance& p, std::uint64_t node_limit) { return Counter(p, node_limit).run({}); }

mpz_class count_extensions(const CspInstance& p, std::span<const int> prefix, std::uint64_t node_limit) {
  return Counter(p, node_limit).run(prefix);
}

mpz_class count_naive(const CspInstance& p) {
  p.validate();
  const int n = static_cast<int>(p.vars.size());
  const std::uint64_t total = cell_count(p.d, n);
  mpz_class out = 0;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    const auto a = decode(idx, p.d, n);
    const bool sat = std::all_of(p.constraints.begin(), p.constraints.end(), [&](const Constraint& c) {
      Tuple t;
      for (int v : c.scope) t.push_back(a[static_cast<std::size_t>(v)]);
      return c.rel.contains(t);
    });
    if (sat) ++out;
  }
  return out;
}

CspInstance parse_instance(std::istream& in, const RelationLibrary& lib, const std::string& source) {
  CspInstance p;
  p.d = lib.domain();
  bool have_domain = false, closed = false;
  int line_no = 0;
  auto where = [&] { return source + ":" + std::to_string(line_no); };
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    std::istringstream ss(line);
    std::vector<std::string> t;
    for (std::string w; ss >> w;) t.push_back(w);
    if (t.empty() || t[0][0] == '#') continue;
    if (closed) throw InputError(where() + ": content after 'end'");
    try {
      if (t[0] == "domain") {
        if (t.size() != 2) throw InputError("expected 'domain <d>'");
        const int d = std::stoi(t[1]);
        if (d != lib.domain())
          throw InputError("instance domain " + t[1] + " differs from relation domain " + std::to_string(lib.domain()));
        have_domain = true;
      } else if (t[0] == "var") {
        for (std::size_t i = 1; i < t.size(); ++i) p.add_var(t[i]);
      } else if (t[0] == "con") {
        if (t.size() < 2) throw InputError("expected 'con <relation> <vars...>'");
        p.add(t[1], lib.resolve(t[1]), std::vector<std::string>(t.begin() + 2, t.end()));
      } else if (t[0] == "end") {
        closed = true;
      } else {
        throw InputError("unknown directive '" + t[0] + "'");
      }
    } catch (const InputError& e) {
      throw InputError(where() + ": " + e.what());
    } catch (const std::logic_error&) {
      throw InputError(where() + ": malformed number");
    }
  }
  if (!have_domain) throw InputError(source + ": missing 'domain' line");
  if (!closed) throw InputError(source + ": missing 'end'");
  return p;
}

CspInstance read_instance(const std::string& path, const RelationLibrary& lib) {
  std::istringstream in(slurp(path));
  return parse_instance(in, lib, path);
}

std::string format_instance(const CspInstance& p) {
  std::ostringstream out;
  out << "domain " << p.d << "\nvar";
  for (const auto& v : p.vars) out << ' ' << v;
  out << '\n';
  for (const auto& c : p.constraints) {
    out << "con " << c.name;
    for (int v : c.scope) out << ' ' << p.vars[static_cast<std::size_t>(v)];
    out << '\n';
  }
  out << "end\n";
  return out.str();
}

}  // namespace maxclone
