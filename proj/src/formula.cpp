#include "maxclone/formula.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace maxclone {

Formula Formula::atom(std::string rel, std::vector<std::string> vars) {
  Formula f;
  f.kind = Kind::Atom;
  f.rel = std::move(rel);
  f.vars = std::move(vars);
  return f;
}

Formula Formula::conj(std::vector<Formula> kids) {
  Formula f;
  f.kind = Kind::And;
  f.kids = std::move(kids);
  return f;
}

namespace {

Formula quant(Formula::Kind kind, std::vector<std::string> vars, Formula child, int k = 1) {
  Formula f;
  f.kind = kind;
  f.vars = std::move(vars);
  f.k = k;
  f.kids.push_back(std::move(child));
  return f;
}

}  // namespace

Formula Formula::exists(std::vector<std::string> vars, Formula f) { return quant(Kind::Exists, std::move(vars), std::move(f)); }
Formula Formula::exists_k(int k, std::string var, Formula f) {
  return quant(Kind::ExistsK, {std::move(var)}, std::move(f), k);
}
Formula Formula::mex(std::vector<std::string> vars, Formula f) { return quant(Kind::Max, std::move(vars), std::move(f)); }

// ---- parsing -----------------------------------------------------------------

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) toks_.push_back(cur);
      cur.clear();
    };
    for (char c : text) {
      if (c == '(' || c == ')') {
        flush();
        toks_.emplace_back(1, c);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        flush();
      } else {
        cur += c;
      }
    }
    flush();
  }

  Formula parse_all() {
    Formula f = parse();
    if (pos_ != toks_.size()) fail("trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("formula: " + msg + " at token " + std::to_string(pos_ + 1));
  }
  const std::string& peek() const {
    if (pos_ >= toks_.size()) fail("unexpected end");
    return toks_[pos_];
  }
  std::string take() {
    std::string t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& t) {
    if (take() != t) fail("expected '" + t + "'");
  }
  std::string variable() {
    std::string v = take();
    const bool ok = !v.empty() && v[0] >= 'a' && v[0] <= 'z' &&
                    std::all_of(v.begin(), v.end(), [](char c) {
                      return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
                    });
    if (!ok) fail("bad variable name '" + v + "'");
    return v;
  }
  std::vector<std::string> var_list() {
    expect("(");
    std::vector<std::string> vs;
    while (peek() != ")") vs.push_back(variable());
    ++pos_;
    return vs;
  }

  Formula parse() {
    expect("(");
    const std::string head = take();
    Formula f;
    if (head == "atom") {
      const std::string name = take();
      if (name == "(" || name == ")") fail("expected a relation name");
      std::vector<std::string> vs;
      while (peek() != ")") vs.push_back(variable());
      f = Formula::atom(name, vs);
    } else if (head == "and") {
      std::vector<Formula> kids;
      while (peek() != ")") kids.push_back(parse());
      f = Formula::conj(std::move(kids));
    } else if (head == "exists" || head == "mex") {
      auto vs = var_list();
      Formula child = parse();
      f = head == "exists" ? Formula::exists(vs, std::move(child)) : Formula::mex(vs, std::move(child));
    } else if (head == "exists_k") {
      const std::string ks = take();
      int k = 0;
      try {
        std::size_t used = 0;
        k = std::stoi(ks, &used);
        if (used != ks.size()) throw std::invalid_argument(ks);
      } catch (const std::logic_error&) {
        fail("expected an integer threshold");
      }
      auto vs = var_list();
      if (vs.size() != 1) fail("exists_k binds exactly one variable");
      f = Formula::exists_k(k, vs[0], parse());
    } else {
      fail("unknown form '" + head + "'");
    }
    expect(")");
    return f;
  }

  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

void join_vars(std::ostringstream& out, const std::vector<std::string>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) out << (i ? " " : "") << vs[i];
}

void print(std::ostringstream& out, const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::Atom:
      out << "(atom " << f.rel;
      for (const auto& v : f.vars) out << ' ' << v;
      out << ')';
      return;
    case Formula::Kind::And:
      out << "(and";
      for (const auto& k : f.kids) {
        out << ' ';
        print(out, k);
      }
      out << ')';
      return;
    case Formula::Kind::Exists:
      out << "(exists (";
      break;
    case Formula::Kind::ExistsK:
      out << "(exists_k " << f.k << " (";
      break;
    case Formula::Kind::Max:
      out << "(mex (";
      break;
  }
  join_vars(out, f.vars);
  out << ") ";
  print(out, f.kids[0]);
  out << ')';
}

void collect_free(const Formula& f, const std::set<std::string>& bound, std::vector<std::string>& out) {
  auto note = [&](const std::string& v) {
    if (!bound.count(v) && std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  };
  if (f.kind == Formula::Kind::Atom) {
    for (const auto& v : f.vars) note(v);
  } else if (f.kind == Formula::Kind::And) {
    for (const auto& k : f.kids) collect_free(k, bound, out);
  } else {
    auto b = bound;
    b.insert(f.vars.begin(), f.vars.end());
    collect_free(f.kids[0], b, out);
  }
}

void collect_names(const Formula& f, std::set<std::string>& out) {
  out.insert(f.vars.begin(), f.vars.end());
  for (const auto& k : f.kids) collect_names(k, out);
}

}  // namespace

Formula parse_formula(const std::string& text) { return Parser(text).parse_all(); }

std::string to_string(const Formula& f) {
  std::ostringstream out;
  print(out, f);
  return out.str();
}

std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> out;
  collect_free(f, {}, out);
  return out;
}

// ---- evaluation --------------------------------------------------------------

namespace {

struct Val {
  Relation r;
  std::vector<std::string> vars;
};

int index_of(const std::vector<std::string>& vs, const std::string& v) {
  const auto it = std::find(vs.begin(), vs.end(), v);
  return it == vs.end() ? -1 : static_cast<int>(it - vs.begin());
}

Val conjoin_vals(const Val& a, const Val& b) {
  Val out{Relation(a.r.domain(), 0), a.vars};
  for (const auto& v : b.vars)
    if (index_of(out.vars, v) < 0) out.vars.push_back(v);
  std::vector<int> sa, sb;
  for (const auto& v : a.vars) sa.push_back(index_of(out.vars, v));
  for (const auto& v : b.vars) sb.push_back(index_of(out.vars, v));
  out.r = conjoin(a.r, sa, b.r, sb, static_cast<int>(out.vars.size()));
  return out;
}

Val eval(const Formula& f, const RelationLibrary& lib) {
  const int d = lib.domain();
  switch (f.kind) {
    case Formula::Kind::Atom: {
      const Relation base = lib.resolve(f.rel);
      if (base.arity() != static_cast<int>(f.vars.size()))
        throw InputError("atom " + f.rel + " has " + std::to_string(f.vars.size()) + " arguments, arity is " +
                         std::to_string(base.arity()));
      Val out{Relation(d, 0), {}};
      std::vector<int> sigma;
      for (const auto& v : f.vars) {
        int i = index_of(out.vars, v);
        if (i < 0) {
          i = static_cast<int>(out.vars.size());
          out.vars.push_back(v);
        }
        sigma.push_back(i);
      }
      out.r = substitute(base, sigma, static_cast<int>(out.vars.size()));
      return out;
    }
    case Formula::Kind::And: {
      Val acc{Relation::full(d, 0), {}};
      for (const auto& k : f.kids) acc = conjoin_vals(acc, eval(k, lib));
      return acc;
    }
    default:
      break;
  }
  Val child = eval(f.kids[0], lib);
  std::vector<int> pos;
  for (const auto& v : f.vars)
    if (const int i = index_of(child.vars, v); i >= 0 && std::find(pos.begin(), pos.end(), i) == pos.end())
      pos.push_back(i);
  if (pos.empty()) return child;  // binders over absent variables change nothing
  std::sort(pos.begin(), pos.end());
  Val out{Relation(d, 0), {}};
  for (int i = 0; i < static_cast<int>(child.vars.size()); ++i)
    if (!std::binary_search(pos.begin(), pos.end(), i)) out.vars.push_back(child.vars[static_cast<std::size_t>(i)]);
  switch (f.kind) {
    case Formula::Kind::Exists:
      out.r = exists(child.r, pos);
      break;
    case Formula::Kind::ExistsK:
      if (f.k < 1 || f.k > d) throw InputError("exists_k threshold must lie in [1,d]");
      out.r = exists_k(child.r, pos[0], f.k);
      break;
    default:
      out.r = max_quantify(child.r, pos);
      break;
  }
  return out;
}

Relation reorder(const Val& v, const std::vector<std::string>& order) {
  std::set<std::string> seen;
  for (const auto& o : order)
    if (!seen.insert(o).second) throw InputError("variable '" + o + "' repeated in the output order");
  std::vector<int> sigma;
  for (const auto& x : v.vars) {
    const int i = index_of(order, x);
    if (i < 0) throw InputError("free variable '" + x + "' missing from the output order");
    sigma.push_back(i);
  }
  return substitute(v.r, sigma, static_cast<int>(order.size()));
}

}  // namespace

Relation evaluate(const Formula& f, const std::vector<std::string>& order, const RelationLibrary& lib) {
  return reorder(eval(f, lib), order);
}

Relation evaluate(const Formula& f, const RelationLibrary& lib) { return evaluate(f, free_variables(f), lib); }

// ---- renaming ----------------------------------------------------------------

namespace {

// Makes every binder name unique and distinct from every free variable.
class Renamer {
 public:
  explicit Renamer(const Formula& f) {
    const auto fv = free_variables(f);
    used_.insert(fv.begin(), fv.end());
    collect_names(f, all_);
  }

  Formula run(const Formula& f) { return go(f, {}); }
  const std::vector<std::pair<std::string, std::string>>& renamed() const { return renamed_; }

  std::string fresh(const std::string& base) {
    for (int i = 1;; ++i) {
      std::string c = base + "_" + std::to_string(i);
      if (!used_.count(c) && !all_.count(c)) {
        used_.insert(c);
        return c;
      }
    }
  }

 private:
  Formula go(const Formula& f, const std::map<std::string, std::string>& env) {
    auto map = [&](const std::string& v) {
      const auto it = env.find(v);
      return it == env.end() ? v : it->second;
    };
    Formula out = f;
    if (f.kind == Formula::Kind::Atom) {
      for (auto& v : out.vars) v = map(v);
      return out;
    }
    if (f.kind == Formula::Kind::And) {
      for (auto& k : out.kids) k = go(k, env);
      return out;
    }
    auto inner = env;
    for (auto& v : out.vars) {
      std::string nv = v;
      if (used_.count(v)) {
        nv = fresh(v);
        renamed_.emplace_back(v, nv);
      } else {
        used_.insert(v);
      }
      inner[v] = nv;
      v = nv;
    }
    out.kids[0] = go(f.kids[0], inner);
    return out;
  }

  std::set<std::string> used_;
  std::set<std::string> all_;
  std::vector<std::pair<std::string, std::string>> renamed_;
};

bool contains_kind(const Formula& f, Formula::Kind k) {
  if (f.kind == k) return true;
  return std::any_of(f.kids.begin(), f.kids.end(), [k](const Formula& c) { return contains_kind(c, k); });
}

Formula matrix_of(std::vector<Formula> atoms) {
  if (atoms.size() == 1) return std::move(atoms[0]);
  return Formula::conj(std::move(atoms));
}

// Equality check through the evaluator; nullopt when evaluation is too large.
std::optional<bool> same_relation(const Formula& a, const Formula& b, const std::vector<std::string>& order,
                                  const RelationLibrary& lib) {
  try {
    return evaluate(a, order, lib) == evaluate(b, order, lib);
  } catch (const ResourceError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---- counting-quantifier prenex form ----------------------------------------

FlattenCountingResult flatten_counting(const Formula& f, const RelationLibrary& lib) {
  if (contains_kind(f, Formula::Kind::Max)) throw InputError("flatten_counting accepts exists and exists_k only");
  Renamer ren(f);
  const Formula g = ren.run(f);
  std::vector<Formula> prefix;  // quantifier nodes, outermost first, children dropped
  std::vector<Formula> atoms;
  std::function<void(const Formula&)> walk = [&](const Formula& h) {
    if (h.kind == Formula::Kind::Atom) {
      atoms.push_back(h);
    } else if (h.kind == Formula::Kind::And) {
      for (const auto& k : h.kids) walk(k);
    } else {
      Formula q = h;
      q.kids.clear();
      prefix.push_back(std::move(q));
      walk(h.kids[0]);
    }
  };
  walk(g);
  Formula out = matrix_of(std::move(atoms));
  for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) {
    Formula q = *it;
    q.kids.push_back(std::move(out));
    out = std::move(q);
  }
  FlattenCountingResult res{out, ren.renamed(), false};
  const auto ok = same_relation(f, out, free_variables(f), lib);
  if (ok && !*ok) throw VerificationError("flatten_counting changed the relation: " + to_string(out));
  res.verified = ok.has_value();
  return res;
}

// ---- max-quantifier flattening -----------------------------------------------

Formula FlattenMaxResult::formula() const {
  Formula m = matrix_of(atoms);
  if (block.empty()) return m;
  return Formula::mex(block, std::move(m));
}

int minimal_copies(std::uint64_t M, std::uint64_t N, std::uint64_t L) {
  if (N <= 1) return 1;
  mpz_class lhs = M, rhs = L;
  for (int c = 1; c <= 4096; ++c) {
    lhs *= static_cast<unsigned long>(N - 1);
    rhs *= static_cast<unsigned long>(N);
    if (lhs < rhs) return c;
  }
  throw ResourceError("no copy count below 4096 separates the extension counts");
}

std::pair<int, bool> copies_from_bound(std::uint64_t M, std::uint64_t N, std::uint64_t L) {
  if (N <= 1 || L == 0 || L >= M) return {1, false};
  const double raw = std::log(static_cast<double>(L) / static_cast<double>(M)) /
                     std::log(static_cast<double>(N - 1) / static_cast<double>(N));
  int c = std::max(1, static_cast<int>(std::ceil(raw)));
  auto strict = [&](int cc) {
    mpz_class a = M, b = L, p, q;
    mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(N - 1), static_cast<unsigned long>(cc));
    mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(N), static_cast<unsigned long>(cc));
    return a * p < b * q;
  };
  if (strict(c)) return {c, false};
  // the log ratio can round below an exact integer, so floor + 1 may still sit on the threshold
  c = std::max(c, static_cast<int>(std::floor(raw)) + 1);
  while (!strict(c)) ++c;
  return {c, true};
}

namespace {

struct Piece {
  std::vector<std::string> block;
  std::vector<Formula> atoms;

  Formula formula() const {
    Formula m = matrix_of(atoms);
    return block.empty() ? m : Formula::mex(block, std::move(m));
  }
};

class MaxFlattener {
 public:
  MaxFlattener(const RelationLibrary& lib, Renamer& ren) : lib_(lib), ren_(ren) {}

  Piece run(const Formula& f) {
    switch (f.kind) {
      case Formula::Kind::Atom:
        return Piece{{}, {f}};
      case Formula::Kind::And:
        return conjunction(f);
      case Formula::Kind::Max:
        return collapse(f);
      default:
        throw InputError("flatten_max accepts atoms, conjunctions and mex only");
    }
  }

  std::vector<FlattenStats> stats;

 private:
  Piece conjunction(const Formula& f) {
    Piece acc;
    bool first = true;
    for (const auto& k : f.kids) {
      Piece next = run(k);
      if (!first && (!acc.block.empty() || !next.block.empty())) {
        const Formula lf = acc.formula(), rf = next.formula();
        const Relation both = evaluate(Formula::conj({lf, rf}), lib_);
        if (both.empty()) {
          const auto lv = free_variables(lf), rv = free_variables(rf);
          throw EmptyConjunctionError("no tuple attains both maxima in " + to_string(Formula::conj({lf, rf})),
                                      evaluate(lf, lv, lib_), lv, evaluate(rf, rv, lib_), rv);
        }
      }
      acc.block.insert(acc.block.end(), next.block.begin(), next.block.end());
      acc.atoms.insert(acc.atoms.end(), next.atoms.begin(), next.atoms.end());
      first = false;
    }
    return acc;
  }

  Piece collapse(const Formula& f) {
    Piece inner = run(f.kids[0]);
    const auto inner_free = free_variables(inner.formula());
    std::vector<std::string> ys;
    for (const auto& v : f.vars)
      if (std::find(inner_free.begin(), inner_free.end(), v) != inner_free.end()) ys.push_back(v);
    if (ys.empty()) return inner;
    if (inner.block.empty()) return Piece{ys, inner.atoms};

    // R(x) = mex y mex z Phi(x, y, z)
    const auto& zs = inner.block;
    std::vector<std::string> xs;
    for (const auto& v : inner_free)
      if (std::find(ys.begin(), ys.end(), v) == ys.end()) xs.push_back(v);
    std::vector<std::string> order = xs;
    order.insert(order.end(), ys.begin(), ys.end());
    order.insert(order.end(), zs.begin(), zs.end());
    const Relation phi = evaluate(matrix_of(inner.atoms), order, lib_);
    std::vector<int> zpos, ypos;
    for (std::size_t i = 0; i < zs.size(); ++i) zpos.push_back(static_cast<int>(xs.size() + ys.size() + i));
    for (std::size_t i = 0; i < ys.size(); ++i) ypos.push_back(static_cast<int>(xs.size() + i));
    const auto cnt = extension_counts(phi, zpos);  // over (x, y)
    const Relation target = evaluate(Formula::mex(ys, inner.formula()), xs, lib_);

    FlattenStats st;
    for (auto v : cnt) st.N = std::max(st.N, v);
    const std::uint64_t ny = cell_count(lib_.domain(), static_cast<int>(ys.size()));
    for (std::uint64_t a = 0; a < target.cells(); ++a) {
      std::uint64_t b_with = 0;
      for (std::uint64_t b = 0; b < ny; ++b)
        if (cnt[a * ny + b] > 0) ++b_with;
      st.M = std::max(st.M, b_with);
      if (target.test(a)) st.L = std::max(st.L, b_with);
    }
    std::tie(st.c, st.strict_adjusted) = copies_from_bound(st.M, st.N, st.L);

    Piece out{ys, inner.atoms};
    out.block.insert(out.block.end(), zs.begin(), zs.end());
    for (int s = 2; s <= st.c; ++s) {
      std::map<std::string, std::string> copy;
      for (const auto& z : zs) {
        copy[z] = ren_.fresh(z);
        out.block.push_back(copy[z]);
      }
      for (const auto& a : inner.atoms) {
        Formula b = a;
        for (auto& v : b.vars)
          if (copy.count(v)) v = copy[v];
        out.atoms.push_back(std::move(b));
      }
    }
    stats.push_back(st);
    if (const auto ok = same_relation(Formula::mex(ys, inner.formula()), out.formula(), xs, lib_); ok && !*ok)
      throw VerificationError("nested max blocks do not collapse for " + to_string(f) + " (M=" + std::to_string(st.M) +
                              ", N=" + std::to_string(st.N) + ", L=" + std::to_string(st.L) +
                              ", c=" + std::to_string(st.c) + ")");
    return out;
  }

  const RelationLibrary& lib_;
  Renamer& ren_;
};

}  // namespace

FlattenMaxResult flatten_max(const Formula& f, const RelationLibrary& lib) {
  if (contains_kind(f, Formula::Kind::Exists) || contains_kind(f, Formula::Kind::ExistsK))
    throw InputError("flatten_max accepts atoms, conjunctions and mex only");
  Renamer ren(f);
  const Formula g = ren.run(f);
  MaxFlattener fl(lib, ren);
  Piece p = fl.run(g);
  FlattenMaxResult res{p.block, p.atoms, std::move(fl.stats), false};
  const auto ok = same_relation(f, res.formula(), free_variables(f), lib);
  if (ok && !*ok) throw VerificationError("flatten_max changed the relation: " + to_string(res.formula()));
  res.verified = ok.has_value();
  return res;
}

}  // namespace maxclone
