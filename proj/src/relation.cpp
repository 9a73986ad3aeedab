#include "maxclone/relation.hpp"

#include <algorithm>
#include <bit>
#include <compare>
#include <functional>

namespace maxclone {

std::uint64_t cell_count(int d, int n) {
  if (d < 2 || d > kMaxDomain) throw InputError("domain size must be in [2,6], got " + std::to_string(d));
  if (n < 0) throw InputError("negative arity");
  std::uint64_t c = 1;
  for (int i = 0; i < n; ++i) {
    c *= static_cast<std::uint64_t>(d);
    if (c > kMaxCells)
      throw ResourceError("relation with d=" + std::to_string(d) + ", n=" + std::to_string(n) +
                          " exceeds 2^24 cells");
  }
  return c;
}

std::uint64_t encode(std::span<const int> t, int d) {
  std::uint64_t idx = 0;
  for (int v : t) idx = idx * static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(v);
  return idx;
}

Tuple decode(std::uint64_t idx, int d, int n) {
  Tuple t(static_cast<std::size_t>(n));
  for (int i = n - 1; i >= 0; --i) {
    t[static_cast<std::size_t>(i)] = static_cast<int>(idx % static_cast<std::uint64_t>(d));
    idx /= static_cast<std::uint64_t>(d);
  }
  return t;
}

namespace {

// Odometer over D^n in index order.
bool next_tuple(Tuple& t, int d) {
  for (std::size_t i = t.size(); i-- > 0;) {
    if (++t[i] < d) return true;
    t[i] = 0;
  }
  return false;
}

template <class F>
void for_each_set(const std::vector<std::uint64_t>& words, F&& f) {
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::uint64_t x = words[w];
    while (x) {
      const int b = std::countr_zero(x);
      f(static_cast<std::uint64_t>(w) * 64 + static_cast<std::uint64_t>(b));
      x &= x - 1;
    }
  }
}

// Visits every cell of D^m in index order together with a linear image
// sum_p digit[p] * w[p].
template <class F>
void for_each_cell_linear(int d, int m, const std::vector<std::uint64_t>& w, F&& f) {
  const std::uint64_t cells = cell_count(d, m);
  std::vector<int> digit(static_cast<std::size_t>(m), 0);
  std::uint64_t lin = 0;
  const auto ud = static_cast<std::uint64_t>(d);
  for (std::uint64_t idx = 0; idx < cells; ++idx) {
    f(idx, lin);
    for (int p = m - 1; p >= 0; --p) {
      const auto up = static_cast<std::size_t>(p);
      lin += w[up];
      if (++digit[up] < d) break;
      lin -= ud * w[up];
      digit[up] = 0;
    }
  }
}

// Weight of each output position in the source index under sigma.
std::vector<std::uint64_t> pullback_weights(std::span<const int> sigma, int d, int m) {
  std::vector<std::uint64_t> w(static_cast<std::size_t>(m), 0);
  std::uint64_t place = 1;
  for (std::size_t i = sigma.size(); i-- > 0;) {
    w[static_cast<std::size_t>(sigma[i])] += place;
    place *= static_cast<std::uint64_t>(d);
  }
  return w;
}

void check_positions(std::span<const int> pos, int n, const char* what) {
  for (int p : pos)
    if (p < 0 || p >= n) throw InputError(std::string(what) + ": position " + std::to_string(p) + " out of range");
}

}  // namespace

Relation::Relation(int d, int n) : d_(d), n_(n), cells_(cell_count(d, n)), words_((cells_ + 63) / 64, 0) {}

Relation Relation::full(int d, int n) {
  Relation r(d, n);
  for (std::uint64_t i = 0; i < r.cells_; ++i) r.set(i);
  return r;
}

bool Relation::contains(std::span<const int> t) const {
  if (static_cast<int>(t.size()) != n_) throw InputError("tuple length does not match arity");
  for (int v : t)
    if (v < 0 || v >= d_) return false;
  return test(encode(t, d_));
}

void Relation::set(std::uint64_t idx, bool v) noexcept {
  const std::uint64_t m = std::uint64_t{1} << (idx & 63);
  if (v)
    words_[idx >> 6] |= m;
  else
    words_[idx >> 6] &= ~m;
}

void Relation::insert(std::span<const int> t) {
  if (static_cast<int>(t.size()) != n_)
    throw InputError("tuple of length " + std::to_string(t.size()) + " for arity " + std::to_string(n_));
  for (int v : t)
    if (v < 0 || v >= d_) throw InputError("tuple entry " + std::to_string(v) + " outside domain");
  set(encode(t, d_));
}

std::uint64_t Relation::size() const noexcept {
  std::uint64_t s = 0;
  for (auto w : words_) s += static_cast<std::uint64_t>(std::popcount(w));
  return s;
}

bool Relation::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

bool Relation::is_full() const noexcept { return size() == cells_; }

std::vector<std::uint64_t> Relation::indices() const {
  std::vector<std::uint64_t> out;
  for_each_set(words_, [&](std::uint64_t i) { out.push_back(i); });
  return out;
}

std::vector<Tuple> Relation::tuples() const {
  std::vector<Tuple> out;
  for_each_set(words_, [&](std::uint64_t i) { out.push_back(decode(i, d_, n_)); });
  return out;
}

void Relation::check_same_shape(const Relation& o) const {
  if (d_ != o.d_ || n_ != o.n_) throw InputError("relation shapes differ");
}

Relation Relation::operator&(const Relation& o) const {
  check_same_shape(o);
  Relation r = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] &= o.words_[i];
  return r;
}

Relation Relation::operator|(const Relation& o) const {
  check_same_shape(o);
  Relation r = *this;
  for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] |= o.words_[i];
  return r;
}

Relation Relation::complement() const {
  Relation r = *this;
  for (auto& w : r.words_) w = ~w;
  if (const auto tail = cells_ & 63; tail != 0) r.words_.back() &= (std::uint64_t{1} << tail) - 1;
  return r;
}

std::strong_ordering operator<=>(const Relation& a, const Relation& b) {
  if (auto c = a.d_ <=> b.d_; c != 0) return c;
  if (auto c = a.n_ <=> b.n_; c != 0) return c;
  for (std::size_t i = a.words_.size(); i-- > 0;)
    if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
  return std::strong_ordering::equal;
}

std::size_t Relation::hash() const noexcept {
  std::size_t h = std::hash<int>{}(d_ * 131 + n_);
  for (auto w : words_) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::string Relation::to_string() const {
  if (n_ == 0) return empty() ? "{}" : "()";
  if (empty()) return "{}";
  std::string s;
  for_each_set(words_, [&](std::uint64_t i) {
    if (!s.empty()) s += ' ';
    for (int v : decode(i, d_, n_)) s += static_cast<char>('0' + v);
  });
  return s;
}

Relation make_relation(int d, int n, const std::vector<Tuple>& tuples) {
  Relation r(d, n);
  for (const auto& t : tuples) r.insert(t);
  return r;
}

Relation make_relation(int d, int n, const std::vector<std::string>& tuples) {
  Relation r(d, n);
  for (const auto& s : tuples) {
    Tuple t;
    for (char c : s) {
      if (c < '0' || c > '9') throw InputError("bad tuple digit in '" + s + "'");
      t.push_back(c - '0');
    }
    r.insert(t);
  }
  return r;
}

// ---- catalog ---------------------------------------------------------------

namespace {

template <class Pred>
Relation boolean_by(int n, Pred&& p) {
  Relation r(2, n);
  Tuple t(static_cast<std::size_t>(n), 0);
  std::uint64_t i = 0;
  do {
    if (p(t)) r.set(i);
    ++i;
  } while (next_tuple(t, 2));
  return r;
}

int count_ones(const Tuple& t, std::size_t from, std::size_t to) {
  return static_cast<int>(std::count(t.begin() + static_cast<std::ptrdiff_t>(from),
                                     t.begin() + static_cast<std::ptrdiff_t>(to), 1));
}

}  // namespace

Relation eq_rel(int d) {
  Relation r(d, 2);
  for (int a = 0; a < d; ++a) r.insert(Tuple{a, a});
  return r;
}

Relation delta(int c) {
  if (c != 0 && c != 1) throw InputError("delta constant must be 0 or 1");
  return make_relation(2, 1, std::vector<Tuple>{{c}});
}

Relation neq() { return make_relation(2, 2, std::vector<std::string>{"01", "10"}); }

Relation imp(int k) {
  if (k < 1) throw InputError("IMP^k needs k >= 1");
  const auto n = static_cast<std::size_t>(k);
  return boolean_by(k + 1, [n](const Tuple& t) { return count_ones(t, 0, n) < static_cast<int>(n) || t[n] == 1; });
}

Relation nimp(int k) {
  if (k < 1) throw InputError("NIMP^k needs k >= 1");
  const auto n = static_cast<std::size_t>(k);
  return boolean_by(k + 1, [n](const Tuple& t) { return count_ones(t, 0, n) > 0 || t[n] == 0; });
}

Relation or_rel(int k) {
  if (k < 1) throw InputError("OR^k needs k >= 1");
  return boolean_by(k, [](const Tuple& t) { return count_ones(t, 0, t.size()) > 0; });
}

Relation nand_rel(int k) {
  if (k < 1) throw InputError("NAND^k needs k >= 1");
  return boolean_by(k, [k](const Tuple& t) { return count_ones(t, 0, t.size()) < k; });
}

Relation compl_rel(int k, int l) {
  if (k < 0 || l < 0 || k + l < 1) throw InputError("Compl_{k,l} needs k,l >= 0 and k+l >= 1");
  const auto ku = static_cast<std::size_t>(k);
  return boolean_by(k + l, [ku, k, l](const Tuple& t) {
    const int head = count_ones(t, 0, ku);
    const int tail = count_ones(t, ku, t.size());
    const bool low_high = head == 0 && tail == l;
    const bool high_low = head == k && tail == 0;
    return !low_high && !high_low;
  });
}

Relation affine_rel(int k, int c) {
  if (k < 1 || (c != 0 && c != 1)) throw InputError("affine needs k >= 1 and c in {0,1}");
  return boolean_by(k, [c](const Tuple& t) { return count_ones(t, 0, t.size()) % 2 == c; });
}

int relm_class(int m, int element) {
  int start = 0;
  for (int i = 1; i <= m; ++i) {
    if (element < start + i) return i;
    start += i;
  }
  throw InputError("element outside rel_m domain");
}

Relation relm(int m) {
  if (m < 1) throw InputError("rel_m needs m >= 1");
  const int d = m * (m + 1) / 2;
  if (d < 2 || d > kMaxDomain) throw InputError("rel_m domain size m(m+1)/2 must be in [2,6]");
  Relation r(d, 2);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (relm_class(m, a) == relm_class(m, b)) r.insert(Tuple{a, b});
  return r;
}

Relation catalog(const std::string& name, std::span<const int> p, int d) {
  auto need = [&](std::size_t k) {
    if (p.size() != k)
      throw InputError("catalog '" + name + "' expects " + std::to_string(k) + " parameter(s)");
  };
  auto opt = [&](int dflt) {
    if (p.size() > 1) throw InputError("catalog '" + name + "' takes at most one parameter");
    return p.empty() ? dflt : p[0];
  };
  if (name == "eq" || name == "=") return eq_rel(d);
  if (name == "EQ") return eq_rel(d);
  if (name == "delta0") return delta(0);
  if (name == "delta1") return delta(1);
  if (name == "neq" || name == "NEQ") return neq();
  if (name == "imp" || name == "IMP") return imp(opt(1));
  if (name == "nimp" || name == "NIMP") return nimp(opt(1));
  if (name == "or" || name == "OR") return or_rel(opt(2));
  if (name == "nand" || name == "NAND") return nand_rel(opt(2));
  if (name == "compl" || name == "Compl") {
    need(2);
    return compl_rel(p[0], p[1]);
  }
  if (name == "affine") {
    need(2);
    return affine_rel(p[0], p[1]);
  }
  if (name == "relm" || name == "rel") {
    need(1);
    return relm(p[0]);
  }
  if (name == "full") {
    need(1);
    return Relation::full(d, p[0]);
  }
  if (name == "empty") {
    need(1);
    return Relation(d, p[0]);
  }
  throw InputError("unknown catalog relation '" + name + "'");
}

// ---- variable manipulation --------------------------------------------------

Relation substitute(const Relation& r, std::span<const int> sigma, int m) {
  if (static_cast<int>(sigma.size()) != r.arity())
    throw InputError("substitution length " + std::to_string(sigma.size()) + " != arity " +
                     std::to_string(r.arity()));
  check_positions(sigma, m, "substitute");
  const int d = r.domain();
  Relation out(d, m);
  for_each_cell_linear(d, m, pullback_weights(sigma, d, m), [&](std::uint64_t idx, std::uint64_t src) {
    if (r.test(src)) out.set(idx);
  });
  return out;
}

Relation conjoin(const Relation& r1, std::span<const int> scope1, const Relation& r2,
                 std::span<const int> scope2, int out_arity) {
  if (r1.domain() != r2.domain()) throw InputError("conjoin: domain mismatch");
  if (static_cast<int>(scope1.size()) != r1.arity() || static_cast<int>(scope2.size()) != r2.arity())
    throw InputError("conjoin: scope length does not match arity");
  check_positions(scope1, out_arity, "conjoin");
  check_positions(scope2, out_arity, "conjoin");
  const int d = r1.domain();
  const auto w1 = pullback_weights(scope1, d, out_arity);
  const auto w2 = pullback_weights(scope2, d, out_arity);
  std::vector<std::uint64_t> w(w1.size());
  // Pack both source indices into one linear form: hi * cells(r1) + lo.
  const std::uint64_t c1 = r1.cells();
  for (std::size_t p = 0; p < w.size(); ++p) w[p] = w1[p] + w2[p] * c1;
  Relation out(d, out_arity);
  for_each_cell_linear(d, out_arity, w, [&](std::uint64_t idx, std::uint64_t packed) {
    if (r1.test(packed % c1) && r2.test(packed / c1)) out.set(idx);
  });
  return out;
}

std::vector<std::uint64_t> extension_counts(const Relation& r, std::span<const int> j) {
  const int n = r.arity();
  const int d = r.domain();
  check_positions(j, n, "extension_counts");
  std::vector<bool> inner(static_cast<std::size_t>(n), false);
  for (int p : j) inner[static_cast<std::size_t>(p)] = true;
  int outer = 0;
  for (int i = 0; i < n; ++i) outer += inner[static_cast<std::size_t>(i)] ? 0 : 1;
  std::vector<std::uint64_t> w(static_cast<std::size_t>(n), 0);
  std::uint64_t place = 1;
  for (int i = n - 1; i >= 0; --i)
    if (!inner[static_cast<std::size_t>(i)]) {
      w[static_cast<std::size_t>(i)] = place;
      place *= static_cast<std::uint64_t>(d);
    }
  std::vector<std::uint64_t> counts(cell_count(d, outer), 0);
  for_each_cell_linear(d, n, w, [&](std::uint64_t idx, std::uint64_t o) {
    if (r.test(idx)) ++counts[o];
  });
  return counts;
}

namespace {

int outer_arity(const Relation& r, std::span<const int> j) {
  std::vector<int> s(j.begin(), j.end());
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end()) throw InputError("repeated quantified position");
  return r.arity() - static_cast<int>(s.size());
}

template <class Keep>
Relation select_counts(const Relation& r, std::span<const int> j, Keep&& keep) {
  const int m = outer_arity(r, j);
  const auto counts = extension_counts(r, j);
  Relation out(r.domain(), m);
  for (std::uint64_t i = 0; i < counts.size(); ++i)
    if (keep(counts[i])) out.set(i);
  return out;
}

}  // namespace

Relation exists(const Relation& r, std::span<const int> positions) {
  return select_counts(r, positions, [](std::uint64_t c) { return c > 0; });
}

Relation exists(const Relation& r, int position) { return exists(r, std::span<const int>(&position, 1)); }

Relation forall(const Relation& r, int position) { return exists_k(r, position, r.domain()); }

Relation exists_k(const Relation& r, int position, int k) {
  if (k < 1) throw InputError("exists_k needs k >= 1");
  const auto kk = static_cast<std::uint64_t>(k);
  return select_counts(r, std::span<const int>(&position, 1), [kk](std::uint64_t c) { return c >= kk; });
}

Relation max_quantify(const Relation& r, std::span<const int> j) {
  if (j.empty()) throw InputError("max_quantify needs a nonempty position set");
  const int m = outer_arity(r, j);
  const auto counts = extension_counts(r, j);
  const std::uint64_t top = *std::max_element(counts.begin(), counts.end());
  Relation out(r.domain(), m);
  for (std::uint64_t i = 0; i < counts.size(); ++i)
    if (counts[i] == top) out.set(i);
  return out;
}

// ---- structural predicates ---------------------------------------------------

namespace {

void require_boolean(const Relation& r, const char* what) {
  if (r.domain() != 2) throw InputError(std::string(what) + " is defined for Boolean relations only");
}

// Boolean tuple as a bitmask, bit (n-1-i) = position i; this is just the index.
bool closed_under(const Relation& r, std::uint64_t (*op)(std::uint64_t, std::uint64_t)) {
  const auto idx = r.indices();
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (!r.test(op(idx[a], idx[b]))) return false;
  return true;
}

std::optional<TrivialWitness> trivial_witness(const Relation& r) {
  const int n = r.arity();
  if (r.empty()) {
    TrivialWitness w;
    for (int i = 0; i < n; ++i) {
      w.zero.push_back(i);
      w.one.push_back(i);
    }
    return w;
  }
  const auto ts = r.tuples();
  TrivialWitness w;
  std::vector<int> free;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const bool all0 = std::all_of(ts.begin(), ts.end(), [ui](const Tuple& t) { return t[ui] == 0; });
    const bool all1 = std::all_of(ts.begin(), ts.end(), [ui](const Tuple& t) { return t[ui] == 1; });
    if (all0)
      w.zero.push_back(i);
    else if (all1)
      w.one.push_back(i);
    else
      free.push_back(i);
  }
  std::vector<int> rep(static_cast<std::size_t>(n), -1);
  for (std::size_t a = 0; a < free.size(); ++a) {
    const int i = free[a];
    if (rep[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<int> cls{i};
    rep[static_cast<std::size_t>(i)] = i;
    for (std::size_t b = a + 1; b < free.size(); ++b) {
      const int j = free[b];
      if (rep[static_cast<std::size_t>(j)] >= 0) continue;
      const bool same = std::all_of(ts.begin(), ts.end(), [i, j](const Tuple& t) {
        return t[static_cast<std::size_t>(i)] == t[static_cast<std::size_t>(j)];
      });
      if (same) {
        cls.push_back(j);
        rep[static_cast<std::size_t>(j)] = i;
      }
    }
    if (cls.size() > 1) w.eq.push_back(std::move(cls));
  }
  // R is trivial iff it contains every tuple consistent with (Z, W, ~).
  std::uint64_t classes = 0;
  for (int i : free)
    if (rep[static_cast<std::size_t>(i)] == i) ++classes;
  if (r.size() != (std::uint64_t{1} << classes)) return std::nullopt;
  return w;
}

}  // namespace

StructuralPredicates structural_predicates(const Relation& r) {
  require_boolean(r, "structural_predicates");
  StructuralPredicates s;
  const auto idx = r.indices();
  const std::uint64_t ones = r.cells() - 1;

  s.is_affine = true;
  if (!idx.empty()) {
    const auto a0 = idx.front();
    for (std::size_t a = 0; a < idx.size() && s.is_affine; ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b)
        if (!r.test(idx[a] ^ idx[b] ^ a0)) {
          s.is_affine = false;
          break;
        }
  }
  s.is_self_complement = std::all_of(idx.begin(), idx.end(), [&](auto i) { return r.test(i ^ ones); });
  s.is_or_closed = closed_under(r, [](std::uint64_t a, std::uint64_t b) { return a | b; });
  s.is_and_closed = closed_under(r, [](std::uint64_t a, std::uint64_t b) { return a & b; });
  s.is_log_supermodular = s.is_or_closed && s.is_and_closed;
  s.trivial_witness = trivial_witness(r);
  s.is_trivial = s.trivial_witness.has_value();
  return s;
}

FilterAnalysis filter_property(const Relation& r) {
  require_boolean(r, "filter_property");
  const int n = r.arity();
  const auto ts = r.tuples();
  FilterAnalysis fa;

  std::vector<bool> in_support(static_cast<std::size_t>(n), false);
  for (const auto& t : ts)
    for (int i = 0; i < n; ++i)
      if (t[static_cast<std::size_t>(i)] == 1) in_support[static_cast<std::size_t>(i)] = true;
  for (int i = 0; i < n; ++i)
    if (in_support[static_cast<std::size_t>(i)]) fa.support.push_back(i);

  std::vector<int> cls_of(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (cls_of[static_cast<std::size_t>(i)] >= 0) continue;
    const int c = static_cast<int>(fa.eq_classes.size());
    fa.eq_classes.push_back({i});
    cls_of[static_cast<std::size_t>(i)] = c;
    for (int j = i + 1; j < n; ++j) {
      if (cls_of[static_cast<std::size_t>(j)] >= 0) continue;
      const bool same = std::all_of(ts.begin(), ts.end(), [i, j](const Tuple& t) {
        return t[static_cast<std::size_t>(i)] == t[static_cast<std::size_t>(j)];
      });
      if (same) {
        fa.eq_classes[static_cast<std::size_t>(c)].push_back(j);
        cls_of[static_cast<std::size_t>(j)] = c;
      }
    }
  }

  // Classes inside O_R; conforming tuples are the 2^k assignments to them.
  std::vector<std::size_t> inner;
  for (std::size_t c = 0; c < fa.eq_classes.size(); ++c)
    if (in_support[static_cast<std::size_t>(fa.eq_classes[c].front())]) inner.push_back(c);
  const std::size_t k = inner.size();
  if (k > 24) throw ResourceError("filter_property: too many classes");
  fa.conforming_count = std::uint64_t{1} << k;

  auto expand = [&](std::uint64_t mask) {
    Tuple t(static_cast<std::size_t>(n), 0);
    for (std::size_t b = 0; b < k; ++b)
      if ((mask >> b) & 1U)
        for (int p : fa.eq_classes[inner[b]]) t[static_cast<std::size_t>(p)] = 1;
    return t;
  };
  std::vector<bool> member(static_cast<std::size_t>(fa.conforming_count));
  for (std::uint64_t mask = 0; mask < fa.conforming_count; ++mask)
    member[mask] = r.contains(expand(mask));

  // Upward closure: a member's one-bit extensions must be members.
  fa.is_filter = true;
  for (std::uint64_t mask = 0; mask < fa.conforming_count && fa.is_filter; ++mask) {
    if (!member[mask]) continue;
    for (std::size_t b = 0; b < k; ++b)
      if (!member[mask | (std::uint64_t{1} << b)]) {
        fa.is_filter = false;
        break;
      }
  }

  for (std::uint64_t mask = 0; mask < fa.conforming_count; ++mask) {
    if (member[mask]) continue;
    bool maximal = true;
    for (std::size_t b = 0; b < k; ++b) {
      const auto up = mask | (std::uint64_t{1} << b);
      if (up != mask && !member[up]) {
        maximal = false;
        break;
      }
    }
    if (!maximal) continue;
    fa.max_excluded.push_back(expand(mask));
    const int zeros = static_cast<int>(k) - std::popcount(mask);
    fa.r = std::max(fa.r, zeros);
  }
  return fa;
}

}  // namespace maxclone
