#include "maxclone/fnspace.hpp"

#include <algorithm>
#include <bit>

namespace maxclone {

PartialFunction::PartialFunction(int d, int n)
    : d_(d), n_(n), table_(cell_count(d, n), kUndef) {}

PartialFunction::PartialFunction(int d, int n, std::vector<int> table) : d_(d), n_(n), table_(std::move(table)) {
  if (table_.size() != cell_count(d, n)) throw InputError("function table has wrong length");
  for (int v : table_)
    if (v != kUndef && (v < 0 || v >= d)) throw InputError("function value outside domain");
}

void PartialFunction::define(std::span<const int> args, int value) {
  if (static_cast<int>(args.size()) != n_) throw InputError("argument count mismatch");
  if (value != kUndef && (value < 0 || value >= d_)) throw InputError("function value outside domain");
  table_[encode(args, d_)] = value;
}

bool PartialFunction::is_total() const noexcept {
  return std::none_of(table_.begin(), table_.end(), [](int v) { return v == kUndef; });
}

std::strong_ordering operator<=>(const PartialFunction& a, const PartialFunction& b) {
  if (auto c = a.d_ <=> b.d_; c != 0) return c;
  if (auto c = a.n_ <=> b.n_; c != 0) return c;
  auto key = [](int v, int d) { return v == PartialFunction::kUndef ? d : v; };
  for (std::size_t i = 0; i < a.table_.size(); ++i)
    if (auto c = key(a.table_[i], a.d_) <=> key(b.table_[i], b.d_); c != 0) return c;
  return std::strong_ordering::equal;
}

PartialFunction join_fn() { return PartialFunction(2, 2, {0, 1, 1, 1}); }
PartialFunction meet_fn() { return PartialFunction(2, 2, {0, 0, 0, 1}); }
PartialFunction negation_fn() { return PartialFunction(2, 1, {1, 0}); }
PartialFunction majority_fn() { return PartialFunction(2, 3, {0, 0, 0, 1, 0, 1, 1, 1}); }
PartialFunction minority_fn() { return PartialFunction(2, 3, {0, 1, 1, 0, 1, 0, 0, 1}); }

PartialFunction constant_fn(int d, int n, int c) {
  return PartialFunction(d, n, std::vector<int>(cell_count(d, n), c));
}

PartialFunction projection_fn(int d, int n, int i) {
  if (i < 0 || i >= n) throw InputError("projection index out of range");
  PartialFunction f(d, n);
  for (std::uint64_t idx = 0; idx < cell_count(d, n); ++idx) {
    const auto t = decode(idx, d, n);
    f.define(t, t[static_cast<std::size_t>(i)]);
  }
  return f;
}

bool preserves(const PartialFunction& f, const Relation& r) {
  if (f.domain() != r.domain()) throw InputError("preserves: domain mismatch");
  const auto rows = r.tuples();
  if (rows.empty()) return true;
  const int n = f.arity();
  const int k = r.arity();
  const int d = r.domain();
  std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
  Tuple out(static_cast<std::size_t>(k));
  while (true) {
    bool defined = true;
    for (int i = 0; i < k && defined; ++i) {
      std::uint64_t arg = 0;
      for (int j = 0; j < n; ++j)
        arg = arg * static_cast<std::uint64_t>(d) +
              static_cast<std::uint64_t>(rows[choice[static_cast<std::size_t>(j)]][static_cast<std::size_t>(i)]);
      const int v = f.at(arg);
      if (v == PartialFunction::kUndef)
        defined = false;
      else
        out[static_cast<std::size_t>(i)] = v;
    }
    if (defined && !r.test(encode(out, d))) return false;
    int j = n - 1;
    for (; j >= 0; --j) {
      if (++choice[static_cast<std::size_t>(j)] < rows.size()) break;
      choice[static_cast<std::size_t>(j)] = 0;
    }
    if (j < 0) return true;
  }
}

bool preserves_all(const PartialFunction& f, std::span<const Relation> gamma) {
  return std::all_of(gamma.begin(), gamma.end(), [&](const Relation& r) { return preserves(f, r); });
}

bool k_subset_surjective(const PartialFunction& f, int k) {
  const int d = f.domain();
  const int n = f.arity();
  if (k < 1 || k > d) throw InputError("k must lie in [1,d]");
  std::vector<unsigned> subsets;
  for (unsigned s = 1; s < (1U << d); ++s)
    if (std::popcount(s) == k) subsets.push_back(s);
  std::vector<std::vector<int>> members;
  for (unsigned s : subsets) {
    std::vector<int> m;
    for (int v = 0; v < d; ++v)
      if ((s >> v) & 1U) m.push_back(v);
    members.push_back(std::move(m));
  }
  std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
  while (true) {
    unsigned image = 0;
    // walk the box A_1 x ... x A_n
    std::vector<std::size_t> pos(static_cast<std::size_t>(n), 0);
    while (true) {
      std::uint64_t arg = 0;
      for (int j = 0; j < n; ++j)
        arg = arg * static_cast<std::uint64_t>(d) +
              static_cast<std::uint64_t>(members[choice[static_cast<std::size_t>(j)]][pos[static_cast<std::size_t>(j)]]);
      if (const int v = f.at(arg); v != PartialFunction::kUndef) image |= 1U << v;
      int j = n - 1;
      for (; j >= 0; --j) {
        if (++pos[static_cast<std::size_t>(j)] < static_cast<std::size_t>(k)) break;
        pos[static_cast<std::size_t>(j)] = 0;
      }
      if (j < 0) break;
    }
    if (std::popcount(image) < k) return false;
    int j = n - 1;
    for (; j >= 0; --j) {
      if (++choice[static_cast<std::size_t>(j)] < subsets.size()) break;
      choice[static_cast<std::size_t>(j)] = 0;
    }
    if (j < 0) return true;
  }
}

bool subset_surjective(const PartialFunction& f) {
  for (int k = 1; k <= f.domain(); ++k)
    if (!k_subset_surjective(f, k)) return false;
  return true;
}

PartialFunction example4_function(int k, int m) {
  if (!(1 < m && m <= k)) throw InputError("example4_function needs 1 < m <= k");
  PartialFunction f(k, 2);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) {
      int v;
      if (c >= m)
        v = c;
      else if (r <= m - 2)
        v = c <= m - 2 ? r : (r < m - 2 ? r + 1 : 0);
      else
        v = c <= m - 2 ? c : (r == m - 1 ? 0 : m - 1);
      f.define(std::vector<int>{r, c}, v);
    }
  return f;
}

std::uint64_t function_count(int d, int n, FunctionMode mode) {
  const std::uint64_t cells = cell_count(d, n);
  const std::uint64_t base = static_cast<std::uint64_t>(mode == FunctionMode::Total ? d : d + 1);
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i < cells; ++i) {
    c *= base;
    if (c > kMaxCells)
      throw ResourceError("enumerating functions with d=" + std::to_string(d) + ", n=" + std::to_string(n) +
                          " exceeds 2^24");
  }
  return c;
}

void enumerate_functions(int d, int n, FunctionMode mode,
                         const std::function<bool(const PartialFunction&)>& visit) {
  function_count(d, n, mode);
  const int base = mode == FunctionMode::Total ? d : d + 1;
  const auto cells = static_cast<std::size_t>(cell_count(d, n));
  std::vector<int> digits(cells, 0);
  std::vector<int> table(cells, 0);
  while (true) {
    for (std::size_t i = 0; i < cells; ++i) table[i] = digits[i] == d ? PartialFunction::kUndef : digits[i];
    if (!visit(PartialFunction(d, n, table))) return;
    std::size_t i = cells;
    for (; i-- > 0;) {
      if (++digits[i] < base) break;
      digits[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) return;
  }
}

std::vector<PartialFunction> enumerate_functions(int d, int n, FunctionMode mode) {
  std::vector<PartialFunction> out;
  out.reserve(static_cast<std::size_t>(function_count(d, n, mode)));
  enumerate_functions(d, n, mode, [&](const PartialFunction& f) {
    out.push_back(f);
    return true;
  });
  return out;
}

std::size_t FunctionSet::size() const {
  std::size_t s = 0;
  for (const auto& v : by_arity) s += v.size();
  return s;
}

std::vector<PartialFunction> FunctionSet::all() const {
  std::vector<PartialFunction> out;
  for (const auto& v : by_arity) out.insert(out.end(), v.begin(), v.end());
  return out;
}

namespace {

FunctionSet filtered(std::span<const Relation> gamma, int d, int cap, FunctionMode mode,
                     std::span<const int> k_set) {
  for (const auto& r : gamma)
    if (r.domain() != d) throw InputError("relation domain differs from function domain");
  for (int k : k_set)
    if (k < 1 || k > d) throw InputError("K must be a subset of [1,d]");
  FunctionSet fs;
  fs.d = d;
  fs.max_arity = cap;
  fs.by_arity.resize(static_cast<std::size_t>(cap) + 1);
  for (int n = 1; n <= cap; ++n)
    enumerate_functions(d, n, mode, [&](const PartialFunction& f) {
      for (int k : k_set)
        if (!k_subset_surjective(f, k)) return true;
      if (preserves_all(f, gamma)) fs.by_arity[static_cast<std::size_t>(n)].push_back(f);
      return true;
    });
  return fs;
}

}  // namespace

FunctionSet pol(std::span<const Relation> gamma, int d, int arity_cap) {
  return filtered(gamma, d, arity_cap, FunctionMode::Total, {});
}

FunctionSet ppol(std::span<const Relation> gamma, int d, int arity_cap) {
  return filtered(gamma, d, arity_cap, FunctionMode::Partial, {});
}

FunctionSet mk_ppol(std::span<const Relation> gamma, std::span<const int> k_set, int d, int arity_cap) {
  return filtered(gamma, d, arity_cap, FunctionMode::Partial, k_set);
}

std::vector<Relation> inv(std::span<const PartialFunction> fs, int d, int arity_cap) {
  if (d != 2) throw InputError("inv enumerates Boolean relations only");
  if (arity_cap > 4) throw ResourceError("inv: arity cap above 4");
  for (const auto& f : fs)
    if (f.domain() != d) throw InputError("inv: function domain mismatch");
  std::vector<Relation> out;
  for (int n = 0; n <= arity_cap; ++n) {
    const std::uint64_t cells = cell_count(d, n);
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << cells); ++bits) {
      Relation r(d, n);
      for (std::uint64_t i = 0; i < cells; ++i)
        if ((bits >> i) & 1U) r.set(i);
      if (std::all_of(fs.begin(), fs.end(), [&](const PartialFunction& f) { return preserves(f, r); }))
        out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace maxclone
