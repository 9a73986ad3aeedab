#include <algorithm>
#include <set>

#include "maxclone/closure.hpp"

namespace maxclone {

namespace {

int relm_domain(int m) {
  const int d = m * (m + 1) / 2;
  if (m < 1 || d < 2 || d > kMaxDomain) throw InputError("rel_m needs m(m+1)/2 in [2,6]");
  return d;
}

std::vector<int> allowed_thresholds(int m, RelmVariant v, int k) {
  switch (v) {
    case RelmVariant::Plain:
      return {1};
    case RelmVariant::KExists:
      if (k < 1 || k > m) throw InputError("rel_m threshold k must lie in [1,m]");
      return k == 1 ? std::vector<int>{1} : std::vector<int>{1, k};
    case RelmVariant::Counting: {
      std::vector<int> all;
      for (int i = 1; i <= m; ++i) all.push_back(i);
      return all;
    }
    case RelmVariant::Max:
      return m == 1 ? std::vector<int>{1} : std::vector<int>{1, m};
  }
  return {};
}

// Tuples whose related-blocks are class-homogeneous with class >= threshold
// and whose equality blocks are constant.
Relation describe(int m, int d, const std::vector<int>& block, const std::vector<int>& eq,
                  const std::vector<int>& phi) {
  const int n = static_cast<int>(block.size());
  Relation r(d, n);
  for (std::uint64_t idx = 0; idx < r.cells(); ++idx) {
    const auto t = decode(idx, d, n);
    std::vector<int> cls(phi.size(), 0);
    std::vector<int> val(static_cast<std::size_t>(n), -1);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const int b = block[static_cast<std::size_t>(i)];
      const int c = relm_class(m, t[static_cast<std::size_t>(i)]);
      if (c < phi[static_cast<std::size_t>(b)]) ok = false;
      if (cls[static_cast<std::size_t>(b)] == 0)
        cls[static_cast<std::size_t>(b)] = c;
      else if (cls[static_cast<std::size_t>(b)] != c)
        ok = false;
      auto& v = val[static_cast<std::size_t>(eq[static_cast<std::size_t>(i)])];
      if (v < 0)
        v = t[static_cast<std::size_t>(i)];
      else if (v != t[static_cast<std::size_t>(i)])
        ok = false;
    }
    if (ok) r.set(idx);
  }
  return r;
}

// Coarsest partition of positions under a pairwise predicate holding in every tuple.
template <class Same>
std::vector<int> coarsest(int n, const std::vector<Tuple>& rows, Same same) {
  std::vector<int> block(static_cast<std::size_t>(n), -1);
  int t = 0;
  for (int i = 0; i < n; ++i) {
    if (block[static_cast<std::size_t>(i)] >= 0) continue;
    block[static_cast<std::size_t>(i)] = t;
    for (int j = i + 1; j < n; ++j)
      if (block[static_cast<std::size_t>(j)] < 0 && std::all_of(rows.begin(), rows.end(), [&](const Tuple& a) {
            return same(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
          }))
        block[static_cast<std::size_t>(j)] = t;
    ++t;
  }
  return block;
}

bool empty_allowed(RelmVariant v, int k) {
  return (v == RelmVariant::KExists && k >= 2) || v == RelmVariant::Counting;
}

// Restricted growth strings: every set partition of [n].
std::vector<std::vector<int>> partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> block(static_cast<std::size_t>(n), 0);
  while (true) {
    out.push_back(block);
    int i = n - 1;
    for (; i > 0; --i) {
      const int mx = *std::max_element(block.begin(), block.begin() + i);
      if (block[static_cast<std::size_t>(i)] <= mx) {
        ++block[static_cast<std::size_t>(i)];
        std::fill(block.begin() + i + 1, block.end(), 0);
        break;
      }
    }
    if (i <= 0) break;
  }
  return out;
}

}  // namespace

bool relm_oracle(int m, const Relation& r, RelmVariant v, int k, bool literal) {
  const int d = relm_domain(m);
  if (r.domain() != d) throw InputError("relation is not over the rel_m domain");
  const auto allowed = allowed_thresholds(m, v, k);
  if (r.empty()) return !literal && empty_allowed(v, k);
  const int n = r.arity();
  const auto rows = r.tuples();
  const auto block = coarsest(n, rows, [m](int a, int b) { return relm_class(m, a) == relm_class(m, b); });
  std::vector<int> eq(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) eq[static_cast<std::size_t>(i)] = i;
  if (!literal) eq = coarsest(n, rows, [](int a, int b) { return a == b; });
  const int t = 1 + (n ? *std::max_element(block.begin(), block.end()) : -1);
  std::vector<int> phi(static_cast<std::size_t>(t), m);
  for (const auto& a : rows)
    for (int i = 0; i < n; ++i) {
      auto& p = phi[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])];
      p = std::min(p, relm_class(m, a[static_cast<std::size_t>(i)]));
    }
  // The observed minimum class is the only threshold that can reproduce r.
  for (int p : phi)
    if (std::find(allowed.begin(), allowed.end(), p) == allowed.end()) return false;
  return describe(m, d, block, eq, phi) == r;
}

std::vector<Relation> relm_described(int m, int max_arity, RelmVariant v, int k, bool literal) {
  const int d = relm_domain(m);
  const auto allowed = allowed_thresholds(m, v, k);
  std::set<Relation> out;
  for (int n = 1; n <= max_arity; ++n) {
    if (!literal && empty_allowed(v, k)) out.insert(Relation(d, n));
    const auto parts = partitions(n);
    for (const auto& block : parts) {
      const int t = 1 + *std::max_element(block.begin(), block.end());
      for (const auto& eq : parts) {
        bool refines = true;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (eq[static_cast<std::size_t>(i)] == eq[static_cast<std::size_t>(j)] &&
                block[static_cast<std::size_t>(i)] != block[static_cast<std::size_t>(j)])
              refines = false;
        bool discrete = true;
        for (int i = 0; i < n; ++i) discrete = discrete && eq[static_cast<std::size_t>(i)] == i;
        if (!refines || (literal && !discrete)) continue;
        std::vector<int> choice(static_cast<std::size_t>(t), 0);
        while (true) {
          std::vector<int> phi;
          for (int c : choice) phi.push_back(allowed[static_cast<std::size_t>(c)]);
          out.insert(describe(m, d, block, eq, phi));
          int b = t - 1;
          for (; b >= 0; --b) {
            if (++choice[static_cast<std::size_t>(b)] < static_cast<int>(allowed.size())) break;
            choice[static_cast<std::size_t>(b)] = 0;
          }
          if (b < 0) break;
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace maxclone
