#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "maxclone/closure.hpp"

namespace maxclone {

// ---- cores -------------------------------------------------------------------

namespace {

Relation permute(const std::vector<Tuple>& rows, int d, int c, const std::vector<int>& pos) {
  Relation out(d, c);
  Tuple u(static_cast<std::size_t>(c));
  for (const auto& t : rows) {
    for (int q = 0; q < c; ++q) u[static_cast<std::size_t>(pos[static_cast<std::size_t>(q)])] = t[static_cast<std::size_t>(q)];
    out.set(encode(u, d));
  }
  return out;
}

// Minimal image of t over coordinate permutations that respect per-coordinate
// value counts. pos maps coordinates of t to positions of the result.
std::pair<Relation, std::vector<int>> canonical_perm(const Relation& t) {
  const int c = t.arity();
  const int d = t.domain();
  std::vector<int> ident(static_cast<std::size_t>(c));
  for (int i = 0; i < c; ++i) ident[static_cast<std::size_t>(i)] = i;
  if (c <= 1) return {t, ident};
  const auto rows = t.tuples();
  std::vector<std::vector<std::uint64_t>> sig(static_cast<std::size_t>(c), std::vector<std::uint64_t>(static_cast<std::size_t>(d), 0));
  for (const auto& r : rows)
    for (int q = 0; q < c; ++q) ++sig[static_cast<std::size_t>(q)][static_cast<std::size_t>(r[static_cast<std::size_t>(q)])];
  std::vector<int> order = ident;  // order[slot] = coordinate
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sig[static_cast<std::size_t>(a)] > sig[static_cast<std::size_t>(b)];
  });
  std::vector<std::pair<int, int>> groups;  // [begin, end) slots with equal signature
  for (int s = 0; s < c;) {
    int e = s + 1;
    while (e < c && sig[static_cast<std::size_t>(order[static_cast<std::size_t>(e)])] ==
                        sig[static_cast<std::size_t>(order[static_cast<std::size_t>(s)])])
      ++e;
    groups.emplace_back(s, e);
    s = e;
  }
  std::optional<Relation> best;
  std::vector<int> best_pos;
  std::vector<int> pos(static_cast<std::size_t>(c));
  auto evaluate = [&]() {
    for (int s = 0; s < c; ++s) pos[static_cast<std::size_t>(order[static_cast<std::size_t>(s)])] = s;
    Relation cand = permute(rows, d, c, pos);
    if (!best || cand < *best) {
      best = std::move(cand);
      best_pos = pos;
    }
  };
  // Odometer over the product of per-group permutations.
  for (auto& [s, e] : groups) std::sort(order.begin() + s, order.begin() + e);
  while (true) {
    evaluate();
    std::size_t g = groups.size();
    bool advanced = false;
    while (g-- > 0) {
      auto [s, e] = groups[g];
      if (std::next_permutation(order.begin() + s, order.begin() + e)) {
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  return {std::move(*best), best_pos};
}

}  // namespace

CoreForm core_form(const Relation& r) {
  const int n = r.arity();
  const int d = r.domain();
  if (n == 0) return CoreForm{r, {}, {}, {}};
  std::vector<int> rep(static_cast<std::size_t>(n));
  if (r.empty()) {
    rep[0] = 0;
    for (int j = 1; j < n; ++j) rep[static_cast<std::size_t>(j)] = -j;
    return CoreForm{Relation(d, 1), rep, {0}, {}};
  }
  const auto rows = r.tuples();
  // Classes of coordinates that agree in every tuple.
  std::vector<int> cls(static_cast<std::size_t>(n), -1);
  std::vector<int> reps;
  for (int j = 0; j < n; ++j) {
    if (cls[static_cast<std::size_t>(j)] >= 0) continue;
    cls[static_cast<std::size_t>(j)] = static_cast<int>(reps.size());
    for (int i = j + 1; i < n; ++i) {
      if (cls[static_cast<std::size_t>(i)] >= 0) continue;
      const bool same = std::all_of(rows.begin(), rows.end(), [i, j](const Tuple& t) {
        return t[static_cast<std::size_t>(i)] == t[static_cast<std::size_t>(j)];
      });
      if (same) cls[static_cast<std::size_t>(i)] = static_cast<int>(reps.size());
    }
    reps.push_back(j);
  }
  const int nc = static_cast<int>(reps.size());
  const Relation s = substitute(r, cls, nc);
  // Dummy classes become free groups.
  std::vector<int> kept;
  std::vector<int> kept_idx(static_cast<std::size_t>(nc), -1);
  for (int q = 0; q < nc; ++q) {
    const auto cnt = extension_counts(s, std::vector<int>{q});
    const bool dummy = std::all_of(cnt.begin(), cnt.end(), [d](std::uint64_t x) {
      return x == 0 || x == static_cast<std::uint64_t>(d);
    });
    if (!dummy) {
      kept_idx[static_cast<std::size_t>(q)] = static_cast<int>(kept.size());
      kept.push_back(q);
    }
  }
  if (kept.empty()) {
    kept_idx[0] = 0;
    kept.push_back(0);
  }
  const int c = static_cast<int>(kept.size());
  std::vector<int> sigma2(static_cast<std::size_t>(nc));
  for (int q = 0; q < nc; ++q) sigma2[static_cast<std::size_t>(q)] = std::max(0, kept_idx[static_cast<std::size_t>(q)]);
  const Relation t = substitute(s, sigma2, c);
  auto [core, pos] = canonical_perm(t);

  CoreForm cf{std::move(core), rep, std::vector<int>(static_cast<std::size_t>(c)), {}};
  std::vector<int> group_of(static_cast<std::size_t>(nc), -1);
  int groups = 0;
  for (int j = 0; j < n; ++j) {
    const int q = cls[static_cast<std::size_t>(j)];
    const int ki = kept_idx[static_cast<std::size_t>(q)];
    if (ki >= 0) {
      cf.rep[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(ki)];
    } else {
      if (group_of[static_cast<std::size_t>(q)] < 0) group_of[static_cast<std::size_t>(q)] = groups++;
      cf.rep[static_cast<std::size_t>(j)] = -1 - group_of[static_cast<std::size_t>(q)];
    }
    if (j != reps[static_cast<std::size_t>(q)]) cf.dups.emplace_back(j, reps[static_cast<std::size_t>(q)]);
  }
  for (int ki = 0; ki < c; ++ki)
    cf.orig[static_cast<std::size_t>(pos[static_cast<std::size_t>(ki)])] = reps[static_cast<std::size_t>(kept[static_cast<std::size_t>(ki)])];
  return cf;
}

Derivation expand_core(const CoreForm& cf, Derivation core_deriv, int arity) {
  Derivation out = subst_node(std::move(core_deriv), cf.orig, arity);
  if (cf.dups.empty()) return out;
  const int d = cf.core.domain();
  auto eq = seed_node("EQ", eq_rel(d));
  std::vector<int> ident(static_cast<std::size_t>(arity));
  for (int i = 0; i < arity; ++i) ident[static_cast<std::size_t>(i)] = i;
  for (const auto& [j, i] : cf.dups) out = conj_node(out, ident, eq, {i, j}, arity);
  return out;
}

// ---- signatures --------------------------------------------------------------

namespace {
ClosureSignature base(int d) {
  ClosureSignature s;
  if (d == 2) {
    s.result_arity_cap = 4;
    s.intermediate_arity_cap = 8;
  } else {
    s.result_arity_cap = 3;
    s.intermediate_arity_cap = 5;
  }
  return s;
}
}  // namespace

ClosureSignature ClosureSignature::partial_coclone(int d) { return base(d); }

ClosureSignature ClosureSignature::coclone(int d) {
  auto s = base(d);
  s.allow_exists = true;
  return s;
}

ClosureSignature ClosureSignature::k_exists(int d, std::set<int> k) {
  auto s = base(d);
  for (int x : k) {
    if (x < 1 || x > d) throw InputError("K must be a subset of [1,d]");
    if (x == 1)
      s.allow_exists = true;
    else
      s.exists_k.insert(x);
  }
  return s;
}

ClosureSignature ClosureSignature::counting(int d) {
  auto s = base(d);
  s.allow_exists = true;
  for (int k = 2; k <= d; ++k) s.exists_k.insert(k);
  return s;
}

ClosureSignature ClosureSignature::max_single(int d) {
  auto s = base(d);
  s.allow_max_single = true;
  return s;
}

ClosureSignature ClosureSignature::max_block(int d) {
  auto s = base(d);
  s.allow_max_block = true;
  return s;
}

void ClosureSignature::validate() const {
  if (!allow_substitution) throw InputError("closure runs require variable substitution");
  if (result_arity_cap < 0 || intermediate_arity_cap < result_arity_cap)
    throw InputError("arity caps must satisfy 0 <= A <= B");
  if (frontier_budget == 0) throw InputError("frontier budget must be positive");
  for (int k : exists_k)
    if (k < 2) throw InputError("exists_k thresholds below 2 are plain existential quantification");
}

std::string to_string(ClosureStatus s) {
  switch (s) {
    case ClosureStatus::Fixpoint:
      return "fixpoint";
    case ClosureStatus::BudgetExhausted:
      return "budget-exhausted";
    case ClosureStatus::IterationLimit:
      return "iteration-limit";
    case ClosureStatus::Found:
      return "found";
  }
  return "?";
}

// ---- engine ------------------------------------------------------------------

namespace {

class Engine {
 public:
  Engine(int d, const ClosureSignature& sig, const std::function<bool(const Relation&)>& stop)
      : d_(d), sig_(sig), cap_(sig.intermediate_arity_cap), stop_(stop) {}

  ClosureResult run(std::span<const Relation> gamma) {
    add(eq_rel(d_), seed_node("EQ", eq_rel(d_)), 0, true);
    // Entries are cores, so a threshold quantifier never sees a duplicated
    // coordinate; the one relation that loses is the empty one.
    if (!sig_.exists_k.empty()) {
      const int k = *sig_.exists_k.begin();
      add(exists_k(eq_rel(d_), 1, k), exists_k_node(seed_node("EQ", eq_rel(d_)), 1, k), 0, true);
    }
    int idx = 0;
    for (const auto& g : gamma) {
      if (g.domain() != d_) throw InputError("relation domain differs from closure domain");
      if (g.arity() > sig_.intermediate_arity_cap) throw InputError("generator arity exceeds intermediate cap");
      add(g, seed_node("G" + std::to_string(idx++), g), 0, true);
    }
    // The working arity cap grows one step at a time once the smaller cap is
    // saturated, so low-arity relations are complete before the budget runs out.
    int start = sig_.result_arity_cap;
    for (const auto& e : entries_) start = std::max(start, e.core.arity());
    cap_ = std::min(start, sig_.intermediate_arity_cap);
    std::size_t lo = 0;
    int round = 0;
    while (running()) {
      const std::size_t hi = entries_.size();
      if (lo == hi) {
        if (cap_ >= sig_.intermediate_arity_cap || !sig_.allow_conjunction) {
          status_ = ClosureStatus::Fixpoint;
          break;
        }
        ++cap_;
        for (std::size_t j = 0; j < hi && running(); ++j)
          for (std::size_t i = 0; i <= j && running(); ++i)
            if (atom_[i] || atom_[j]) conj(i, j, cap_, round);
        continue;
      }
      if (round >= sig_.iteration_limit) {
        status_ = ClosureStatus::IterationLimit;
        break;
      }
      ++round;
      for (std::size_t i = lo; i < hi && running(); ++i) unary(i, round);
      if (sig_.allow_conjunction)
        for (int m = 1; m <= cap_ && running(); ++m)
          for (std::size_t j = lo; j < hi && running(); ++j)
            for (std::size_t i = 0; i <= j && running(); ++i)
              if (atom_[i] || atom_[j]) conj(i, j, m, round);
      lo = hi;
    }
    ClosureResult res;
    res.d = d_;
    res.sig = sig_;
    res.status = status_ ? *status_ : ClosureStatus::Fixpoint;
    res.rounds = round;
    res.entries = std::move(entries_);
    return res;
  }

 private:
  bool running() const { return !status_.has_value(); }

  // Atoms are seeds and quantifier results (and their identifications). Every
  // entry is a conjunction of atoms, so a conjunction of two entries is also
  // reached by conjoining one atom at a time without exceeding its arity.
  void add(const Relation& r, const Derivation& deriv, int round, bool atom) {
    if (!running() || r.arity() > cap_) return;
    if (sig_.work_budget && ++work_ > sig_.work_budget) {
      status_ = ClosureStatus::BudgetExhausted;
      return;
    }
    if (seen_.size() < 4 * sig_.frontier_budget && !seen_.insert(r).second) return;
    CoreForm cf = core_form(r);
    if (index_.count(cf.core)) return;
    std::vector<int> sigma(cf.rep.size());
    for (std::size_t j = 0; j < cf.rep.size(); ++j) sigma[j] = std::max(0, cf.rep[j]);
    auto n = std::make_shared<DerivNode>(*subst_node(deriv, sigma, cf.core.arity()));
    n->entry = static_cast<int>(entries_.size());
    index_.emplace(cf.core, n->entry);
    entries_.push_back(ClosureEntry{cf.core, n, round});
    atom_.push_back(atom);
    if (stop_ && stop_(cf.core))
      status_ = ClosureStatus::Found;
    else if (entries_.size() >= sig_.frontier_budget)
      status_ = ClosureStatus::BudgetExhausted;
  }

  void unary(std::size_t id, int round) {
    const Relation x = entries_[id].core;
    const Derivation dx = entries_[id].deriv;
    const int n = x.arity();
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        std::vector<int> sigma;
        for (int p = 0; p < n; ++p) sigma.push_back(p == j ? i : (p > j ? p - 1 : p));
        add(substitute(x, sigma, n - 1), subst_node(dx, sigma, n - 1), round, atom_[id]);
      }
    for (int p = 0; p < n; ++p) {
      const std::vector<int> j{p};
      if (sig_.allow_exists) add(exists(x, j), exists_node(dx, j), round, true);
      for (int k : sig_.exists_k) add(exists_k(x, p, k), exists_k_node(dx, p, k), round, true);
      if (sig_.allow_max_single && !sig_.allow_max_block) add(max_quantify(x, j), max_node(dx, j), round, true);
    }
    if (sig_.allow_max_block)
      for (unsigned mask = 1; mask + 1 < (1U << n); ++mask) {
        std::vector<int> j;
        for (int p = 0; p < n; ++p)
          if ((mask >> p) & 1U) j.push_back(p);
        add(max_quantify(x, j), max_node(dx, j), round, true);
      }
  }

  // Conjunctions of entries i and j whose result has arity exactly m: x pinned
  // at 0..nx-1, y matched injectively onto k = nx + ny - m of those positions.
  void conj(std::size_t i, std::size_t j, int m, int round) {
    const int nx = entries_[i].core.arity();
    const int ny = entries_[j].core.arity();
    const int k = nx + ny - m;
    if (k < 0 || k > std::min(nx, ny) || m < nx) return;
    std::vector<int> sx(static_cast<std::size_t>(nx));
    for (int p = 0; p < nx; ++p) sx[static_cast<std::size_t>(p)] = p;
    std::vector<int> sy(static_cast<std::size_t>(ny), -1);
    std::vector<bool> used(static_cast<std::size_t>(nx), false);
    recurse(i, j, m, k, round, 0, 0, sx, sy, used);
  }

  void recurse(std::size_t i, std::size_t j, int m, int k, int round, int q, int matched, const std::vector<int>& sx,
               std::vector<int>& sy, std::vector<bool>& used) {
    if (!running()) return;
    const int ny = static_cast<int>(sy.size());
    const int nx = static_cast<int>(sx.size());
    if (q == ny) {
      if (matched != k) return;
      std::vector<int> scope = sy;
      int fresh = nx;
      for (auto& v : scope)
        if (v < 0) v = fresh++;
      const Relation& x = entries_[i].core;
      const Relation& y = entries_[j].core;
      add(conjoin(x, sx, y, scope, m), conj_node(entries_[i].deriv, sx, entries_[j].deriv, scope, m), round, false);
      return;
    }
    const int remaining = ny - q;
    if (matched + remaining > k) {  // leave q unmatched
      sy[static_cast<std::size_t>(q)] = -1;
      recurse(i, j, m, k, round, q + 1, matched, sx, sy, used);
    }
    if (matched < k)
      for (int p = 0; p < nx; ++p) {
        if (used[static_cast<std::size_t>(p)]) continue;
        used[static_cast<std::size_t>(p)] = true;
        sy[static_cast<std::size_t>(q)] = p;
        recurse(i, j, m, k, round, q + 1, matched + 1, sx, sy, used);
        used[static_cast<std::size_t>(p)] = false;
      }
    sy[static_cast<std::size_t>(q)] = -1;
  }

  int d_;
  ClosureSignature sig_;
  int cap_ = 0;
  std::uint64_t work_ = 0;
  std::function<bool(const Relation&)> stop_;
  std::vector<ClosureEntry> entries_;
  std::vector<bool> atom_;
  std::unordered_map<Relation, int, RelationHash> index_;
  std::unordered_set<Relation, RelationHash> seen_;
  std::optional<ClosureStatus> status_;
};

// Assign each of a output positions a label: a core position in [0,c) or a
// free group; every core position must be used.
void for_each_layout(int a, int c, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> lab(static_cast<std::size_t>(a));
  std::function<void(int, int, unsigned)> rec = [&](int pos, int groups, unsigned used) {
    if (pos == a) {
      if (used == (c >= 32 ? ~0U : ((1U << c) - 1))) f(lab);
      return;
    }
    for (int p = 0; p < c; ++p) {
      lab[static_cast<std::size_t>(pos)] = p;
      rec(pos + 1, groups, used | (1U << p));
    }
    for (int g = 0; g <= groups; ++g) {
      lab[static_cast<std::size_t>(pos)] = -1 - g;
      rec(pos + 1, std::max(groups, g + 1), used);
    }
  };
  rec(0, 0, 0);
}

}  // namespace

ClosureResult close(std::span<const Relation> gamma, const ClosureSignature& sig, int d,
                    const std::function<bool(const Relation&)>& stop) {
  sig.validate();
  cell_count(d, 0);
  return Engine(d, sig, stop).run(gamma);
}

std::vector<std::pair<Relation, Derivation>> ClosureResult::relations(int max_arity) const {
  std::map<Relation, Derivation> out;
  for (const auto& e : entries) {
    const int c = e.core.arity();
    if (c > max_arity) continue;
    for (int a = std::max(1, c); a <= max_arity; ++a)
      for_each_layout(a, c, [&](const std::vector<int>& lab) {
        CoreForm cf{e.core, lab, std::vector<int>(static_cast<std::size_t>(c), -1), {}};
        std::map<int, int> first_of_group;
        for (int j = 0; j < a; ++j) {
          const int l = lab[static_cast<std::size_t>(j)];
          if (l >= 0) {
            auto& o = cf.orig[static_cast<std::size_t>(l)];
            if (o < 0)
              o = j;
            else
              cf.dups.emplace_back(j, o);
          } else if (auto [it, fresh] = first_of_group.emplace(l, j); !fresh) {
            cf.dups.emplace_back(j, it->second);
          }
        }
        auto deriv = expand_core(cf, e.deriv, a);
        Relation r = replay(deriv);
        out.emplace(std::move(r), std::move(deriv));
      });
  }
  return {out.begin(), out.end()};
}

bool ClosureResult::contains(const Relation& r) const {
  const auto core = core_form(r).core;
  return std::any_of(entries.begin(), entries.end(), [&](const ClosureEntry& e) { return e.core == core; });
}

std::optional<Derivation> member(const Relation& r, std::span<const Relation> gamma, const ClosureSignature& sig) {
  const CoreForm target = core_form(r);
  auto res = close(gamma, sig, r.domain(), [&](const Relation& c) { return c == target.core; });
  for (const auto& e : res.entries)
    if (e.core == target.core) return expand_core(target, e.deriv, r.arity());
  return std::nullopt;
}

}  // namespace maxclone
