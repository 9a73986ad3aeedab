#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <set>

#include "maxclone/fnspace.hpp"
#include "oracle.hpp"

using namespace maxclone;

namespace {

// Image of a box under f, by brute force over all argument tuples.
std::set<int> image(const PartialFunction& f, const std::vector<std::vector<int>>& box) {
  std::set<int> out;
  for (const auto& t : oracle::all_tuples(f.domain(), f.arity())) {
    bool in = true;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (std::find(box[i].begin(), box[i].end(), t[i]) == box[i].end()) in = false;
    if (in && f(t) != PartialFunction::kUndef) out.insert(f(t));
  }
  return out;
}

std::vector<std::vector<int>> subsets_of_size(int d, int k) {
  std::vector<std::vector<int>> out;
  for (unsigned s = 0; s < (1U << d); ++s)
    if (std::popcount(s) == k) {
      std::vector<int> v;
      for (int i = 0; i < d; ++i)
        if ((s >> i) & 1U) v.push_back(i);
      out.push_back(v);
    }
  return out;
}

PartialFunction random_partial(std::mt19937_64& rng, int d, int n, double undef) {
  std::bernoulli_distribution hole(undef);
  std::vector<int> t(cell_count(d, n));
  for (auto& v : t) v = hole(rng) ? PartialFunction::kUndef : static_cast<int>(rng() % static_cast<unsigned>(d));
  return PartialFunction(d, n, t);
}

}  // namespace

TEST_CASE("preserves examples") {
  CHECK(preserves(join_fn(), or_rel(2)));
  CHECK_FALSE(preserves(join_fn(), neq()));
  CHECK(preserves(constant_fn(2, 2, 1), Relation::full(2, 3)));
  CHECK(preserves(majority_fn(), imp()));
  CHECK(preserves(minority_fn(), affine_rel(3, 1)));
  CHECK_FALSE(preserves(minority_fn(), or_rel(2)));
  CHECK(preserves(PartialFunction(2, 2), neq()));  // nowhere defined
  CHECK_THROWS_AS(preserves(join_fn(), relm(2)), InputError);
}

TEST_CASE("k-subset surjectivity examples") {
  CHECK(k_subset_surjective(join_fn(), 2));
  CHECK_FALSE(k_subset_surjective(constant_fn(2, 1, 0), 2));
  CHECK(k_subset_surjective(constant_fn(2, 1, 0), 1));
  CHECK_THROWS_AS(k_subset_surjective(join_fn(), 3), InputError);
  // defined-image reading: a hole makes a singleton box empty
  PartialFunction h(2, 1, {0, PartialFunction::kUndef});
  CHECK_FALSE(k_subset_surjective(h, 1));
}

TEST_CASE("example4_function fails subset surjectivity exactly at m") {
  for (auto [k, m] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}, {4, 2}, {4, 3}, {4, 4}, {5, 3}, {5, 5}}) {
    const auto f = example4_function(k, m);
    CHECK(f.is_total());
    std::vector<int> b;
    for (int i = 0; i < m; ++i) b.push_back(i);
    std::set<int> want;
    for (int i = 0; i <= m - 2; ++i) want.insert(i);
    CHECK(image(f, {b, b}) == want);
    for (int l = 1; l <= k; ++l) CHECK(k_subset_surjective(f, l) == (l != m));
  }
  CHECK_THROWS_AS(example4_function(3, 1), InputError);
  CHECK_THROWS_AS(example4_function(3, 4), InputError);
}

TEST_CASE("k-subset surjectivity agrees with brute-force image") {
  std::mt19937_64 rng(3);
  for (int it = 0; it < 150; ++it) {
    const int d = 2 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % 2);
    const auto f = random_partial(rng, d, n, 0.15);
    for (int k = 1; k <= d; ++k) {
      bool ok = true;
      const auto subs = subsets_of_size(d, k);
      for (const auto& a : subs)
        for (const auto& b : subs) {
          std::vector<std::vector<int>> box{a};
          if (n == 2) box.push_back(b);
          if (static_cast<int>(image(f, box).size()) < k) ok = false;
        }
      REQUIRE(k_subset_surjective(f, k) == ok);
    }
  }
}

TEST_CASE("enumeration counts and order") {
  CHECK(enumerate_functions(2, 2, FunctionMode::Total).size() == 16);
  const auto p = enumerate_functions(2, 2, FunctionMode::Partial);
  CHECK(p.size() == 81);
  CHECK(std::is_sorted(p.begin(), p.end()));
  CHECK(std::adjacent_find(p.begin(), p.end()) == p.end());
  CHECK(p.front().table() == std::vector<int>{0, 0, 0, 0});
  CHECK(p.back().table() == std::vector<int>(4, PartialFunction::kUndef));
  std::size_t n3 = 0;
  enumerate_functions(2, 3, FunctionMode::Partial, [&](const PartialFunction&) {
    ++n3;
    return true;
  });
  CHECK(n3 == 6561);
  CHECK_THROWS_AS(function_count(3, 3, FunctionMode::Total), ResourceError);
}

TEST_CASE("pol / ppol / mk_ppol") {
  const std::vector<Relation> none;
  CHECK(pol(none, 2, 2).size() == 4 + 16);
  const std::vector<Relation> g{neq()};
  const auto p = pol(g, 2, 1);
  REQUIRE(p.size() == 2);
  CHECK(p.by_arity[1][0] == projection_fn(2, 1, 0));
  CHECK(p.by_arity[1][1] == negation_fn());
  // K = {d}: exactly the surjective partial polymorphisms
  const std::vector<Relation> gi{imp()};
  const std::vector<int> kd{2};
  const auto mk = mk_ppol(gi, kd, 2, 2);
  std::size_t expect = 0;
  for (const auto& f : enumerate_functions(2, 1, FunctionMode::Partial))
    if (preserves(f, imp()) && image(f, {{0, 1}}).size() == 2) ++expect;
  for (const auto& f : enumerate_functions(2, 2, FunctionMode::Partial))
    if (preserves(f, imp()) && image(f, {{0, 1}, {0, 1}}).size() == 2) ++expect;
  CHECK(mk.size() == expect);
}

TEST_CASE("inv examples") {
  CHECK(inv({}, 2, 2).size() == 2 + 4 + 16);
  const std::vector<PartialFunction> lat{join_fn(), meet_fn()};
  const auto im2 = inv(lat, 2, 2);
  std::vector<Relation> binary;
  for (const auto& r : im2)
    if (r.arity() == 2) binary.push_back(r);
  std::size_t expect = 0;
  for (const auto& r : inv({}, 2, 2))
    if (r.arity() == 2 && structural_predicates(r).is_log_supermodular) ++expect;
  CHECK(binary.size() == expect);
  auto has = [&](const Relation& r) { return std::find(binary.begin(), binary.end(), r) != binary.end(); };
  CHECK(has(imp()));
  CHECK(has(eq_rel(2)));
  CHECK(has(Relation::full(2, 2)));
  CHECK(has(Relation(2, 2)));
  CHECK(has(substitute(delta(0), std::vector<int>{0}, 2)));
  CHECK_FALSE(has(neq()));
  CHECK_FALSE(has(or_rel(2)));
  CHECK_FALSE(has(nand_rel(2)));
  const std::vector<PartialFunction> ng{negation_fn()};
  std::vector<Relation> unary;
  for (const auto& r : inv(ng, 2, 1))
    if (r.arity() == 1) unary.push_back(r);
  CHECK(unary == std::vector<Relation>{Relation(2, 1), Relation::full(2, 1)});
  CHECK_THROWS_AS(inv({}, 2, 5), ResourceError);
}

TEST_CASE("relaxed subset monotonicity, exhaustive for small d") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 60; ++it) {
    const int d = 2 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % 2);
    const auto f = random_partial(rng, d, n, 0.1);
    for (int k = 1; k <= d; ++k) {
      if (!k_subset_surjective(f, k)) continue;
      for (int s1 = k; s1 <= d; ++s1)
        for (int s2 = k; s2 <= d; ++s2)
          for (const auto& a : subsets_of_size(d, s1))
            for (const auto& b : subsets_of_size(d, s2)) {
              std::vector<std::vector<int>> box{a};
              if (n == 2) box.push_back(b);
              REQUIRE(static_cast<int>(image(f, box).size()) >= k);
            }
    }
  }
}

TEST_CASE("quantifier preservation on random relations") {
  std::mt19937_64 rng(29);
  int checked = 0;
  for (int it = 0; it < 200; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2), n = 2 + static_cast<int>(rng() % 2);
    const auto r = oracle::random_relation(rng, d, n, 0.5);
    const int k = 1 + static_cast<int>(rng() % static_cast<unsigned>(d));
    const auto f = random_partial(rng, d, 2, 0.3);
    if (!k_subset_surjective(f, k) || !preserves(f, r)) continue;
    ++checked;
    const int pos = static_cast<int>(rng() % static_cast<unsigned>(n));
    REQUIRE(preserves(f, exists_k(r, pos, k)));
  }
  CHECK(checked > 0);
}

TEST_CASE("conjunction preservation") {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 200; ++it) {
    const auto r1 = oracle::random_relation(rng, 2, 2, 0.6), r2 = oracle::random_relation(rng, 2, 2, 0.6);
    const auto f = random_partial(rng, 2, 2, 0.2);
    if (!preserves(f, r1) || !preserves(f, r2)) continue;
    REQUIRE(preserves(f, conjoin(r1, std::vector<int>{0, 1}, r2, std::vector<int>{1, 2}, 3)));
  }
}
