#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "maxclone/closure.hpp"
#include "oracle.hpp"

using namespace maxclone;

namespace {

ClosureSignature small(ClosureSignature s, int a, int b) {
  s.caps(a, b);
  return s;
}

std::set<Relation> rel_set(const ClosureResult& r) {
  std::set<Relation> out;
  for (auto& [rel, d] : r.relations()) out.insert(rel);
  return out;
}

bool subset(const std::set<Relation>& a, const std::set<Relation>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_CASE("core form reconstructs the relation and ignores coordinate order") {
  std::mt19937_64 rng(41);
  for (int it = 0; it < 300; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2), n = 1 + static_cast<int>(rng() % 4);
    auto base = oracle::random_relation(rng, d, std::max(1, n - 1), 0.5);
    // Add a duplicated or a dummy coordinate some of the time.
    std::vector<int> sigma;
    for (int i = 0; i < base.arity(); ++i) sigma.push_back(i);
    Relation r = base;
    if (rng() % 2) r = substitute(base, sigma, base.arity() + 1);  // dummy last coordinate
    if (rng() % 3 == 0 && r.arity() >= 2) {
      std::vector<int> ident;
      for (int i = 0; i < r.arity(); ++i) ident.push_back(i);
      r = conjoin(r, ident, eq_rel(d), std::vector<int>{0, r.arity() - 1}, r.arity());
    }
    const auto cf = core_form(r);
    REQUIRE(replay(expand_core(cf, seed_node("C", cf.core), r.arity())) == r);
    std::vector<int> perm(static_cast<std::size_t>(r.arity()));
    for (int i = 0; i < r.arity(); ++i) perm[static_cast<std::size_t>(i)] = r.arity() - 1 - i;
    REQUIRE(core_form(substitute(r, perm, r.arity())).core == cf.core);
  }
  CHECK(core_form(eq_rel(2)).core == Relation::full(2, 1));
  CHECK(core_form(Relation(2, 3)).core == Relation(2, 1));
  CHECK(core_form(imp()).core.arity() == 2);
}

TEST_CASE("closure examples") {
  const std::vector<Relation> gi{imp()};
  auto r1 = close(gi, small(ClosureSignature::max_block(2), 1, 3), 2);
  auto s1 = rel_set(r1);
  CHECK(s1.count(delta(0)));
  CHECK(s1.count(delta(1)));

  const std::vector<Relation> on{or_rel(2), nand_rel(2)};
  CHECK(rel_set(close(on, small(ClosureSignature::max_block(2), 2, 3), 2)).count(neq()));

  auto e = close({}, small(ClosureSignature::partial_coclone(2), 2, 4), 2);
  CHECK(e.status == ClosureStatus::Fixpoint);
  CHECK(rel_set(e) == std::set<Relation>{Relation::full(2, 1), eq_rel(2), Relation::full(2, 2)});
}

TEST_CASE("membership witnesses replay") {
  const std::vector<Relation> g{imp(), or_rel(2)};
  auto w = member(neq(), g, small(ClosureSignature::max_block(2), 2, 4));
  REQUIRE(w);
  CHECK(replay(*w) == neq());
  CHECK_FALSE(derivation_lines(*w).empty());

  const auto r = compl_rel(2, 1);
  const std::vector<Relation> self{r};
  auto s = member(r, self, ClosureSignature::partial_coclone(2));
  REQUIRE(s);
  CHECK(replay(*s) == r);

  // x^y^z=1 is not generated by x^y=1: majority preserves NEQ but not the parity relation.
  const std::vector<Relation> nq{affine_rel(2, 1)};
  CHECK_FALSE(member(affine_rel(3, 1), nq, small(ClosureSignature::coclone(2), 3, 5)));
  CHECK(preserves(majority_fn(), neq()));
  CHECK_FALSE(preserves(majority_fn(), affine_rel(3, 1)));
  // ... whereas x^y=1 together with x^y^z=0 does reach it
  const std::vector<Relation> aff{affine_rel(2, 1), affine_rel(3, 0)};
  auto a = member(affine_rel(3, 1), aff, small(ClosureSignature::coclone(2), 3, 5));
  REQUIRE(a);
  CHECK(replay(*a) == affine_rel(3, 1));
}

TEST_CASE("every derivation replays") {
  const std::vector<Relation> g{imp(), or_rel(2)};
  auto r = close(g, [&] {
    auto s = small(ClosureSignature::max_block(2), 2, 4);
    s.frontier_budget = 3000;
    return s;
  }(), 2);
  for (const auto& e : r.entries) REQUIRE(replay(e.deriv) == e.core);
  for (const auto& [rel, dv] : r.relations(2)) REQUIRE(replay(dv) == rel);
}

TEST_CASE("closures are monotone in the generators and in the signature") {
  const auto sig = small(ClosureSignature::coclone(2), 2, 3);
  const std::vector<Relation> g1{imp()}, g2{imp(), delta(1)};
  auto a = close(g1, sig, 2), b = close(g2, sig, 2);
  REQUIRE(a.status == ClosureStatus::Fixpoint);
  REQUIRE(b.status == ClosureStatus::Fixpoint);
  CHECK(subset(rel_set(a), rel_set(b)));

  const std::vector<Relation> g{relm(2)};
  auto p = close(g, small(ClosureSignature::partial_coclone(3), 2, 3), 3);
  auto c = close(g, small(ClosureSignature::coclone(3), 2, 3), 3);
  auto n = close(g, small(ClosureSignature::counting(3), 2, 3), 3);
  REQUIRE(n.status == ClosureStatus::Fixpoint);
  CHECK(subset(rel_set(p), rel_set(c)));
  CHECK(subset(rel_set(c), rel_set(n)));
}

TEST_CASE("closure runs are deterministic") {
  const std::vector<Relation> g{or_rel(2), imp()};
  auto s = small(ClosureSignature::max_block(2), 2, 4);
  s.frontier_budget = 2000;
  auto a = close(g, s, 2), b = close(g, s, 2);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    CHECK(a.entries[i].core == b.entries[i].core);
    CHECK(to_sexpr(a.entries[i].deriv) == to_sexpr(b.entries[i].deriv));
  }
}

TEST_CASE("affine generators: max closure equals the co-clone") {
  for (const auto& g : std::vector<std::vector<Relation>>{{neq()}, {affine_rel(3, 0)}, {affine_rel(3, 1), delta(0)}}) {
    auto m = close(g, small(ClosureSignature::max_block(2), 3, 4), 2);
    auto c = close(g, small(ClosureSignature::coclone(2), 3, 4), 2);
    REQUIRE(m.status == ClosureStatus::Fixpoint);
    REQUIRE(c.status == ClosureStatus::Fixpoint);
    CHECK(rel_set(m) == rel_set(c));
  }
}

TEST_CASE("rel_m oracle") {
  const auto r2 = relm(2);
  for (auto v : {RelmVariant::Plain, RelmVariant::KExists, RelmVariant::Counting, RelmVariant::Max})
    CHECK(relm_oracle(2, r2, v, 2));
  const auto r3 = relm(3);  // d = 6
  // unary D_2 u D_3
  Relation u23(6, 1);
  for (int a = 1; a < 6; ++a) u23.insert(Tuple{a});
  CHECK(relm_oracle(3, u23, RelmVariant::KExists, 2));
  CHECK_FALSE(relm_oracle(3, u23, RelmVariant::Max));
  Relation top(6, 1);
  for (int a = 3; a < 6; ++a) top.insert(Tuple{a});
  CHECK(relm_oracle(3, top, RelmVariant::Max));
  CHECK_FALSE(relm_oracle(3, top, RelmVariant::KExists, 2));
  CHECK(relm_oracle(3, top, RelmVariant::KExists, 3));
  CHECK(relm_oracle(3, r3, RelmVariant::Plain));
  CHECK_FALSE(relm_oracle(2, Relation(3, 2), RelmVariant::Plain));
  CHECK_THROWS_AS(relm_oracle(2, imp(), RelmVariant::Plain), InputError);
}

TEST_CASE("rel_m oracle agrees with the enumerated descriptions on all small relations") {
  for (auto [v, k] : std::vector<std::pair<RelmVariant, int>>{
           {RelmVariant::Plain, 1}, {RelmVariant::KExists, 2}, {RelmVariant::Counting, 1}, {RelmVariant::Max, 1}}) {
    const auto desc = relm_described(2, 2, v, k);
    const std::set<Relation> ds(desc.begin(), desc.end());
    for (int n = 1; n <= 2; ++n) {
      const std::uint64_t cells = cell_count(3, n);
      for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << cells); ++bits) {
        Relation r(3, n);
        for (std::uint64_t i = 0; i < cells; ++i)
          if ((bits >> i) & 1U) r.set(i);
        REQUIRE(relm_oracle(2, r, v, k) == (ds.count(r) == 1));
      }
    }
  }
}

TEST_CASE("bounded closures of rel_2 match the oracle") {
  const std::vector<Relation> g{relm(2)};
  auto plain = close(g, small(ClosureSignature::coclone(3), 2, 4), 3);
  auto desc = relm_described(2, 2, RelmVariant::Plain);
  CHECK(rel_set(plain) == std::set<Relation>(desc.begin(), desc.end()));
  auto cnt = close(g, small(ClosureSignature::counting(3), 2, 4), 3);
  desc = relm_described(2, 2, RelmVariant::Counting);
  CHECK(rel_set(cnt) == std::set<Relation>(desc.begin(), desc.end()));
  auto mx = close(g, small(ClosureSignature::max_block(3), 2, 4), 3);
  desc = relm_described(2, 2, RelmVariant::Max);
  CHECK(rel_set(mx) == std::set<Relation>(desc.begin(), desc.end()));
  // the counting co-clone is itself closed under max quantification
  std::vector<Relation> counting_members;
  for (const auto& r : rel_set(cnt))
    if (!r.empty()) counting_members.push_back(r);
  auto again = close(counting_members, small(ClosureSignature::max_block(3), 2, 3), 3);
  REQUIRE(again.status == ClosureStatus::Fixpoint);
  for (const auto& r : rel_set(again)) CHECK(relm_oracle(2, r, RelmVariant::Counting));
}

TEST_CASE("separation witness") {
  const std::vector<Relation> g{imp(), or_rel(2)};
  const std::vector<Relation> cand{neq()};
  auto rep = max_vs_single_max_witness(g, small(ClosureSignature::max_block(2), 2, 4), cand);
  REQUIRE(rep.found);
  CHECK(*rep.relation == neq());
  CHECK(*rep.obstruction == join_fn());
  CHECK(replay(*rep.derivation) == neq());

  const std::vector<Relation> n{neq()};
  CHECK_FALSE(max_vs_single_max_witness(n, small(ClosureSignature::max_block(2), 2, 4)).found);
  CHECK_FALSE(max_vs_single_max_witness({}, ClosureSignature::max_block(2)).found);
}
