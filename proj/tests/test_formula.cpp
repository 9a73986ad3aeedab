#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "maxclone/formula.hpp"
#include "oracle.hpp"

using namespace maxclone;

namespace {

const RelationLibrary kLib(2);

Relation eval(const std::string& text, const std::vector<std::string>& order) {
  return evaluate(parse_formula(text), order, kLib);
}

bool prenex_counting(const Formula& f) {
  const Formula* g = &f;
  while (g->kind == Formula::Kind::Exists || g->kind == Formula::Kind::ExistsK) g = &g->kids[0];
  if (g->kind == Formula::Kind::Atom) return true;
  for (const auto& k : g->kids)
    if (k.kind != Formula::Kind::Atom) return false;
  return true;
}

// M (N-1)^c < L N^c, and c within one of the smallest such value.
void check_stats(const FlattenStats& s) {
  CHECK(s.L <= s.M);
  CHECK(s.c >= 1);
  if (s.N <= 1) {
    CHECK(s.c == 1);
    return;
  }
  const mpz_class lhs = mpz_class(static_cast<unsigned long>(s.M)) *
                        [&] { mpz_class r; mpz_ui_pow_ui(r.get_mpz_t(), s.N - 1, static_cast<unsigned long>(s.c)); return r; }();
  const mpz_class rhs = mpz_class(static_cast<unsigned long>(s.L)) *
                        [&] { mpz_class r; mpz_ui_pow_ui(r.get_mpz_t(), s.N, static_cast<unsigned long>(s.c)); return r; }();
  CHECK(lhs < rhs);
  const int cmin = minimal_copies(s.M, s.N, s.L);
  CHECK((s.c == cmin || s.c == cmin + 1));
}

MaxImplementation delta0_gadget() {
  CspInstance g;
  g.add_var("x");
  g.add_var("y");
  g.add("IMP", imp(), {"x", "y"});
  return make_max_implementation(g, {"x"}, "delta0", delta(0));
}

// NEQ(x,y) as the maximisers of OR(x,y), IMP(x,z), IMP(y,w).
MaxImplementation neq_gadget() {
  CspInstance g;
  for (const char* v : {"x", "y", "z", "w"}) g.add_var(v);
  g.add("OR", or_rel(2), {"x", "y"});
  g.add("IMP", imp(), {"x", "z"});
  g.add("IMP", imp(), {"y", "w"});
  return make_max_implementation(g, {"x", "y"}, "NEQ", neq());
}

}  // namespace

TEST_CASE("parse and print formulas") {
  const std::string s = "(mex (y z) (and (atom IMP x y) (exists_k 2 (t) (atom OR t z)) (exists (u) (atom EQ u x))))";
  const auto f = parse_formula(s);
  CHECK(to_string(f) == s);
  CHECK(parse_formula(to_string(f)) == f);
  CHECK(free_variables(f) == std::vector<std::string>{"x"});
  CHECK_THROWS_AS(parse_formula("(atom IMP x"), InputError);
  CHECK_THROWS_AS(parse_formula("(atom IMP X y)"), InputError);
  CHECK_THROWS_AS(parse_formula("(frob x)"), InputError);
  CHECK_THROWS_AS(evaluate(parse_formula("(atom IMP x y z)"), kLib), InputError);
  CHECK_THROWS_AS(evaluate(parse_formula("(atom NOPE x)"), kLib), InputError);
}

TEST_CASE("evaluate examples") {
  CHECK(eval("(mex (y) (atom IMP x y))", {"x"}) == delta(0));
  CHECK(eval("(and (atom OR x y) (atom NAND x y))", {"x", "y"}) == neq());
  CHECK(eval("(exists_k 2 (y) (atom IMP x y))", {"x"}) == delta(0));
  CHECK(eval("(exists (y) (atom IMP x y))", {"x"}) == Relation::full(2, 1));
  // extra order entries become dummy coordinates
  CHECK(eval("(atom delta1 x)", {"w", "x"}) == make_relation(2, 2, std::vector<std::string>{"01", "11"}));
  CHECK(eval("(atom IMP y x)", {"x", "y"}) == make_relation(2, 2, std::vector<std::string>{"00", "10", "11"}));
}

TEST_CASE("evaluate agrees with the tuple-set oracle") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 200; ++it) {
    RelationLibrary lib(2);
    const auto r = oracle::random_relation(rng, 2, 3, 0.5);
    lib.add("R", r);
    // (exists_k k (z) (and R(x,y,z) R(z,x,x)))
    const int k = 1 + static_cast<int>(rng() % 2);
    const auto f = Formula::exists_k(k, "z", Formula::conj({Formula::atom("R", {"x", "y", "z"}),
                                                             Formula::atom("R", {"z", "x", "x"})}));
    oracle::TupleSet body;
    for (const auto& t : oracle::all_tuples(2, 3)) {
      const auto s = oracle::as_set(r);
      if (s.count({t[0], t[1], t[2]}) && s.count({t[2], t[0], t[0]})) body.insert(t);
    }
    const auto want = oracle::exists_k(body, 2, k, 2, 3);
    REQUIRE(evaluate(f, {"x", "y"}, lib) == oracle::to_rel(2, 2, want));
  }
}

TEST_CASE("flatten_counting") {
  const auto f = parse_formula("(and (exists_k 2 (y) (atom IMP x y)) (exists_k 2 (z) (atom OR x z)))");
  const auto res = flatten_counting(f, kLib);
  CHECK(res.verified);
  CHECK(res.renamed.empty());
  CHECK(to_string(res.prenex) == "(exists_k 2 (y) (exists_k 2 (z) (and (atom IMP x y) (atom OR x z))))");
  CHECK(evaluate(res.prenex, {"x"}, kLib) == evaluate(f, {"x"}, kLib));

  const auto pre = parse_formula("(exists (y) (and (atom IMP x y) (atom OR y x)))");
  CHECK(flatten_counting(pre, kLib).prenex == pre);

  const auto clash = parse_formula("(and (exists (y) (atom IMP x y)) (exists_k 2 (y) (atom OR x y)) (atom NEQ y x))");
  const auto r2 = flatten_counting(clash, kLib);
  CHECK(r2.renamed.size() >= 2);
  CHECK(prenex_counting(r2.prenex));
  CHECK(free_variables(r2.prenex) == free_variables(clash));
  CHECK(evaluate(r2.prenex, {"x", "y"}, kLib) == evaluate(clash, {"x", "y"}, kLib));

  CHECK_THROWS_AS(flatten_counting(parse_formula("(mex (y) (atom IMP x y))"), kLib), InputError);
}

TEST_CASE("flatten_counting preserves the relation on random nests") {
  std::mt19937_64 rng(3);
  const std::vector<std::string> rels{"IMP", "OR", "NAND", "NEQ", "EQ", "OR3"};
  const std::vector<std::string> names{"x", "y", "z", "u"};
  for (int it = 0; it < 300; ++it) {
    std::function<Formula(int)> gen = [&](int depth) -> Formula {
      if (depth == 0 || rng() % 3 == 0) {
        const auto& rel = rels[rng() % rels.size()];
        const int ar = rel == "OR3" ? 3 : 2;
        std::vector<std::string> vs;
        for (int i = 0; i < ar; ++i) vs.push_back(names[rng() % names.size()]);
        return Formula::atom(rel, vs);
      }
      if (rng() % 2) return Formula::conj({gen(depth - 1), gen(depth - 1)});
      const auto& v = names[rng() % names.size()];
      if (rng() % 2) return Formula::exists({v}, gen(depth - 1));
      return Formula::exists_k(1 + static_cast<int>(rng() % 2), v, gen(depth - 1));
    };
    const auto f = gen(4);
    const auto res = flatten_counting(f, kLib);
    REQUIRE(prenex_counting(res.prenex));
    REQUIRE(evaluate(res.prenex, names, kLib) == evaluate(f, names, kLib));
  }
}

TEST_CASE("flatten_max examples") {
  const auto single = parse_formula("(mex (y z) (and (atom IMP x y) (atom OR y z)))");
  const auto r1 = flatten_max(single, kLib);
  CHECK(r1.verified);
  CHECK(r1.stats.empty());
  CHECK(r1.formula() == single);

  const auto two = parse_formula(
      "(and (mex (z) (and (atom OR z y) (atom NEQ z x))) (mex (t) (and (atom NAND x t) (atom NEQ t y))))");
  const auto r2 = flatten_max(two, kLib);
  CHECK(r2.verified);
  CHECK(r2.block == std::vector<std::string>{"z", "t"});
  CHECK(r2.atoms.size() == 4);
  CHECK(evaluate(r2.formula(), {"x", "y"}, kLib) == evaluate(two, {"x", "y"}, kLib));

  const auto nested = parse_formula("(mex (y) (mex (z) (and (atom IMP x y) (atom IMP y z))))");
  const auto r3 = flatten_max(nested, kLib);
  CHECK(r3.verified);
  CHECK(evaluate(nested, {"x"}, kLib) == delta(0));
  CHECK(evaluate(r3.formula(), {"x"}, kLib) == delta(0));
  REQUIRE(r3.stats.size() == 1);
  check_stats(r3.stats[0]);
}

TEST_CASE("flatten_max rejects an empty conjunction of maxima") {
  const auto f = parse_formula("(and (mex (z) (atom IMP x z)) (mex (t) (atom IMP t x)))");
  try {
    flatten_max(f, kLib);
    FAIL("expected EmptyConjunctionError");
  } catch (const EmptyConjunctionError& e) {
    CHECK(e.left == delta(0));
    CHECK(e.right == delta(1));
    CHECK(e.left_vars == std::vector<std::string>{"x"});
  }
}

TEST_CASE("nested collapse counterexample is caught by verification") {
  // M = N = L = 2, c = 1: the copied block keeps only x2 = 1, the original is full.
  const auto f = parse_formula(
      "(mex (y) (and (mex (z1 z2) (and (atom IMP y z2) (atom IMP y z1) (atom EQ z2 x2)))))");
  CHECK(evaluate(f, {"x2"}, kLib) == Relation::full(2, 1));
  CHECK_THROWS_AS(flatten_max(f, kLib), VerificationError);
}

TEST_CASE("flatten_max stats on random nested blocks") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> rels{"IMP", "OR", "NAND", "NEQ", "EQ"};
  int collapsed = 0;
  for (int it = 0; it < 1500; ++it) {
    const std::vector<std::string> outer{"x1", "x2", "y"}, all{"x1", "x2", "y", "z1", "z2"};
    auto atom = [&](const std::vector<std::string>& pool, const std::string& must) {
      std::string a = pool[rng() % pool.size()], b = pool[rng() % pool.size()];
      if (rng() % 2) a = must; else b = must;
      return Formula::atom(rels[rng() % rels.size()], {a, b});
    };
    std::vector<Formula> inner;
    const int ni = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < ni; ++i) inner.push_back(atom(all, i % 2 ? "z1" : "z2"));
    std::vector<Formula> mid{Formula::mex({"z1", "z2"}, Formula::conj(inner))};
    if (rng() % 2) mid.push_back(atom(outer, "y"));
    const Formula f = Formula::mex({"y"}, Formula::conj(mid));
    try {
      const auto res = flatten_max(f, kLib);
      const auto fv = free_variables(f);
      REQUIRE(evaluate(res.formula(), fv, kLib) == evaluate(f, fv, kLib));
      for (const auto& s : res.stats) check_stats(s);
      collapsed += !res.stats.empty();
    } catch (const VerificationError&) {
    } catch (const EmptyConjunctionError&) {
    }
  }
  CHECK(collapsed > 100);
}

TEST_CASE("minimal copies") {
  CHECK(minimal_copies(4, 1, 1) == 1);
  CHECK(minimal_copies(2, 2, 2) == 1);  // 2*1 < 2*2
  CHECK(minimal_copies(4, 2, 1) == 3);  // 4*1 < 1*8
  CHECK(minimal_copies(8, 2, 1) == 4);  // 8 = 8 at c = 3, strict needs 4
  const auto [c, adjusted] = copies_from_bound(8, 2, 1);
  CHECK(c == 4);
  CHECK(adjusted);
  CHECK(copies_from_bound(9, 3, 4).first == 3);  // log ratio is exactly 2
  for (std::uint64_t M = 1; M <= 12; ++M)
    for (std::uint64_t N = 1; N <= 6; ++N)
      for (std::uint64_t L = 1; L <= M; ++L) {
        const int c = copies_from_bound(M, N, L).first;
        FlattenStats s{M, N, L, c, false};
        check_stats(s);
      }
}

TEST_CASE("max-implementations") {
  const auto g = delta0_gadget();
  CHECK(g.M == 2);
  CHECK(g.target == delta(0));
  const auto h = neq_gadget();
  CHECK(h.M == 2);
  CHECK(h.y_vars.size() == 2);

  CspInstance bad;
  bad.add_var("x");
  bad.add_var("y");
  bad.add("IMP", imp(), {"x", "y"});
  CHECK_THROWS_AS(make_max_implementation(bad, {"x"}, "delta1", delta(1)), VerificationError);

  const auto flat = max_implementation_from(parse_formula("(mex (y) (and (atom IMP x y)))"), kLib, "delta0");
  CHECK(flat.target == delta(0));
}

TEST_CASE("gadget copies") {
  CHECK(gadget_copies(1, 2, 2, 0.1) == 5);
  CHECK(gadget_copies(3, 2, 1, 0.1) == 1);
  CHECK(gadget_copies(2, 2, 2, 0.5) == 4);  // bound is exactly 3, m must exceed it
  CHECK_THROWS_AS(gadget_copies(1, 2, 2, 0.0), InputError);
  CHECK_THROWS_AS(gadget_copies(1, 2, 2, 1.0), InputError);
  for (int v = 1; v <= 6; ++v)
    for (int M = 2; M <= 9; ++M)
      for (double eps : {0.5, 0.1, 0.01}) {
        const int m = gadget_copies(v, 2, M, eps);
        const double bound = (v * std::log(2.0) - std::log(eps)) / (std::log(double(M)) - std::log(double(M - 1)));
        CHECK(double(m) > bound - 1e-9);
        CHECK(double(m - 1) <= bound + 1e-9);
      }
}

TEST_CASE("reduction for delta0 through IMP") {
  const auto g = delta0_gadget();
  CspInstance p1;
  p1.add_var("v");
  p1.add("delta0", delta(0), {"v"});
  const auto gr = ap_gadget(p1, g, 0.1);
  CHECK(gr.m == 5);
  CHECK(gr.ell == 1);
  CHECK(gr.p2.constraints.size() == 5);
  for (const auto& c : gr.p2.constraints) CHECK(c.name == "IMP");
  const auto rep = verify_reduction(p1, g, 0.1);
  CHECK(rep.count1 == 1);
  CHECK(rep.count2 == 33);
  CHECK(rep.raw_estimate == mpq_class(33, 32));
  CHECK(rep.relative_error == mpq_class(1, 32));
  CHECK(rep.pass());

  CspInstance unsat = p1;
  unsat.add("delta1", delta(1), {"v"});
  const auto ru = verify_reduction(unsat, g, 0.1);
  CHECK(ru.count1 == 0);
  CHECK(ru.count2 == 1);
  CHECK(ru.raw_estimate == mpq_class(1, 32));
  CHECK(ru.estimate == 0);
  CHECK(ru.unsat_raw_nonzero);
  CHECK(ru.pass());

  CspInstance none;
  none.add_var("v");
  none.add_var("w");
  none.add("OR", or_rel(2), {"v", "w"});
  const auto g0 = ap_gadget(none, g, 0.1);
  CHECK(g0.ell == 0);
  CHECK(format_instance(g0.p2) == format_instance(none));
  CHECK(verify_reduction(none, g, 0.1).count2 == 3);

  CspInstance wrong;
  wrong.add_var("a");
  wrong.add_var("b");
  wrong.add("delta0", neq(), {"a", "b"});
  CHECK_THROWS_AS(ap_gadget(wrong, g, 0.1), InputError);
  CHECK_THROWS_AS(ap_gadget(p1, g, 1.5), InputError);
}

TEST_CASE("reduction for NEQ through OR and IMP") {
  const auto g = neq_gadget();
  CspInstance p1;
  p1.add_var("a");
  p1.add_var("b");
  p1.add("NEQ", neq(), {"a", "b"});
  const auto rep = verify_reduction(p1, g, 0.1);
  CHECK(rep.count1 == 2);
  CHECK(rep.sandwich);
  CHECK(rep.extensions_checked);
  CHECK(rep.pass());
}

TEST_CASE("reduction sandwich on random instances") {
  std::mt19937_64 rng(11);
  const auto g1 = delta0_gadget();
  const auto g2 = neq_gadget();
  for (int it = 0; it < 60; ++it) {
    const bool use_neq = rng() % 2;
    const auto& g = use_neq ? g2 : g1;
    CspInstance p;
    const int nv = 1 + static_cast<int>(rng() % (use_neq ? 4 : 5));
    for (int i = 0; i < nv; ++i) p.add_var("v" + std::to_string(i));
    const int nc = static_cast<int>(rng() % 4);
    auto pick = [&] { return "v" + std::to_string(rng() % static_cast<unsigned>(nv)); };
    for (int c = 0; c < nc; ++c) {
      switch (rng() % 3) {
        case 0: p.add("IMP", imp(), {pick(), pick()}); break;
        case 1: p.add("OR", or_rel(2), {pick(), pick()}); break;
        default:
          if (use_neq) p.add("NEQ", neq(), {pick(), pick()});
          else p.add("delta0", delta(0), {pick()});
      }
    }
    const double eps = rng() % 2 ? 0.5 : 0.1;
    const auto rep = verify_reduction(p, g, eps);
    REQUIRE(rep.sandwich);
    REQUIRE(rep.within_eps);
    REQUIRE(rep.extensions_ok);
    if (rep.count1 == 0) REQUIRE(rep.estimate == 0);
  }
}
