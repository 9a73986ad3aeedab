#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "maxclone/counting.hpp"
#include "oracle.hpp"

using namespace maxclone;

namespace {

// Independent reference: enumerate every assignment through the tuple-set oracle.
long naive(const CspInstance& p) {
  long n = 0;
  for (const auto& a : oracle::all_tuples(p.d, static_cast<int>(p.vars.size()))) {
    bool ok = true;
    for (const auto& c : p.constraints) {
      Tuple t;
      for (int v : c.scope) t.push_back(a[static_cast<std::size_t>(v)]);
      if (!oracle::as_set(c.rel).count(t)) {
        ok = false;
        break;
      }
    }
    n += ok;
  }
  return n;
}

CspInstance random_instance(std::mt19937_64& rng, int d, int nv) {
  CspInstance p;
  p.d = d;
  for (int i = 0; i < nv; ++i) p.add_var("v" + std::to_string(i));
  const int nc = static_cast<int>(rng() % 7);
  for (int c = 0; c < nc; ++c) {
    const int ar = 1 + static_cast<int>(rng() % 3);
    Constraint con{{}, "R" + std::to_string(c), oracle::random_relation(rng, d, ar, 0.6)};
    for (int i = 0; i < ar; ++i) con.scope.push_back(static_cast<int>(rng() % static_cast<unsigned>(nv)));
    p.constraints.push_back(std::move(con));
  }
  return p;
}

}  // namespace

TEST_CASE("count examples") {
  CspInstance p;
  p.add_var("v");
  p.add("delta0", delta(0), {"v"});
  CHECK(count(p) == 1);

  CspInstance q;
  q.add_var("x");
  q.add_var("y");
  q.add("IMP", imp(), {"x", "y"});
  CHECK(count(q) == 3);
  q.add("OR", or_rel(2), {"x", "y"});
  CHECK(count(q) == 2);  // IMP and OR: 01, 11

  CspInstance r;
  r.add_var("x");
  r.add_var("y");
  r.add("OR", or_rel(2), {"x", "y"});
  r.add("NAND", nand_rel(2), {"x", "y"});
  CHECK(count(r) == 2);

  CspInstance free;
  for (int i = 0; i < 40; ++i) free.add_var("f" + std::to_string(i));
  CHECK(count(free) == mpz_class("1099511627776"));
}

TEST_CASE("count agrees with full enumeration on random instances") {
  std::mt19937_64 rng(2024);
  for (int it = 0; it < 500; ++it) {
    const int d = 2 + static_cast<int>(rng() % 2);
    const int nv = 1 + static_cast<int>(rng() % (d == 2 ? 12 : 8));
    const auto p = random_instance(rng, d, nv);
    const long want = naive(p);
    REQUIRE(count(p) == want);
    REQUIRE(count_naive(p) == want);
  }
}

TEST_CASE("count is invariant under constraint reordering and variable renaming") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 200; ++it) {
    const auto p = random_instance(rng, 2, 1 + static_cast<int>(rng() % 9));
    auto q = p;
    std::shuffle(q.constraints.begin(), q.constraints.end(), rng);
    std::vector<int> perm(p.vars.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CspInstance r;
    r.d = p.d;
    r.vars.resize(p.vars.size());
    for (std::size_t i = 0; i < perm.size(); ++i) r.vars[static_cast<std::size_t>(perm[i])] = "w" + std::to_string(i);
    for (const auto& c : q.constraints) {
      Constraint nc{{}, c.name, c.rel};
      for (int v : c.scope) nc.scope.push_back(perm[static_cast<std::size_t>(v)]);
      r.constraints.push_back(nc);
    }
    REQUIRE(count(q) == count(p));
    REQUIRE(count(r) == count(p));
  }
}

TEST_CASE("independent gadget copies count in product form") {
  // 40 two-variable blocks hanging off one variable
  CspInstance p;
  p.add_var("x");
  for (int i = 0; i < 40; ++i) {
    const auto a = "a" + std::to_string(i), b = "b" + std::to_string(i);
    p.add_var(a);
    p.add_var(b);
    p.add("IMP", imp(), {"x", a});
    p.add("OR", or_rel(2), {a, b});
  }
  // x = 0: each block has 3 solutions; x = 1: a = 1, b free
  CHECK(count(p, 100000) == [] { mpz_class a, b; mpz_ui_pow_ui(a.get_mpz_t(), 3, 40); mpz_ui_pow_ui(b.get_mpz_t(), 2, 40); return a + b; }());
}

TEST_CASE("count_extensions sums to count") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 100; ++it) {
    const auto p = random_instance(rng, 2, 2 + static_cast<int>(rng() % 6));
    mpz_class total = 0;
    for (const auto& a : oracle::all_tuples(2, 2)) total += count_extensions(p, a);
    REQUIRE(total == count(p));
  }
}

TEST_CASE("node limit raises a resource error") {
  // a clique of full binary constraints: one component, no pruning
  CspInstance p;
  for (int i = 0; i < 16; ++i) p.add_var("v" + std::to_string(i));
  for (int i = 0; i < 16; ++i)
    for (int j = i + 1; j < 16; ++j) p.add("T", Relation::full(2, 2), {p.vars[i], p.vars[j]});
  CHECK_THROWS_AS(count(p, 1000), ResourceError);
  CHECK(count(p) == 65536);
}

TEST_CASE("instance files") {
  RelationLibrary lib(2);
  std::istringstream in("# IMP chain\ndomain 2\nvar x y\nvar z\ncon IMP x y\ncon IMP y z\nend\n");
  const auto p = parse_instance(in, lib, "chain.csp");
  CHECK(p.vars.size() == 3);
  CHECK(count(p) == 4);
  std::istringstream again(format_instance(p));
  CHECK(format_instance(parse_instance(again, lib)) == format_instance(p));

  std::istringstream bad("domain 2\nvar x\ncon IMP x\nend\n");
  try {
    parse_instance(bad, lib, "bad.csp");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).rfind("bad.csp:3:", 0) == 0);
  }
  std::istringstream unknown("domain 2\nvar x\ncon FOO x\nend\n");
  CHECK_THROWS_AS(parse_instance(unknown, lib), InputError);
  std::istringstream noend("domain 2\nvar x\n");
  CHECK_THROWS_AS(parse_instance(noend, lib), InputError);
  std::istringstream dup("domain 2\nvar x x\nend\n");
  CHECK_THROWS_AS(parse_instance(dup, lib), InputError);
}

TEST_CASE("relation and function files") {
  std::istringstream in("domain 2\n# comment\nrelation Q 2\n01\n10\nend\nrelation T 1\nend\n");
  const auto lib = parse_relation_file(in, "q.rel");
  CHECK(lib.resolve("Q") == neq());
  CHECK(lib.resolve("T") == Relation(2, 1));
  CHECK(lib.resolve("OR3") == or_rel(3));
  CHECK(lib.resolve("Compl_3_0") == compl_rel(3, 0));
  CHECK(lib.resolve("EQ") == eq_rel(2));
  std::istringstream round(format_relation_file(lib));
  CHECK(format_relation_file(parse_relation_file(round)) == format_relation_file(lib));

  std::istringstream bad_digit("domain 2\nrelation Q 2\n02\nend\n");
  try {
    parse_relation_file(bad_digit, "q.rel");
    FAIL("expected an input error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).rfind("q.rel:3:", 0) == 0);
  }
  std::istringstream short_tuple("domain 2\nrelation Q 2\n0\nend\n");
  CHECK_THROWS_AS(parse_relation_file(short_tuple), InputError);
  std::istringstream no_end("domain 2\nrelation Q 1\n0\n");
  CHECK_THROWS_AS(parse_relation_file(no_end), InputError);
  CHECK_THROWS_AS(lib.resolve("NOPE"), InputError);

  std::istringstream fin("domain 3\nfunction f 1\n0\n-\n2\nend\n");
  const auto ff = parse_function_file(fin);
  REQUIRE(ff.functions.size() == 1);
  CHECK(ff.functions[0].second.table() == std::vector<int>{0, PartialFunction::kUndef, 2});
  std::ostringstream fout;
  write_function_block(fout, "f", ff.functions[0].second);
  CHECK(fout.str() == "function f 1\n0\n-\n2\nend\n");
  std::istringstream fshort("function f 1\n0\nend\n");
  CHECK_THROWS_AS(parse_function_file(fshort), InputError);
}
