#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "maxclone/formula.hpp"

namespace maxclone {

namespace {

mpz_class power(const mpz_class& b, unsigned long e) {
  mpz_class r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

// Same instance with the listed variables moved to the front (in that order).
CspInstance front_load(const CspInstance& inst, const std::vector<int>& first) {
  std::vector<int> perm(first);
  for (int v = 0; v < static_cast<int>(inst.vars.size()); ++v)
    if (std::find(first.begin(), first.end(), v) == first.end()) perm.push_back(v);
  std::vector<int> where(inst.vars.size());
  CspInstance out;
  out.d = inst.d;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    out.vars.push_back(inst.vars[static_cast<std::size_t>(perm[i])]);
    where[static_cast<std::size_t>(perm[i])] = static_cast<int>(i);
  }
  for (const auto& c : inst.constraints) {
    Constraint nc{{}, c.name, c.rel};
    for (int v : c.scope) nc.scope.push_back(where[static_cast<std::size_t>(v)]);
    out.constraints.push_back(std::move(nc));
  }
  return out;
}

}  // namespace

MaxImplementation make_max_implementation(const CspInstance& inst, const std::vector<std::string>& x_names,
                                          const std::string& target_name, const std::optional<Relation>& expected) {
  inst.validate();
  std::vector<int> xs;
  for (const auto& x : x_names) {
    const int i = inst.var_index(x);
    if (std::find(xs.begin(), xs.end(), i) != xs.end()) throw InputError("x variable '" + x + "' listed twice");
    xs.push_back(i);
  }
  MaxImplementation g;
  g.instance = front_load(inst, xs);
  g.target_name = target_name;
  const int n = static_cast<int>(xs.size());
  for (int i = 0; i < n; ++i) g.x_vars.push_back(i);
  for (int i = n; i < static_cast<int>(inst.vars.size()); ++i) g.y_vars.push_back(i);
  const std::uint64_t cells = cell_count(inst.d, n);
  std::vector<mpz_class> counts(cells);
  g.M = 0;
  for (std::uint64_t a = 0; a < cells; ++a) {
    counts[a] = count_extensions(g.instance, decode(a, inst.d, n));
    if (counts[a] > g.M) g.M = counts[a];
  }
  g.target = Relation(inst.d, n);
  for (std::uint64_t a = 0; a < cells; ++a)
    if (counts[a] == g.M && g.M > 0) g.target.set(a);
  if (g.M == 0) throw VerificationError("max-implementation has no solutions");
  if (expected && *expected != g.target)
    throw VerificationError("instance max-implements " + g.target.to_string() + ", not " + target_name + " = " +
                            expected->to_string());
  return g;
}

MaxImplementation max_implementation_from(const Formula& flat, const RelationLibrary& lib, const std::string& target_name,
                                          const std::optional<Relation>& expected) {
  const Formula* body = &flat;
  std::vector<std::string> ys;
  if (flat.kind == Formula::Kind::Max) {
    ys = flat.vars;
    body = &flat.kids[0];
  }
  std::vector<const Formula*> atoms;
  if (body->kind == Formula::Kind::Atom) {
    atoms.push_back(body);
  } else if (body->kind == Formula::Kind::And) {
    for (const auto& k : body->kids) {
      if (k.kind != Formula::Kind::Atom) throw InputError("gadget formula must be (mex (y...) (and atoms...))");
      atoms.push_back(&k);
    }
  } else {
    throw InputError("gadget formula must be (mex (y...) (and atoms...))");
  }
  CspInstance inst;
  inst.d = lib.domain();
  const auto xs = free_variables(flat);
  for (const auto& x : xs) inst.add_var(x);
  for (const auto& y : ys)
    if (std::find(inst.vars.begin(), inst.vars.end(), y) == inst.vars.end()) inst.add_var(y);
  for (const auto* a : atoms) inst.add(a->rel, lib.resolve(a->rel), a->vars);
  return make_max_implementation(inst, xs, target_name, expected);
}

int gadget_copies(int v1, int d, const mpz_class& M, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0,1)");
  if (M <= 1) return 1;
  const double m_d = M.get_d();
  // ln M - ln(M-1) without cancellation for large M
  const double gap = -std::log1p(-1.0 / m_d);
  const double bound = (v1 * std::log(static_cast<double>(d)) - std::log(eps)) / gap;
  return std::max(1, static_cast<int>(std::floor(bound)) + 1);
}

GadgetResult ap_gadget(const CspInstance& p1, const MaxImplementation& gadget, double eps) {
  p1.validate();
  if (gadget.instance.d != p1.d) throw InputError("gadget and instance domains differ");
  GadgetResult res;
  res.M = gadget.M;
  res.m = gadget_copies(static_cast<int>(p1.vars.size()), p1.d, gadget.M, eps);
  res.p2.d = p1.d;
  res.p2.vars = p1.vars;
  std::set<std::string> names(p1.vars.begin(), p1.vars.end());
  int ell = 0;
  std::vector<std::vector<int>> r_scopes;
  for (const auto& c : p1.constraints) {
    if (c.name == gadget.target_name) {
      if (static_cast<int>(c.scope.size()) != static_cast<int>(gadget.x_vars.size()))
        throw InputError("constraint " + c.name + " has arity " + std::to_string(c.scope.size()) +
                         ", gadget has " + std::to_string(gadget.x_vars.size()) + " x variables");
      if (c.rel != gadget.target) throw InputError("constraint " + c.name + " does not match the gadget target");
      r_scopes.push_back(c.scope);
      ++ell;
    } else {
      res.p2.constraints.push_back(c);
    }
  }
  res.ell = ell;
  for (int i = 0; i < ell; ++i)
    for (int j = 1; j <= res.m; ++j) {
      // gadget variable -> P2 variable
      std::vector<int> map(gadget.instance.vars.size());
      for (std::size_t t = 0; t < gadget.x_vars.size(); ++t)
        map[static_cast<std::size_t>(gadget.x_vars[t])] = r_scopes[static_cast<std::size_t>(i)][t];
      for (int y : gadget.y_vars) {
        std::string name = gadget.instance.vars[static_cast<std::size_t>(y)] + "_" + std::to_string(i + 1) + "_" +
                           std::to_string(j);
        while (names.count(name)) name += "_";
        names.insert(name);
        map[static_cast<std::size_t>(y)] = res.p2.add_var(name);
      }
      for (const auto& c : gadget.instance.constraints) {
        Constraint nc{{}, c.name, c.rel};
        for (int v : c.scope) nc.scope.push_back(map[static_cast<std::size_t>(v)]);
        res.p2.constraints.push_back(std::move(nc));
      }
    }
  return res;
}

ReductionReport verify_reduction(const CspInstance& p1, const MaxImplementation& gadget, double eps) {
  const GadgetResult g = ap_gadget(p1, gadget, eps);
  ReductionReport rep;
  rep.m = g.m;
  rep.M = g.M;
  rep.ell = g.ell;
  rep.count1 = count(p1);
  rep.count2 = count(g.p2);
  const auto lm = static_cast<unsigned long>(g.ell) * static_cast<unsigned long>(g.m);
  const mpz_class scale = power(g.M, lm);
  const int v1 = static_cast<int>(p1.vars.size());
  mpz_class assignments;
  mpz_ui_pow_ui(assignments.get_mpz_t(), static_cast<unsigned long>(p1.d), static_cast<unsigned long>(v1));
  const mpz_class stray = g.ell == 0 ? mpz_class(0)
                                     : power(g.M - 1, static_cast<unsigned long>(g.m)) *
                                           power(g.M, static_cast<unsigned long>(g.ell - 1) * static_cast<unsigned long>(g.m));
  rep.lower_bound = scale * rep.count1;
  rep.upper_bound = rep.lower_bound + assignments * stray;
  rep.sandwich = rep.lower_bound <= rep.count2 && rep.count2 <= rep.upper_bound;
  rep.raw_estimate = mpq_class(rep.count2, scale);
  rep.raw_estimate.canonicalize();
  rep.estimate = rep.raw_estimate < 1 ? mpq_class(0) : rep.raw_estimate;
  const mpq_class eps_q(eps);
  if (rep.count1 > 0) {
    rep.relative_error = abs(rep.raw_estimate - rep.count1) / rep.count1;
    rep.within_eps = rep.relative_error < eps_q;
  } else {
    rep.relative_error = 0;
    rep.within_eps = true;
    rep.unsat_raw_nonzero = rep.raw_estimate != 0;
  }
  // Joint enumeration over V1 (the first |V1| variables of P2).
  if (v1 <= 12 && mpz_class(assignments) <= 4096) {
    rep.extensions_checked = true;
    const std::uint64_t cells = cell_count(p1.d, v1);
    for (std::uint64_t a = 0; a < cells && rep.extensions_ok; ++a) {
      const auto t = decode(a, p1.d, v1);
      const bool sol = count_extensions(p1, t) == 1;
      const mpz_class ext = count_extensions(g.p2, t);
      rep.extensions_ok = sol ? ext == scale : ext <= stray;
    }
  }
  return rep;
}

std::string ReductionReport::to_text() const {
  std::ostringstream out;
  out << "#P1: " << count1.get_str() << '\n'
      << "#P2: " << count2.get_str() << '\n'
      << "R-constraints: " << ell << '\n'
      << "M: " << M.get_str() << '\n'
      << "m: " << m << '\n'
      << "raw estimate: " << raw_estimate.get_str() << '\n'
      << "estimate: " << estimate.get_str() << '\n'
      << "relative error: " << relative_error.get_str() << " (~" << relative_error.get_d() << ")\n"
      << "sandwich: " << (sandwich ? "PASS" : "FAIL") << " [" << lower_bound.get_str() << ", " << upper_bound.get_str()
      << "]\n"
      << "error below epsilon: " << (within_eps ? "PASS" : "FAIL") << '\n';
  if (extensions_checked) out << "extension counts: " << (extensions_ok ? "PASS" : "FAIL") << '\n';
  if (unsat_raw_nonzero) out << "note: P1 has no solution but the raw estimate is nonzero; output thresholded to 0\n";
  return out.str();
}

}  // namespace maxclone
