#include "maxclone/galois.hpp"

#include <sstream>

namespace maxclone {

GaloisReport galois_check(std::span<const Relation> gamma, int d, const std::set<int>& k_set, int rel_arity,
                          int fn_arity, std::span<const Relation> candidates, int intermediate_cap,
                          std::size_t budget) {
  if (rel_arity < 1 || fn_arity < 1) throw InputError("galois_check: arity caps must be positive");
  GaloisReport rep;
  rep.d = d;
  rep.k_set = k_set;
  rep.rel_arity = rel_arity;
  rep.fn_arity = fn_arity;
  int b = intermediate_cap > 0 ? intermediate_cap : rel_arity + 2;
  for (const auto& g : gamma) b = std::max(b, g.arity());
  auto sig = ClosureSignature::k_exists(d, k_set).caps(rel_arity, b);
  sig.frontier_budget = budget;
  const auto res = close(gamma, sig, d);
  rep.status = res.status;
  for (auto& [r, deriv] : res.relations(rel_arity)) rep.closure.push_back(r);

  const std::vector<int> ks(k_set.begin(), k_set.end());
  const auto fs = mk_ppol(gamma, ks, d, fn_arity).all();
  rep.functions = fs.size();
  for (const auto& r : rep.closure)
    for (const auto& f : fs)
      if (!preserves(f, r)) rep.violations.emplace_back(r, f);

  for (const auto& c : candidates) {
    if (c.domain() != d) throw InputError("galois_check: candidate domain differs");
    GaloisCandidate gc{c};
    gc.in_inv = std::all_of(fs.begin(), fs.end(), [&](const PartialFunction& f) { return preserves(f, c); });
    gc.in_closure = c.arity() <= rel_arity ? res.contains(c) : member(c, gamma, sig).has_value();
    rep.candidates.push_back(std::move(gc));
  }
  return rep;
}

std::string GaloisReport::to_text() const {
  std::ostringstream o;
  o << "domain: " << d << "\nK:";
  for (int k : k_set) o << ' ' << k;
  o << "\nrelation arity cap: " << rel_arity << "\nfunction arity cap: " << fn_arity
    << "\nclosure status: " << to_string(status) << "\nclosure relations: " << closure.size()
    << "\nfunctions: " << functions << "\npreservation: " << (sound() ? "PASS" : "FAIL") << '\n';
  for (const auto& [r, f] : violations) {
    o << "violation: " << r.to_string() << " not preserved by table";
    for (int v : f.table()) o << ' ' << (v < 0 ? std::string("-") : std::to_string(v));
    o << '\n';
  }
  for (const auto& c : candidates)
    o << "candidate " << c.rel.to_string() << ": inv=" << c.in_inv << " closure=" << c.in_closure
      << (c.agree() ? " agree" : " differ (bounded closure may be incomplete)") << '\n';
  return o.str();
}

}  // namespace maxclone
