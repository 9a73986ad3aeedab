#include "maxclone/closure.hpp"

namespace maxclone {

namespace {

std::vector<PartialFunction> surjective_polymorphisms(std::span<const Relation> gamma, int d, int max_arity) {
  std::vector<PartialFunction> out;
  for (const auto& f : pol(gamma, d, max_arity).all())
    if (k_subset_surjective(f, d)) out.push_back(f);
  return out;
}

std::optional<PartialFunction> obstruction(const std::vector<PartialFunction>& fs, const Relation& r) {
  for (const auto& f : fs)
    if (!preserves(f, r)) return f;
  return std::nullopt;
}

}  // namespace

// On a two-element domain a single-variable max quantifier acts as either
// exists or forall, and both preserve invariance under surjective total
// functions; a surjective polymorphism of gamma that breaks a block-derived
// relation therefore keeps that relation out of the single-variable closure.
SeparationReport max_vs_single_max_witness(std::span<const Relation> gamma, const ClosureSignature& caps,
                                       std::span<const Relation> candidates) {
  SeparationReport rep;
  if (gamma.empty()) {
    rep.message = "no witness found within caps: empty generating set";
    return rep;
  }
  const int d = gamma.front().domain();
  if (d != 2) throw InputError("separation witness is defined for d = 2");
  ClosureSignature sig = caps;
  sig.allow_max_block = true;
  sig.allow_max_single = false;
  sig.allow_exists = false;
  sig.exists_k.clear();
  const auto surj = surjective_polymorphisms(gamma, d, 2);

  auto finish = [&](const Relation& r, Derivation deriv, PartialFunction f) {
    if (replay(deriv) != r) throw VerificationError("separation derivation does not replay");
    rep.found = true;
    rep.relation = r;
    rep.derivation = std::move(deriv);
    rep.obstruction = std::move(f);
    rep.message = "relation " + r.to_string() + " is in the bounded max closure and violates a surjective polymorphism";
    return rep;
  };

  for (const auto& r : candidates) {
    auto f = obstruction(surj, r);
    if (!f) continue;
    if (auto w = member(r, gamma, sig)) return finish(r, *w, *f);
  }
  if (!candidates.empty()) {
    rep.message = "no witness found within caps among the candidates";
    return rep;
  }
  auto res = close(gamma, sig, d, [&](const Relation& c) { return obstruction(surj, c).has_value(); });
  if (res.status == ClosureStatus::Found) {
    const auto& e = res.entries.back();
    return finish(e.core, e.deriv, *obstruction(surj, e.core));
  }
  rep.message = "no witness found within caps (" + to_string(res.status) + ")";
  return rep;
}

}  // namespace maxclone
