#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "maxclone/closure.hpp"

namespace maxclone {

namespace {

std::shared_ptr<DerivNode> node(DerivNode::Op op) {
  auto n = std::make_shared<DerivNode>();
  n->op = op;
  return n;
}

std::string list(const std::vector<int>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(v[i]);
  }
  return s + ")";
}

std::string sexpr(const DerivNode& n, bool root) {
  if (!root && n.entry >= 0) return "#" + std::to_string(n.entry);
  using Op = DerivNode::Op;
  switch (n.op) {
    case Op::Seed:
      return "(seed " + n.name + ")";
    case Op::Subst:
      return "(subst " + list(n.p1) + " " + std::to_string(n.m) + " " + sexpr(*n.kids[0], false) + ")";
    case Op::Conj:
      return "(conj " + std::to_string(n.m) + " " + list(n.p1) + " " + sexpr(*n.kids[0], false) + " " +
             list(n.p2) + " " + sexpr(*n.kids[1], false) + ")";
    case Op::Exists:
      return "(exists " + list(n.p1) + " " + sexpr(*n.kids[0], false) + ")";
    case Op::ExistsK:
      return "(exists_k " + std::to_string(n.k) + " " + list(n.p1) + " " + sexpr(*n.kids[0], false) + ")";
    case Op::Max:
      return "(max " + list(n.p1) + " " + sexpr(*n.kids[0], false) + ")";
  }
  return "?";
}

void collect_entries(const DerivNode& n, bool root, std::map<int, const DerivNode*>& out) {
  if (!root && n.entry >= 0) {
    if (out.count(n.entry)) return;
    out[n.entry] = &n;
    collect_entries(n, true, out);
    return;
  }
  for (const auto& k : n.kids) collect_entries(*k, false, out);
}

Relation replay_memo(const DerivNode& n, std::unordered_map<const DerivNode*, Relation>& memo) {
  if (auto it = memo.find(&n); it != memo.end()) return it->second;
  using Op = DerivNode::Op;
  auto kid = [&](std::size_t i) { return replay_memo(*n.kids.at(i), memo); };
  Relation out = [&]() -> Relation {
    switch (n.op) {
      case Op::Seed:
        return *n.seed;
      case Op::Subst:
        return substitute(kid(0), n.p1, n.m);
      case Op::Conj:
        return conjoin(kid(0), n.p1, kid(1), n.p2, n.m);
      case Op::Exists:
        return exists(kid(0), n.p1);
      case Op::ExistsK:
        return exists_k(kid(0), n.p1.at(0), n.k);
      case Op::Max:
        return max_quantify(kid(0), n.p1);
    }
    throw VerificationError("corrupt derivation node");
  }();
  memo.emplace(&n, out);
  return out;
}

}  // namespace

Derivation seed_node(std::string name, const Relation& r) {
  auto n = node(DerivNode::Op::Seed);
  n->name = std::move(name);
  n->seed = std::make_shared<const Relation>(r);
  return n;
}

Derivation subst_node(Derivation x, std::vector<int> sigma, int m) {
  auto n = node(DerivNode::Op::Subst);
  n->p1 = std::move(sigma);
  n->m = m;
  n->kids = {std::move(x)};
  return n;
}

Derivation conj_node(Derivation x, std::vector<int> sx, Derivation y, std::vector<int> sy, int m) {
  auto n = node(DerivNode::Op::Conj);
  n->p1 = std::move(sx);
  n->p2 = std::move(sy);
  n->m = m;
  n->kids = {std::move(x), std::move(y)};
  return n;
}

Derivation exists_node(Derivation x, std::vector<int> j) {
  auto n = node(DerivNode::Op::Exists);
  n->p1 = std::move(j);
  n->kids = {std::move(x)};
  return n;
}

Derivation exists_k_node(Derivation x, int pos, int k) {
  auto n = node(DerivNode::Op::ExistsK);
  n->p1 = {pos};
  n->k = k;
  n->kids = {std::move(x)};
  return n;
}

Derivation max_node(Derivation x, std::vector<int> j) {
  auto n = node(DerivNode::Op::Max);
  n->p1 = std::move(j);
  n->kids = {std::move(x)};
  return n;
}

Relation replay(const Derivation& d) {
  std::unordered_map<const DerivNode*, Relation> memo;
  return replay_memo(*d, memo);
}

std::string to_sexpr(const Derivation& d) { return sexpr(*d, true); }

std::vector<std::string> derivation_lines(const Derivation& d) {
  std::map<int, const DerivNode*> refs;
  collect_entries(*d, true, refs);
  std::vector<std::string> out;
  for (const auto& [id, n] : refs) out.push_back("#" + std::to_string(id) + " = " + sexpr(*n, true));
  out.push_back(sexpr(*d, true));
  return out;
}

}  // namespace maxclone
