#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "maxclone/boolean.hpp"
#include "maxclone/closure.hpp"
#include "maxclone/counting.hpp"
#include "maxclone/formula.hpp"
#include "maxclone/galois.hpp"
#include "maxclone/io.hpp"

using namespace maxclone;

namespace {

constexpr int kOk = 0, kVerifyFail = 1, kInput = 2, kResource = 3;

// Relations named in a relation file, followed by catalog names from --rel.
struct RelationArgs {
  std::string file;
  std::vector<std::string> names;
  int domain = 2;

  void attach(CLI::App* app, bool positional = true) {
    if (positional)
      app->add_option("rels", file, "relation file");
    else
      app->add_option("--rels", file, "relation file");
    app->add_option("--rel", names, "catalog relation (repeatable)");
    app->add_option("--domain", domain, "domain size when no file is given")->check(CLI::Range(2, 16));
  }

  RelationLibrary library() const {
    RelationLibrary lib = file.empty() ? RelationLibrary(domain) : read_relation_file(file);
    for (const auto& n : names)
      if (!lib.defines(n)) lib.add(n, lib.resolve(n));
    return lib;
  }
};

std::vector<Relation> relations_of(const RelationLibrary& lib) {
  std::vector<Relation> out;
  for (const auto& [n, r] : lib.entries()) out.push_back(r);
  return out;
}

std::string seed_line(const RelationLibrary& lib) {
  std::string s = "seeds:";
  int i = 0;
  for (const auto& [n, r] : lib.entries()) s += " G" + std::to_string(i++) + "=" + n;
  return s;
}

void print_derivation(std::ostream& out, const Derivation& d) {
  for (const auto& line : derivation_lines(d)) out << "derivation: " << line << '\n';
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("not an integer list: '" + s + "'");
    }
  }
  if (out.empty()) throw InputError("empty integer list");
  return out;
}

ClosureSignature signature_from(const std::string& spec, int d) {
  if (spec == "partial") return ClosureSignature::partial_coclone(d);
  if (spec == "coclone") return ClosureSignature::coclone(d);
  if (spec == "counting") return ClosureSignature::counting(d);
  if (spec == "maxsingle") return ClosureSignature::max_single(d);
  if (spec == "maxblock") return ClosureSignature::max_block(d);
  if (spec.rfind("kexists=", 0) == 0) {
    const auto ks = parse_int_list(spec.substr(8));
    return ClosureSignature::k_exists(d, std::set<int>(ks.begin(), ks.end()));
  }
  throw InputError("unknown signature '" + spec + "'");
}

std::string formula_text(const std::string& arg) {
  if (!arg.empty() && arg.front() == '(') return arg;
  return slurp(arg);
}

// ---- verbs ---------------------------------------------------------------------

struct RelEval {
  std::string formula;
  std::string vars;
  std::string flatten;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto lib = rels.library();
    const Formula f = parse_formula(formula_text(formula));
    std::vector<std::string> order;
    if (vars.empty()) {
      order = free_variables(f);
    } else {
      std::stringstream in(vars);
      for (std::string v; std::getline(in, v, ',');) order.push_back(v);
    }
    out << "vars:";
    for (const auto& v : order) out << ' ' << v;
    out << '\n';
    write_relation_block(out, "RESULT", evaluate(f, order, lib));
    if (flatten == "max") {
      const auto res = flatten_max(f, lib);
      out << "flattened: " << to_string(res.formula()) << '\n';
      for (const auto& s : res.stats)
        out << "collapse: M=" << s.M << " N=" << s.N << " L=" << s.L << " c=" << s.c
            << (s.strict_adjusted ? " (strictness adjusted)" : "") << '\n';
      out << "verified: " << (res.verified ? "yes" : "skipped (too large)") << '\n';
    } else if (flatten == "counting") {
      const auto res = flatten_counting(f, lib);
      out << "flattened: " << to_string(res.prenex) << '\n';
      for (const auto& [a, b] : res.renamed) out << "renamed: " << a << " -> " << b << '\n';
      out << "verified: " << (res.verified ? "yes" : "skipped (too large)") << '\n';
    }
    return kOk;
  }
};

struct Close {
  std::string sig = "maxblock";
  int arity = 3;
  int intermediate = 0;
  std::size_t budget = 200000;
  std::uint64_t work = 0;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto lib = rels.library();
    const auto gamma = relations_of(lib);
    auto s = signature_from(sig, lib.domain());
    s.caps(arity, intermediate > 0 ? intermediate : arity + 2);
    s.frontier_budget = budget;
    s.work_budget = work;
    s.validate();
    const auto res = close(gamma, s, lib.domain());
    const auto rs = res.relations(arity);
    out << "signature: " << sig << '\n'
        << "domain: " << lib.domain() << '\n'
        << "result arity cap: " << s.result_arity_cap << '\n'
        << "intermediate arity cap: " << s.intermediate_arity_cap << '\n'
        << "status: " << to_string(res.status) << '\n'
        << "rounds: " << res.rounds << '\n'
        << "cores: " << res.entries.size() << '\n'
        << "relations: " << rs.size() << '\n'
        << seed_line(lib) << '\n';
    int i = 1;
    for (const auto& [r, d] : rs) {
      write_relation_block(out, "C" + std::to_string(i++), r);
      print_derivation(out, d);
    }
    return kOk;
  }
};

struct Classify {
  bool derive = false;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto lib = rels.library();
    const auto gamma = relations_of(lib);
    const auto c = classify_max_coclone(gamma, derive);
    out << "label: " << c.label.name() << '\n'
        << "class: " << to_string(c.ap) << '\n'
        << "branch: " << c.branch << '\n';
    // the first notes are per relation, in input order
    std::size_t i = 0;
    for (const auto& [name, r] : lib.entries()) {
      const auto& note = c.notes[i++];
      out << "evidence " << name << ": " << note.substr(note.find(": ") + 2) << '\n';
    }
    for (; i < c.notes.size(); ++i) out << "note: " << c.notes[i] << '\n';
    if (c.witness) {
      out << seed_line(lib) << '\n';
      write_relation_block(out, "WITNESS", *c.witness);
      print_derivation(out, *c.witness_derivation);
    } else if (derive) {
      out << "witness: none within caps\n";
    }
    return kOk;
  }
};

struct Count {
  std::string instance;
  std::uint64_t node_limit = kDefaultNodeLimit;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto p = read_instance(instance, rels.library());
    out << count(p, node_limit).get_str() << '\n';
    return kOk;
  }
};

struct Reduce {
  std::string instance, target, gadget, emit;
  double eps = 0.1;
  bool verify = false;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto lib = rels.library();
    const auto p1 = read_instance(instance, lib);
    const Formula gf = parse_formula(slurp(gadget));
    const auto g = max_implementation_from(gf, lib, target, lib.resolve(target));
    const auto gr = ap_gadget(p1, g, eps);
    out << "target: " << target << '\n'
        << "gadget: " << to_string(gf) << '\n'
        << "M: " << gr.M.get_str() << '\n'
        << "m: " << gr.m << '\n'
        << "R-constraints: " << gr.ell << '\n'
        << "P2 variables: " << gr.p2.vars.size() << '\n'
        << "P2 constraints: " << gr.p2.constraints.size() << '\n';
    if (!emit.empty()) {
      std::ofstream f(emit);
      if (!f) throw InputError("cannot write " + emit);
      f << format_instance(gr.p2);
    }
    if (!verify) return kOk;
    const auto rep = verify_reduction(p1, g, eps);
    out << rep.to_text();
    return rep.pass() ? kOk : kVerifyFail;
  }
};

struct Galois {
  std::string k_list = "1";
  int rel_arity = 2, fn_arity = 2, intermediate = 0;
  std::string candidates;
  RelationArgs rels;

  int run(std::ostream& out) const {
    const auto lib = rels.library();
    const auto gamma = relations_of(lib);
    std::vector<Relation> cand;
    if (!candidates.empty()) cand = relations_of(read_relation_file(candidates));
    const auto ks = parse_int_list(k_list);
    const auto rep = galois_check(gamma, lib.domain(), std::set<int>(ks.begin(), ks.end()), rel_arity, fn_arity, cand,
                                  intermediate);
    out << rep.to_text();
    int i = 1;
    for (const auto& r : rep.closure) write_relation_block(out, "M" + std::to_string(i++), r);
    return rep.sound() ? kOk : kVerifyFail;
  }
};

struct Lattice {
  bool dot = false;
  bool no_spot = false;
  LatticeOptions opt;

  int run(std::ostream& out, int jobs) {
    opt.spot_checks = !no_spot;
    opt.jobs = jobs;
    const auto rep = verify_lattice(opt);
    out << (dot ? rep.to_dot() : rep.to_text());
    return rep.pass() ? kOk : kVerifyFail;
  }
};

struct In2 {
  int k = 2;
  std::string variant = "literal";
  std::uint64_t node_limit = kDefaultNodeLimit;

  int run(std::ostream& out) const {
    const auto v = variant == "pairwise" ? In2Variant::PairWise : In2Variant::Literal;
    const auto rep = in2_witness(k, v, node_limit);
    out << rep.to_text();
    return rep.pass() ? kOk : kVerifyFail;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation algebra workbench for counting and max quantifiers"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker threads where a verb supports them")->check(CLI::Range(1, 256));

  RelEval rel_eval;
  auto* c_eval = app.add_subcommand("rel-eval", "evaluate a formula");
  c_eval->add_option("formula", rel_eval.formula, "s-expression, or a file holding one")->required();
  c_eval->add_option("--vars", rel_eval.vars, "comma-separated coordinate order");
  c_eval->add_option("--flatten", rel_eval.flatten, "also flatten: max or counting")
      ->check(CLI::IsMember({"max", "counting"}));
  rel_eval.rels.attach(c_eval, false);

  Close close_cmd;
  auto* c_close = app.add_subcommand("close", "bounded closure with derivations");
  c_close->add_option("--sig", close_cmd.sig, "partial|coclone|kexists=K|counting|maxsingle|maxblock");
  c_close->add_option("--arity", close_cmd.arity, "result arity cap")->check(CLI::Range(1, 24));
  c_close->add_option("--intermediate", close_cmd.intermediate, "intermediate arity cap (default arity+2)");
  c_close->add_option("--budget", close_cmd.budget, "frontier budget");
  c_close->add_option("--work", close_cmd.work, "operator applications before giving up (0 = unlimited)");
  close_cmd.rels.attach(c_close);

  Classify classify;
  auto* c_class = app.add_subcommand("classify", "max-co-clone label and approximation class");
  c_class->add_flag("--derive", classify.derive, "search a bounded derivation of a pinning relation");
  classify.rels.attach(c_class);

  Count count_cmd;
  auto* c_count = app.add_subcommand("count", "exact number of solutions");
  c_count->add_option("instance", count_cmd.instance, "instance file")->required();
  c_count->add_option("--node-limit", count_cmd.node_limit, "search nodes before giving up");
  count_cmd.rels.attach(c_count, false);

  Reduce reduce;
  auto* c_red = app.add_subcommand("reduce", "build the reduction instance from a max-implementation");
  c_red->add_option("instance", reduce.instance, "instance over gamma and the target")->required();
  c_red->add_option("--target", reduce.target, "name of the replaced relation")->required();
  c_red->add_option("--gadget", reduce.gadget, "file with (mex (y...) (and atoms...))")->required();
  c_red->add_option("--eps", reduce.eps, "relative error bound in (0,1)");
  c_red->add_flag("--verify", reduce.verify, "count both instances and check the bounds");
  c_red->add_option("--emit", reduce.emit, "write the built instance to this file");
  reduce.rels.attach(c_red, false);

  Galois galois;
  auto* c_gal = app.add_subcommand("galois", "bounded closure against surjective partial polymorphisms");
  c_gal->add_option("--K", galois.k_list, "comma-separated thresholds");
  c_gal->add_option("--rel-arity", galois.rel_arity, "relation arity cap");
  c_gal->add_option("--fn-arity", galois.fn_arity, "function arity cap");
  c_gal->add_option("--intermediate", galois.intermediate, "closure intermediate cap (default rel-arity+2)");
  c_gal->add_option("--candidates", galois.candidates, "relation file of candidates to compare");
  galois.rels.attach(c_gal);

  Lattice lattice;
  auto* c_lat = app.add_subcommand("lattice", "verify the Hasse diagram of Boolean max-co-clones");
  c_lat->add_flag("--dot", lattice.dot, "emit DOT with per-edge status");
  c_lat->add_option("--kmax", lattice.opt.kmax, "chain cut")->check(CLI::Range(2, 8));
  c_lat->add_flag("--no-spot", lattice.no_spot, "skip closure spot checks");
  c_lat->add_option("--spot-intermediate", lattice.opt.spot_intermediate, "intermediate cap for spot checks");
  c_lat->add_option("--spot-work", lattice.opt.spot_work, "work budget per spot check");

  In2 in2;
  auto* c_in2 = app.add_subcommand("in2-witness", "Compl generation witness");
  c_in2->add_option("--k", in2.k, "half width")->check(CLI::Range(2, 3));
  c_in2->add_option("--variant", in2.variant, "literal or pairwise")->check(CLI::IsMember({"literal", "pairwise"}));
  c_in2->add_option("--node-limit", in2.node_limit, "search nodes before giving up");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    std::ostringstream out;
    int rc = kOk;
    if (*c_eval) rc = rel_eval.run(out);
    else if (*c_close) rc = close_cmd.run(out);
    else if (*c_class) rc = classify.run(out);
    else if (*c_count) rc = count_cmd.run(out);
    else if (*c_red) rc = reduce.run(out);
    else if (*c_gal) rc = galois.run(out);
    else if (*c_lat) rc = lattice.run(out, jobs);
    else if (*c_in2) rc = in2.run(out);
    std::cout << out.str();
    return rc;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kInput;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << '\n';
    return kVerifyFail;
  }
}
