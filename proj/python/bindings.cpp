#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "maxclone/boolean.hpp"
#include "maxclone/closure.hpp"
#include "maxclone/counting.hpp"
#include "maxclone/formula.hpp"
#include "maxclone/io.hpp"

namespace py = pybind11;
using namespace maxclone;

namespace {

RelationLibrary library_of(int d, const std::map<std::string, Relation>& rels) {
  RelationLibrary lib(d);
  for (const auto& [name, r] : rels) lib.add(name, r);
  return lib;
}

py::int_ to_py(const mpz_class& z) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(z.get_str().c_str(), nullptr, 10));
}

ClosureSignature signature_named(const std::string& s, int d) {
  if (s == "partial") return ClosureSignature::partial_coclone(d);
  if (s == "coclone") return ClosureSignature::coclone(d);
  if (s == "counting") return ClosureSignature::counting(d);
  if (s == "maxsingle") return ClosureSignature::max_single(d);
  if (s == "maxblock") return ClosureSignature::max_block(d);
  throw InputError("unknown signature '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite relation algebra with counting and max quantifiers";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<VerificationError>(m, "VerificationError", PyExc_AssertionError);

  py::class_<Relation>(m, "Relation")
      .def(py::init<int, int>(), py::arg("d"), py::arg("n"))
      .def_static("from_tuples",
                  [](int d, int n, const std::vector<std::string>& ts) { return make_relation(d, n, ts); },
                  py::arg("d"), py::arg("n"), py::arg("tuples"))
      .def_static("full", &Relation::full)
      .def_property_readonly("domain", &Relation::domain)
      .def_property_readonly("arity", &Relation::arity)
      .def("tuples", &Relation::tuples)
      .def("__contains__", [](const Relation& r, const std::vector<int>& t) { return r.contains(t); })
      .def("__len__", [](const Relation& r) { return static_cast<std::size_t>(r.size()); })
      .def("__eq__", [](const Relation& a, const Relation& b) { return a == b; })
      .def("__hash__", &Relation::hash)
      .def("__str__", &Relation::to_string)
      .def("__repr__", [](const Relation& r) {
        return "Relation(d=" + std::to_string(r.domain()) + ", n=" + std::to_string(r.arity()) + ", {" +
               r.to_string() + "})";
      });

  m.def("catalog", &resolve_catalog_name, py::arg("name"), py::arg("d") = 2,
        "Named relation such as 'IMP', 'OR3', 'Compl_3_0', 'delta0'.");

  m.def(
      "evaluate",
      [](const std::string& formula, std::optional<std::vector<std::string>> order,
         const std::map<std::string, Relation>& relations, int d) {
        const auto lib = library_of(d, relations);
        const auto f = parse_formula(formula);
        return order ? evaluate(f, *order, lib) : evaluate(f, lib);
      },
      py::arg("formula"), py::arg("order") = std::nullopt,
      py::arg("relations") = std::map<std::string, Relation>{}, py::arg("d") = 2);

  m.def(
      "classify",
      [](const std::vector<Relation>& gamma) {
        const auto c = classify_max_coclone(gamma);
        py::dict out;
        out["label"] = c.label.name();
        out["class"] = to_string(c.ap);
        out["branch"] = c.branch;
        out["notes"] = c.notes;
        return out;
      },
      py::arg("gamma"));

  m.def(
      "trichotomy", [](const std::vector<Relation>& gamma) { return to_string(trichotomy(gamma)); },
      py::arg("gamma"));

  m.def(
      "count",
      [](const std::string& instance, const std::map<std::string, Relation>& relations, int d) {
        std::istringstream in(instance);
        const auto lib = library_of(d, relations);
        return to_py(maxclone::count(parse_instance(in, lib, "<python>")));
      },
      py::arg("instance"), py::arg("relations") = std::map<std::string, Relation>{}, py::arg("d") = 2);

  m.def(
      "close",
      [](const std::vector<Relation>& gamma, const std::string& sig, int arity, int intermediate) {
        if (gamma.empty()) throw InputError("close: empty relation set");
        const int d = gamma.front().domain();
        auto s = signature_named(sig, d);
        s.caps(arity, intermediate > 0 ? intermediate : arity + 2);
        const auto res = maxclone::close(gamma, s, d);
        py::list out;
        for (const auto& [r, deriv] : res.relations(arity)) out.append(py::make_tuple(r, derivation_lines(deriv)));
        return py::make_tuple(to_string(res.status), out);
      },
      py::arg("gamma"), py::arg("sig") = "maxblock", py::arg("arity") = 2, py::arg("intermediate") = 0);

  m.def(
      "in2_witness",
      [](int k, const std::string& variant) {
        const auto rep = in2_witness(k, variant == "pairwise" ? In2Variant::PairWise : In2Variant::Literal);
        py::dict out;
        py::list profile;
        for (const auto& z : rep.profile) profile.append(to_py(z));
        out["profile"] = profile;
        out["matches"] = rep.matches;
        out["profile_constant"] = rep.profile_constant;
        out["auxiliaries"] = rep.aux_vars.size();
        out["pass"] = rep.pass();
        return out;
      },
      py::arg("k") = 2, py::arg("variant") = "literal");
}
