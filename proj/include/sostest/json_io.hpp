#pragma once

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

#include "sostest/poly.hpp"
#include "sostest/pseudo.hpp"
#include "sostest/sos.hpp"
#include "sostest/testers.hpp"

namespace sostest {

using Json = nlohmann::json;

class SchemaError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Polynomial files: { "n": int, "basis": "monomial"|"hermite",
//                     "terms": [ { "vars": [[id, mult], ...], "coeff": float } ] }
// Round-trips exactly at double precision.
// ---------------------------------------------------------------------------

inline Json multiset_to_json(const MultisetIndex& I) {
  Json vars = Json::array();
  for (const auto& [v, m] : I.entries()) vars.push_back(Json::array({v, m}));
  return vars;
}

inline MultisetIndex multiset_from_json(const Json& vars) {
  if (!vars.is_array()) throw SchemaError("multiset: expected an array of [id, mult]");
  std::vector<MultisetIndex::Entry> e;
  for (const auto& pair : vars) {
    if (!pair.is_array() || pair.size() != 2)
      throw SchemaError("multiset: entries must be [id, mult] pairs");
    e.push_back({pair[0].get<int>(), pair[1].get<int>()});
  }
  return MultisetIndex(e);
}

template <class Poly>
Json poly_to_json(const Poly& f, const std::string& basis) {
  Json terms = Json::array();
  for (const auto& [I, c] : f.terms)
    terms.push_back({{"vars", multiset_to_json(I)}, {"coeff", c}});
  return Json{{"n", f.n}, {"basis", basis}, {"terms", terms}};
}

inline Json to_json(const MonomialPoly& f) { return poly_to_json(f, "monomial"); }
inline Json to_json(const HermitePoly& f) { return poly_to_json(f, "hermite"); }

struct PolynomialFile {
  std::string basis;
  MonomialPoly monomial;  // valid when basis == "monomial"
  HermitePoly hermite;    // valid when basis == "hermite"

  MonomialPoly as_monomial() const {
    return basis == "monomial" ? monomial : to_monomial(hermite);
  }
  HermitePoly as_hermite() const {
    return basis == "hermite" ? hermite : to_hermite(monomial);
  }
  int degree() const { return basis == "hermite" ? hermite.degree() : monomial.degree(); }
};

inline PolynomialFile poly_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("basis") || !j.contains("terms"))
    throw SchemaError("polynomial: expected keys n, basis, terms");
  PolynomialFile out;
  out.basis = j.at("basis").get<std::string>();
  if (out.basis != "monomial" && out.basis != "hermite")
    throw SchemaError("polynomial: basis must be 'monomial' or 'hermite'");
  int n = j.at("n").get<int>();
  if (n < 1) throw SchemaError("polynomial: n must be positive");
  MonomialPoly m(n);
  HermitePoly h(n);
  for (const auto& t : j.at("terms")) {
    if (!t.contains("vars") || !t.contains("coeff"))
      throw SchemaError("polynomial: each term needs vars and coeff");
    auto I = multiset_from_json(t.at("vars"));
    double c = t.at("coeff").get<double>();
    if (out.basis == "monomial")
      m.add_term(I, c);
    else
      h.add_term(I, c);
  }
  out.monomial = std::move(m);
  out.hermite = std::move(h);
  return out;
}

// ---------------------------------------------------------------------------
// Gram matrices: { "d": int, "n": int, "index": [multisets, canonical order],
//                  "entries": row-major floats }
// ---------------------------------------------------------------------------

inline Json to_json(const GramMatrix& M) {
  Json index = Json::array();
  for (const auto& I : M.index) index.push_back(multiset_to_json(I));
  Json entries = Json::array();
  for (int i = 0; i < M.entries.rows(); ++i)
    for (int j = 0; j < M.entries.cols(); ++j) entries.push_back(M.entries(i, j));
  return Json{{"d", M.d}, {"n", M.n}, {"index", index}, {"entries", entries}};
}

inline GramMatrix gram_from_json(const Json& j) {
  if (!j.contains("d") || !j.contains("n") || !j.contains("index") || !j.contains("entries"))
    throw SchemaError("gram: expected keys d, n, index, entries");
  GramMatrix M;
  M.d = j.at("d").get<int>();
  M.n = j.at("n").get<int>();
  for (const auto& v : j.at("index")) M.index.push_back(multiset_from_json(v));
  const auto expected = gram_basis(M.n, M.d);
  if (M.index != expected) throw SchemaError("gram: index is not in canonical order");
  const int N = static_cast<int>(M.index.size());
  const auto& e = j.at("entries");
  if (static_cast<int>(e.size()) != N * N) throw SchemaError("gram: entry count mismatch");
  M.entries.resize(N, N);
  int k = 0;
  for (int i = 0; i < N; ++i)
    for (int jj = 0; jj < N; ++jj) M.entries(i, jj) = e[k++].get<double>();
  return M;
}

// ---------------------------------------------------------------------------
// Reports and verdicts
// ---------------------------------------------------------------------------

inline Json to_json(const FeasibilityReport& r) {
  return Json{{"feasible", r.feasible},
              {"iterations", r.iterations},
              {"eval_violation", r.eval_violation},
              {"psd_violation", r.psd_violation},
              {"norm_excess", r.norm_excess},
              {"non_converged", r.non_converged}};
}

inline Json to_json(const TesterVerdict& v) {
  Json j{{"verdict", v.yes ? "YES" : "NO"}, {"samples_used", v.samples_used}};
  if (v.witness_point) {
    Json p = Json::array();
    for (int i = 0; i < v.witness_point->size(); ++i) p.push_back((*v.witness_point)(i));
    j["witness_point"] = p;
    j["witness_value"] = *v.witness_value;
  }
  if (v.report) j["report"] = to_json(*v.report);
  return j;
}

inline Json to_json(const PsdReport& r) {
  Json j{{"min_scaled_eig", r.min_scaled_eig}, {"pass", r.pass}};
  if (r.dominance_margin) j["dominance_margin"] = *r.dominance_margin;
  return j;
}

inline Json to_json(const DistanceReport& r) {
  Json j{{"ef_sign", r.ef.sign()},
         {"ef_log2", r.ef.is_zero() ? Json() : Json(r.ef.log2_double())},
         {"log2_numerator", r.log2_numerator},
         {"log2_denominator", r.log2_denominator},
         {"log2_bound", r.log2_bound}};
  if (r.ef.is_rational()) j["ef"] = static_cast<double>(r.ef.to_rational());
  if (r.log2_closed_form_floor) {
    j["log2_closed_form_floor"] = *r.log2_closed_form_floor;
    j["floor_holds"] = r.floor_holds;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

inline Json certificate_to_json(const MotzkinPE& pe) {
  return Json{{"kind", "motzkin"},
              {"r", pe.r()},
              {"c", static_cast<double>(pe.c())},
              {"k", {{"base_num", boost::multiprecision::numerator(pe.k_base()).str()},
                     {"base_den", boost::multiprecision::denominator(pe.k_base()).str()},
                     {"root", pe.k_root()}}},
              {"nu", static_cast<double>(pe.nu())},
              {"half_degree", pe.half_degree()}};
}

inline Json certificate_to_json(const XorPE& pe, const std::vector<XorEquation>& eqs, int n) {
  Json eqj = Json::array();
  for (const auto& e : eqs) {
    Json vars = Json::array();
    for (int v = 0; v < n; ++v)
      if (e.mask & (1ull << v)) vars.push_back(v + 1);
    eqj.push_back({{"vars", vars}, {"sign", e.sign}});
  }
  Json cls = Json::array();
  for (std::uint64_t mask : pe.closure().members) {
    Json vars = Json::array();
    for (int v = 0; v < n; ++v)
      if (mask & (1ull << v)) vars.push_back(v + 1);
    cls.push_back({{"vars", vars}, {"sign", pe.closure().lookup(mask)}});
  }
  return Json{{"kind", "xor"},
              {"n", n},
              {"half_degree", pe.half_degree()},
              {"equations", eqj},
              {"closure", cls}};
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return j;
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace sostest
