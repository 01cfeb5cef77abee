#pragma once

// JSON forms of the library types. Rationals travel as "p/q" strings; inputs
// may give them as strings ("7/2", "0.25") or plain numbers.

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "expmoment/expcore.hpp"
#include "expmoment/hankel.hpp"
#include "expmoment/measures.hpp"
#include "expmoment/numerics.hpp"
#include "expmoment/recover.hpp"

namespace expmoment::io {

using nlohmann::json;

/// Malformed or schema-violating JSON input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json value(const Rational& q) { return to_string(q); }
inline json value(double v) { return v; }

template <class T>
json values(const std::vector<T>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(value(x));
  return a;
}

template <class T>
json matrix(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.order(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.order(); ++j) row.push_back(value(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Rational rational(const json& j) {
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
      throw FormatError(e.what());
    }
  }
  if (j.is_number()) return rational_from_double(j.get<double>());
  throw FormatError("expected a number or rational string, got " + j.dump());
}

inline double number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_double(rational(j));
  throw FormatError("expected a number, got " + j.dump());
}

inline const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw FormatError(std::string("missing field \"") + key + "\"");
  return obj.at(key);
}

inline json domain(const Domain& d) {
  if (d.kind == Domain::Kind::halfline) return {{"kind", "halfline"}};
  return {{"kind", "interval"}, {"a", d.a}, {"b", d.b}};
}

inline Domain domain_from(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  if (kind == "halfline") return Domain::halfline();
  if (kind == "interval") {
    try {
      return Domain::interval(number(field(j, "a")), number(field(j, "b")));
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what());
    }
  }
  throw FormatError("unknown domain kind \"" + kind + "\"");
}

inline json frequencies(const Frequencies& f) {
  return {{"lambda", f.is_exact() ? values(f.exact()) : values(f.values())}};
}

template <class T>
json series(const PhiSeries<T>& s) {
  return {{"lambda", s.lambda}, {"start", s.start}, {"coeffs", values(s.coeffs)}};
}

template <class T>
json basis(const BasisValues<T>& b) {
  json j{{"lambda", b.lambda}, {"x", value(b.x)}, {"values", values(b.values)}};
  if (b.series_order) j["series_order"] = b.series_order;
  return j;
}

template <class T>
json moments(const MomentSequence<T>& c) {
  return {{"domain", domain(c.domain)}, {"values", values(c.values)}};
}

inline MomentSequence<Rational> exact_moments_from(const json& j) {
  const auto& vals = field(j, "values");
  if (!vals.is_array()) throw FormatError("\"values\" must be an array");
  MomentSequence<Rational> c;
  c.domain = j.contains("domain") ? domain_from(j.at("domain")) : Domain::halfline();
  for (const auto& v : vals) c.values.push_back(rational(v));
  return c;
}

inline MomentSequence<double> moments_from(const json& j) {
  const auto& vals = field(j, "values");
  if (!vals.is_array()) throw FormatError("\"values\" must be an array");
  MomentSequence<double> c;
  c.domain = j.contains("domain") ? domain_from(j.at("domain")) : Domain::halfline();
  for (const auto& v : vals) c.values.push_back(number(v));
  return c;
}

template <class T>
json atomic(const BasicAtomicMeasure<T>& m) {
  json atoms = json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"x", value(a.x)}, {"w", value(a.w)}});
  return {{"atoms", std::move(atoms)}};
}

inline json measure(const Measure& mu) {
  if (const auto* at = std::get_if<AtomicMeasure>(&mu)) {
    json j = atomic(*at);
    j["type"] = "atomic";
    return j;
  }
  if (const auto* u = std::get_if<UniformDensity>(&mu)) return {{"type", "uniform"}, {"a", u->a}, {"b", u->b}};
  const auto& e = std::get<ExponentialDensity>(mu);
  json j{{"type", "exponential"}, {"rate", e.rate}};
  if (std::isfinite(e.truncate)) j["truncate"] = e.truncate;
  return j;
}

inline Measure measure_from(const json& j) {
  const auto type = field(j, "type").get<std::string>();
  try {
    if (type == "atomic") {
      std::vector<Atom<double>> atoms;
      for (const auto& a : field(j, "atoms")) atoms.push_back({number(field(a, "x")), number(field(a, "w"))});
      return AtomicMeasure(std::move(atoms));
    }
    if (type == "uniform") {
      Measure m = UniformDensity{number(field(j, "a")), number(field(j, "b"))};
      validate_measure(m);
      return m;
    }
    if (type == "exponential") {
      ExponentialDensity e{number(field(j, "rate"))};
      if (j.contains("truncate") && !j.at("truncate").is_null()) e.truncate = number(j.at("truncate"));
      Measure m = e;
      validate_measure(m);
      return m;
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  throw FormatError("unknown measure type \"" + type + "\"");
}

/// Atomic measure with exact positions and weights.
inline ExactAtomicMeasure exact_atomic_from(const json& j) {
  if (field(j, "type").get<std::string>() != "atomic") throw FormatError("exact mode supports atomic measures only");
  std::vector<Atom<Rational>> atoms;
  for (const auto& a : field(j, "atoms")) atoms.push_back({rational(field(a, "x")), rational(field(a, "w"))});
  try {
    return ExactAtomicMeasure(std::move(atoms));
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

inline json psd(const PsdReport& r) {
  json j{{"is_psd", r.is_psd}, {"is_pd", r.is_pd}, {"rank", r.rank},
         {"mode", r.mode == PsdMode::exact ? "exact" : "floating"}, {"tolerance", r.tolerance}};
  if (r.min_eigenvalue) j["min_eig"] = *r.min_eigenvalue;
  if (r.mode == PsdMode::exact) j["minors"] = values(r.minors);
  return j;
}

template <class T>
json check(const FormCheck<T>& c) {
  json j = psd(c.psd);
  j["k"] = c.k;
  j["form"] = form_name(c.form);
  j["matrix"] = matrix(c.matrix);
  return j;
}

template <class T>
json checks(const std::vector<FormCheck<T>>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(check(c));
  return a;
}

inline json hypothesis(const PhiPositivityReport& h) {
  return {{"pass", h.pass},
          {"min_value", h.min_value},
          {"min_order", h.min_order},
          {"min_x", h.min_x},
          {"tolerance", h.tolerance},
          {"taylor_nonnegative", h.taylor_nonnegative},
          {"taylor_checked_to", h.taylor_checked_to},
          {"taylor_exact", h.taylor_exact}};
}

template <class T>
json theorem1(const Theorem1Report<T>& r) {
  return {{"region", region_name(r.region)}, {"x", value(r.x)},          {"basis", values(r.basis.values)},
          {"hypothesis", hypothesis(r.hypothesis)}, {"checks", checks(r.checks)}, {"pass", r.pass}};
}

template <class T>
json solvability(const SolvabilityReport<T>& r) {
  json j{{"domain", domain(r.domain)},
         {"checks", checks(r.checks)},
         {"solvable", r.solvable},
         {"rank", r.rank},
         {"boundary_flags", r.boundary_flags}};
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

inline json transfer(const TransferReport& r) {
  return {{"domain", domain(r.domain)},
          {"c_hat", values(r.c_hat.values)},
          {"solvable", r.solvability.solvable},
          {"solvability", solvability(r.solvability)},
          {"nu", atomic(r.nu)},
          {"max_residual", r.max_residual},
          {"pass", r.pass},
          {"diagnostics", r.diagnostics}};
}

}  // namespace expmoment::io
