#include "bifurlab/system_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bifurlab/presets.hpp"

namespace bifurlab {

using nlohmann::json;

std::string SchemaError::format(const std::string& field, const std::string& what,
                                std::optional<int> line) {
  std::string s = "schema error";
  if (line) s += " at line " + std::to_string(*line);
  if (!field.empty()) s += " in " + field;
  return s + ": " + what;
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& at) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw SchemaError(at + "/" + key, "unknown key");
  }
}

double real_at(const json& v, const std::string& at) {
  if (!v.is_number()) throw SchemaError(at, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(at, "number must be finite");
  return d;
}

int int_at(const json& v, const std::string& at, int min_value) {
  if (!v.is_number_integer()) throw SchemaError(at, "expected an integer");
  const long long i = v.get<long long>();
  if (i < min_value || i > 1'000'000) {
    throw SchemaError(at, "integer out of range (minimum " + std::to_string(min_value) + ")");
  }
  return static_cast<int>(i);
}

Poly1 parse_w(const json& v) {
  if (!v.is_array()) throw SchemaError("/w", "expected a list of [degree, coeff]");
  std::map<int, double> c;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = "/w/" + std::to_string(i);
    const json& e = v[i];
    if (!e.is_array() || e.size() != 2) throw SchemaError(at, "expected [degree, coeff]");
    const int d = int_at(e[0], at + "/0", 0);
    if (c.count(d)) throw SchemaError(at, "duplicate degree " + std::to_string(d));
    c[d] = real_at(e[1], at + "/1");
  }
  return Poly1(c);
}

std::vector<Poly2> parse_ladder(const json& v, const std::string& name) {
  const std::string base = "/" + name;
  if (!v.is_array()) throw SchemaError(base, "expected a list of {k, terms}");
  std::map<int, Poly2> by_k;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string at = base + "/" + std::to_string(i);
    const json& e = v[i];
    if (!e.is_object()) throw SchemaError(at, "expected an object {k, terms}");
    reject_unknown(e, {"k", "terms"}, at);
    if (!e.contains("k")) throw SchemaError(at + "/k", "missing");
    if (!e.contains("terms")) throw SchemaError(at + "/terms", "missing");
    const int k = int_at(e["k"], at + "/k", 1);
    if (by_k.count(k)) throw SchemaError(at + "/k", "duplicate k = " + std::to_string(k));
    const json& terms = e["terms"];
    if (!terms.is_array()) throw SchemaError(at + "/terms", "expected a list of [dx, dy, coeff]");
    std::map<Poly2::Key, double> c;
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const std::string tat = at + "/terms/" + std::to_string(j);
      const json& t = terms[j];
      if (!t.is_array() || t.size() != 3) throw SchemaError(tat, "expected [dx, dy, coeff]");
      Poly2::Key key{int_at(t[0], tat + "/0", 0), int_at(t[1], tat + "/1", 0)};
      if (c.count(key)) throw SchemaError(tat, "duplicate monomial");
      c[key] = real_at(t[2], tat + "/2");
    }
    by_k[k] = Poly2(c);
  }
  std::vector<Poly2> out;
  if (!by_k.empty()) out.resize(static_cast<std::size_t>(by_k.rbegin()->first));
  for (auto& [k, p] : by_k) out[static_cast<std::size_t>(k - 1)] = std::move(p);
  return out;
}

}  // namespace

SystemDescription make_preset(const std::string& name, const json& params) {
  const json p = params.is_null() ? json::object() : params;
  if (!p.is_object()) throw SchemaError("/params", "expected an object");
  if (name == "example1") {
    reject_unknown(p, {"lambda", "B", "C", "kappa"}, "/params");
    Example1Params e;
    if (p.contains("lambda")) e.lambda = real_at(p["lambda"], "/params/lambda");
    if (p.contains("B")) e.B = real_at(p["B"], "/params/B");
    if (p.contains("C")) e.C = real_at(p["C"], "/params/C");
    if (p.contains("kappa")) e.kappa = real_at(p["kappa"], "/params/kappa");
    json eff = {{"lambda", e.lambda}, {"B", e.B}, {"C", e.C}, {"kappa", e.kappa}};
    return {example1(e), name, eff};
  }
  if (name == "example2") {
    reject_unknown(p, {"lambda", "A", "B", "C"}, "/params");
    Example2Params e;
    if (p.contains("lambda")) e.lambda = real_at(p["lambda"], "/params/lambda");
    if (p.contains("A")) e.A = real_at(p["A"], "/params/A");
    if (p.contains("B")) e.B = real_at(p["B"], "/params/B");
    if (p.contains("C")) e.C = real_at(p["C"], "/params/C");
    json eff = {{"lambda", e.lambda}, {"A", e.A}, {"B", e.B}, {"C", e.C}};
    return {example2(e), name, eff};
  }
  throw SchemaError("/preset", "unknown preset '" + name + "' (expected example1 or example2)");
}

SystemDescription parse_system(const json& j, bool allow_unperturbed) {
  if (!j.is_object()) throw SchemaError("", "top level must be an object");
  if (!j.contains("schema_version")) throw SchemaError("/schema_version", "missing");
  const int ver = int_at(j["schema_version"], "/schema_version", 0);
  if (ver != kSchemaVersion) {
    throw SchemaError("/schema_version", "unsupported version " + std::to_string(ver));
  }
  if (j.contains("preset")) {
    reject_unknown(j, {"schema_version", "preset", "params"}, "");
    if (!j["preset"].is_string()) throw SchemaError("/preset", "expected a string");
    return make_preset(j["preset"].get<std::string>(), j.value("params", json()));
  }
  reject_unknown(j, {"schema_version", "lambda", "q", "w", "F", "G"}, "");
  for (const char* key : {"lambda", "q", "w"}) {
    if (!j.contains(key)) throw SchemaError(std::string("/") + key, "missing");
  }
  const double lambda = real_at(j["lambda"], "/lambda");
  const int q = int_at(j["q"], "/q", 1);
  Poly1 w = parse_w(j["w"]);
  std::vector<Poly2> F = j.contains("F") ? parse_ladder(j["F"], "F") : std::vector<Poly2>{};
  std::vector<Poly2> G = j.contains("G") ? parse_ladder(j["G"], "G") : std::vector<Poly2>{};
  bool any = false;
  for (const auto& p : F) any = any || !p.is_zero();
  for (const auto& p : G) any = any || !p.is_zero();
  if (!any && !allow_unperturbed) {
    throw ModelError("unperturbed system: every F_k and G_k vanishes");
  }
  if (F.empty() && G.empty()) F.emplace_back();
  return {PerturbedSystem(lambda, q, std::move(w), std::move(F), std::move(G)), std::nullopt,
          json()};
}

SystemDescription parse_system_text(const std::string& text, bool allow_unperturbed) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    for (std::size_t i = 0; i + 1 < upto; ++i) line += text[i] == '\n';
    throw SchemaError("", std::string("malformed JSON: ") + e.what(), line);
  }
  return parse_system(j, allow_unperturbed);
}

SystemDescription load_system(const std::string& path, bool allow_unperturbed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("", "cannot read input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_system_text(ss.str(), allow_unperturbed);
}

json system_to_json(const PerturbedSystem& sys) {
  json w = json::array();
  for (const auto& [d, c] : sys.w().terms()) w.push_back({d, c});
  auto ladder = [&](const std::vector<Poly2>& L) {
    json out = json::array();
    for (std::size_t k = 0; k < L.size(); ++k) {
      if (L[k].is_zero()) continue;
      json terms = json::array();
      for (const auto& [key, c] : L[k].terms()) terms.push_back({key.first, key.second, c});
      out.push_back({{"k", k + 1}, {"terms", terms}});
    }
    return out;
  };
  return {{"schema_version", kSchemaVersion},
          {"lambda", sys.lambda()},
          {"q", sys.q()},
          {"w", w},
          {"F", ladder(sys.F_ladder())},
          {"G", ladder(sys.G_ladder())}};
}

}  // namespace bifurlab
