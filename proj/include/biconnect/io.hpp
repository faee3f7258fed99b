#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "biconnect/zipper.hpp"

namespace biconnect::io {

using json = nlohmann::json;

inline constexpr const char* kConfigSchema = "biconnect.config/1";
inline constexpr const char* kConnectionSchema = "biconnect.connection/1";
inline constexpr const char* kFieldSchema = "biconnect.field/1";
inline constexpr const char* kWordSchema = "biconnect.word/1";
inline constexpr const char* kReportSchema = "biconnect.report/1";

// ---------------------------------------------------------------------------
// Text and files

/// Parses JSON text; syntax errors become InputError with line and column.
inline json parse(const std::string& text, const std::string& source = "<input>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

/// Absolute or cwd-relative paths are used as is; other relative paths are
/// looked up under $BICONNECT_FIXTURES.
inline std::filesystem::path resolve_path(const std::string& p) {
  namespace fs = std::filesystem;
  const fs::path path(p);
  if (path.is_absolute() || fs::exists(path)) return path;
  if (const char* dir = std::getenv("BICONNECT_FIXTURES")) {
    const fs::path alt = fs::path(dir) / path;
    if (fs::exists(alt)) return alt;
  }
  throw InputError("cannot find input file '" + p + "'");
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json load_file(const std::string& p) {
  const auto path = resolve_path(p);
  return parse(read_text(path), path.string());
}

/// Stable textual form: sorted keys, two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Field accessors with readable errors

namespace detail {

inline const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw InputError(where + ": expected a number");
  return j.get<double>();
}

inline std::size_t index(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw InputError(where + ": expected a nonnegative integer");
  return j.get<std::size_t>();
}

inline Complex complex_of(const json& j, const std::string& where) {
  const double re = j.contains("re") ? number(j.at("re"), where + ".re") : 0.0;
  const double im = j.contains("im") ? number(j.at("im"), where + ".im") : 0.0;
  return {re, im};
}

inline GraphSlot parse_slot(const std::string& s) {
  for (GraphSlot g : kSlots)
    if (graph_name(g) == s) return g;
  throw InputError("unknown graph '" + s + "'");
}

// Vertex given by label or by index.
inline std::size_t vertex(const json& j, const std::vector<std::string>& labels, const std::string& where) {
  if (j.is_number_integer()) {
    const auto i = index(j, where);
    if (i >= labels.size()) throw StructuralError(where + ": vertex index out of range");
    return i;
  }
  if (j.is_string()) {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == j.get<std::string>()) return i;
    throw StructuralError(where + ": unknown vertex '" + j.get<std::string>() + "'");
  }
  throw InputError(where + ": vertex must be a label or an index");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Configurations and PF data

inline json pf_to_json(const PFData& pf) {
  json mu = json::object();
  for (Layer l : kLayers) mu[std::string(layer_name(l))] = pf.mu[index_of(l)];
  return {{"mu", mu}, {"beta0", pf.beta0}, {"beta1", pf.beta1}};
}

inline json config_to_json(const FourGraphConfig& cfg, const std::optional<PFData>& pf = std::nullopt) {
  json j{{"schema", kConfigSchema}, {"name", cfg.name}};
  json layers = json::object();
  for (Layer l : kLayers) layers[std::string(layer_name(l))] = cfg.layers[index_of(l)];
  j["layers"] = layers;
  json graphs = json::object();
  for (GraphSlot g : kSlots) {
    json edges = json::array();
    const auto& ls = cfg.layers[index_of(source_layer(g))];
    const auto& lr = cfg.layers[index_of(range_layer(g))];
    for (const auto& e : cfg.graph(g).edges) edges.push_back({{"id", e.id}, {"src", ls[e.source]}, {"dst", lr[e.range]}});
    graphs[std::string(graph_name(g))] = edges;
  }
  j["graphs"] = graphs;
  if (pf) j.update(pf_to_json(*pf));
  return j;
}

struct LoadedConfig {
  FourGraphConfig config;
  std::optional<PFData> pf;
};

/// Accepts a config object or a string naming a built-in example.
inline LoadedConfig config_from_json(const json& j) {
  if (j.is_string()) {
    auto cfg = builtin_example(j.get<std::string>());
    return {cfg, std::nullopt};
  }
  LoadedConfig out;
  auto& cfg = out.config;
  cfg.name = j.value("name", std::string("config"));
  const auto& layers = detail::member(j, "layers", "config");
  for (Layer l : kLayers) {
    const auto& arr = detail::member(layers, std::string(layer_name(l)).c_str(), "config.layers");
    if (!arr.is_array()) throw InputError("config.layers: expected arrays of labels");
    for (const auto& v : arr) cfg.layers[index_of(l)].push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  const auto& graphs = detail::member(j, "graphs", "config");
  for (GraphSlot g : kSlots) {
    const std::string gname(graph_name(g));
    const auto& arr = detail::member(graphs, gname.c_str(), "config.graphs");
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> edges;
    std::size_t pos = 0;
    for (const auto& e : arr) {
      const std::string where = "config.graphs." + gname + "[" + std::to_string(pos++) + "]";
      const auto id = e.contains("id") ? detail::index(e.at("id"), where + ".id") : pos - 1;
      const auto s = detail::vertex(detail::member(e, "src", where), cfg.layers[index_of(source_layer(g))], where + ".src");
      const auto r = detail::vertex(detail::member(e, "dst", where), cfg.layers[index_of(range_layer(g))], where + ".dst");
      if (!edges.emplace(id, std::make_pair(s, r)).second) throw StructuralError(where + ": duplicate edge id");
    }
    std::size_t expect = 0;
    for (const auto& [id, sr] : edges) {
      if (id != expect++) throw StructuralError("config.graphs." + gname + ": edge ids must be 0..n-1");
      cfg.graph(g).add_edge(sr.first, sr.second);
    }
  }
  check_structure(cfg);
  if (j.contains("mu")) {
    PFData pf;
    for (Layer l : kLayers) {
      const auto& arr = detail::member(j.at("mu"), std::string(layer_name(l)).c_str(), "mu");
      for (const auto& v : arr) pf.mu[index_of(l)].push_back(detail::number(v, "mu"));
      if (pf.mu[index_of(l)].size() != cfg.layer_size(l)) throw StructuralError("mu: wrong number of weights");
    }
    pf.beta0 = detail::number(detail::member(j, "beta0", "config"), "beta0");
    pf.beta1 = detail::number(detail::member(j, "beta1", "config"), "beta1");
    pf.tol = kDefaultPfTol;
    out.pf = pf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Connections, tensors, words

inline json values_to_json(const std::map<CellKey, Complex>& values) {
  json arr = json::array();
  for (const auto& [k, v] : values) arr.push_back({{"cell", k}, {"re", v.real()}, {"im", v.imag()}});
  return arr;
}

inline json connection_to_json(const Connection& w) {
  return {{"schema", kConnectionSchema}, {"config", config_to_json(w.config(), w.pf_data())},
          {"values", values_to_json(w.values())}};
}

inline json tensor_to_json(const FourTensor& a) {
  return {{"schema", kConnectionSchema}, {"normalization", "tensor"},
          {"config", config_to_json(a.config(), a.pf())}, {"values", values_to_json(a.values())}};
}

/// Connection JSON; with "normalization": "tensor" the values are read as a
/// 4-tensor and converted. Missing μ is computed from the graphs when possible.
inline Connection connection_from_json(const json& j) {
  auto loaded = config_from_json(detail::member(j, "config", "connection"));
  if (!loaded.pf) {
    try {
      loaded.pf = compute_pf(loaded.config);
    } catch (const Error&) {
      loaded.pf.reset();
    }
  }
  std::map<CellKey, Complex> values;
  const auto& arr = detail::member(j, "values", "connection");
  if (!arr.is_array()) throw InputError("connection.values: expected an array");
  std::size_t pos = 0;
  for (const auto& v : arr) {
    const std::string where = "connection.values[" + std::to_string(pos++) + "]";
    const auto& cell = detail::member(v, "cell", where);
    if (!cell.is_array() || cell.size() != 4) throw InputError(where + ".cell: expected four edge ids");
    CellKey key{};
    for (std::size_t i = 0; i < 4; ++i) key[i] = detail::index(cell[i], where + ".cell");
    const Complex c = detail::complex_of(v, where);
    if (!cell_matches(loaded.config, key) && c != Complex(0.0))
      throw StructuralError(where + ": nonzero value on a non-matching cell");
    if (!values.emplace(key, c).second) throw StructuralError(where + ": duplicate cell");
  }
  if (j.value("normalization", std::string("connection")) == "tensor") {
    if (!loaded.pf) throw InputError("tensor input needs PF data");
    return tensor_to_connection(FourTensor(loaded.config, *loaded.pf, std::move(values)));
  }
  return Connection(std::move(loaded.config), std::move(loaded.pf), std::move(values));
}

/// A connection file gives the closed word [a, a']; a word file lists letters.
inline ConnectionWord word_from_json(const json& j) {
  if (j.contains("letters")) {
    std::vector<Connection> letters;
    for (const auto& l : j.at("letters")) letters.push_back(connection_from_json(l));
    return ConnectionWord(std::move(letters));
  }
  return closed_word(connection_from_json(j));
}

// ---------------------------------------------------------------------------
// Fields

inline json field_to_json(const StringField& f) {
  json coeffs = json::array();
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t k = 0; k < f.size(); ++k) {
      const Complex c = f(i, k);
      if (c != Complex(0.0)) coeffs.push_back({{"rho1", i}, {"rho2", k}, {"re", c.real()}, {"im", c.imag()}});
    }
  return {{"schema", kFieldSchema}, {"graph", std::string(graph_name(f.slot))}, {"coeffs", coeffs}};
}

inline StringField field_from_json(const json& j, const BipartiteGraph& g) {
  const auto slot = detail::parse_slot(j.value("graph", std::string("G1")));
  auto f = zero_field(g, slot);
  std::size_t pos = 0;
  for (const auto& c : detail::member(j, "coeffs", "field")) {
    const std::string where = "field.coeffs[" + std::to_string(pos++) + "]";
    const auto r1 = detail::index(detail::member(c, "rho1", where), where + ".rho1");
    const auto r2 = detail::index(detail::member(c, "rho2", where), where + ".rho2");
    if (r1 >= g.edge_count() || r2 >= g.edge_count()) throw StructuralError(where + ": edge id out of range");
    if (!g.parallel(r1, r2)) throw StructuralError(where + ": edges are not parallel");
    f.at(r1, r2) = detail::complex_of(c, where);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Reports

inline json report_to_json(const ValidationReport& r) {
  json checks = json::array();
  for (const auto& e : r.entries())
    checks.push_back({{"name", e.name}, {"status", to_string(e.status)}, {"defect", e.defect}, {"offending", e.offending}});
  return {{"passed", r.passed()}, {"warnings", r.has_warnings()}, {"checks", checks}};
}

inline json theorem_to_json(const TheoremReport& r) {
  json j{{"half_zipper", {{"holds", r.half_zipper}, {"defect", r.half_zipper_defect}}},
         {"zipper", {{"holds", r.zipper}, {"defect", r.zipper_defect}}},
         {"half_flat", {{"holds", r.half_flat}, {"defect", r.half_flat_defect}}},
         {"flat", {{"holds", r.flat}, {"defect", r.flat_defect}}},
         {"agreement", r.agreement}};
  if (r.ftilde) j["ftilde"] = field_to_json(*r.ftilde);
  return j;
}

}  // namespace biconnect::io
