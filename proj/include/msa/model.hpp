#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "msa/errors.hpp"

namespace msa {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class ElementKind { spring, bar, beam2d };

/// Local degrees of freedom of a 2D node, in canonical order.
enum class Dof : int { ux = 0, uy = 1, rz = 2 };

inline std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::spring: return "spring";
    case ElementKind::bar: return "bar";
    case ElementKind::beam2d: return "beam2d";
  }
  return "?";
}

inline std::string_view to_string(Dof d) {
  switch (d) {
    case Dof::ux: return "ux";
    case Dof::uy: return "uy";
    case Dof::rz: return "rz";
  }
  return "?";
}

struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Node&) const = default;
};

/// A two-node element. Only the properties matching `kind` are meaningful:
///   spring -> k   (axial stiffness, force/length)
///   bar    -> ea  (E*A, force)
///   beam2d -> ea, ei (E*A and E*I, force and force*length^2)
struct Element {
  int id = 0;
  ElementKind kind = ElementKind::spring;
  std::array<int, 2> nodes{0, 0};
  double k = 0.0;
  double ea = 0.0;
  double ei = 0.0;
  bool operator==(const Element&) const = default;
};

struct Restraint {
  int node = 0;
  std::array<bool, 3> fixed{false, false, false}; // indexed by Dof
  bool operator==(const Restraint&) const = default;
};

struct Model {
  std::vector<Node> nodes;
  std::vector<Element> elements;
  std::vector<Restraint> restraints;
  bool operator==(const Model&) const = default;

  const Node* find_node(int id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }
};

/// Marker for a restrained (eliminated) dof inside an element map.
inline constexpr int kRestrained = -1;

/// Condensed global numbering of the free dofs.
///
/// Free dofs are numbered 0..free_count-1 sorted by (node id, ux, uy, rz);
/// restrained dofs carry kRestrained. element_dofs[e] is the map m_e from
/// the element's local dofs to global indices (4 entries for spring/bar,
/// 6 for beam2d), aligned with model.elements order.
struct DofMap {
  int free_count = 0;
  std::vector<std::array<int, 3>> node_dofs; // aligned with model.nodes
  std::vector<std::vector<int>> element_dofs;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline double element_length(const Model& model, const Element& e) {
  const Node* a = model.find_node(e.nodes[0]);
  const Node* b = model.find_node(e.nodes[1]);
  if (!a || !b) return 0.0;
  return std::hypot(b->x - a->x, b->y - a->y);
}

/// Checks every Model invariant; throws ModelError on the first violation.
inline void validate(const Model& model) {
  std::set<int> node_ids;
  for (const auto& n : model.nodes) {
    if (n.id <= 0)
      throw ModelError("node id must be a positive integer, got " +
                       std::to_string(n.id));
    if (!node_ids.insert(n.id).second)
      throw ModelError("duplicate node id " + std::to_string(n.id));
    if (!std::isfinite(n.x) || !std::isfinite(n.y))
      throw ModelError("non-finite coordinates on node " +
                       std::to_string(n.id));
  }
  if (model.elements.empty())
    throw ModelError("model has no elements");
  std::set<int> element_ids;
  for (const auto& e : model.elements) {
    const std::string tag = "element " + std::to_string(e.id);
    if (e.id <= 0)
      throw ModelError("element id must be a positive integer, got " +
                       std::to_string(e.id));
    if (!element_ids.insert(e.id).second)
      throw ModelError("duplicate element id " + std::to_string(e.id));
    for (int nid : e.nodes)
      if (!node_ids.count(nid))
        throw ModelError(tag + " references missing node " +
                         std::to_string(nid));
    if (e.nodes[0] == e.nodes[1])
      throw ModelError(tag + " connects a node to itself");
    const auto check = [&](double v, const char* name) {
      if (!std::isfinite(v))
        throw ModelError(tag + ": non-finite " + name);
      if (v < 0.0)
        throw ModelError(tag + ": negative stiffness " + name);
    };
    switch (e.kind) {
      case ElementKind::spring: check(e.k, "k"); break;
      case ElementKind::bar: check(e.ea, "ea"); break;
      case ElementKind::beam2d:
        check(e.ea, "ea");
        check(e.ei, "ei");
        break;
    }
    if (!(element_length(model, e) > 0.0))
      throw ModelError(tag + " has non-positive length");
  }
  for (const auto& r : model.restraints) {
    if (!node_ids.count(r.node))
      throw ModelError("restraint references missing node " +
                       std::to_string(r.node));
    if (!r.fixed[0] && !r.fixed[1] && !r.fixed[2])
      throw ModelError("restraint on node " + std::to_string(r.node) +
                       " fixes no dofs");
  }
}

// ---------------------------------------------------------------------------
// Dof numbering
// ---------------------------------------------------------------------------

/// Deterministic condensed numbering: free dofs sorted by (node id, ux, uy,
/// rz) get indices 0..n-1, restrained dofs are eliminated.
inline DofMap build_dof_map(const Model& model) {
  std::map<int, std::array<bool, 3>> fixed; // node id -> fixed dofs
  for (const auto& n : model.nodes) fixed[n.id] = {false, false, false};
  for (const auto& r : model.restraints)
    for (int d = 0; d < 3; ++d)
      if (r.fixed[d]) fixed[r.node][d] = true;

  std::map<int, std::array<int, 3>> numbering;
  int next = 0;
  for (const auto& [nid, fix] : fixed) { // std::map iterates in id order
    std::array<int, 3> g{kRestrained, kRestrained, kRestrained};
    for (int d = 0; d < 3; ++d)
      if (!fix[d]) g[d] = next++;
    numbering[nid] = g;
  }

  DofMap dofmap;
  dofmap.free_count = next;
  dofmap.node_dofs.reserve(model.nodes.size());
  for (const auto& n : model.nodes) dofmap.node_dofs.push_back(numbering[n.id]);

  dofmap.element_dofs.reserve(model.elements.size());
  for (const auto& e : model.elements) {
    const auto& ga = numbering[e.nodes[0]];
    const auto& gb = numbering[e.nodes[1]];
    std::vector<int> m;
    if (e.kind == ElementKind::beam2d) {
      m = {ga[0], ga[1], ga[2], gb[0], gb[1], gb[2]};
    } else { // spring and bar act on translations only
      m = {ga[0], ga[1], gb[0], gb[1]};
    }
    dofmap.element_dofs.push_back(std::move(m));
  }
  return dofmap;
}

// ---------------------------------------------------------------------------
// Parsing / serialization
// ---------------------------------------------------------------------------

namespace detail {

inline void require_keys(const nlohmann::json& obj,
                         const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw ParseError("unknown key \"" + item.key() + "\" in " + where);
  for (const auto& key : allowed)
    if (!obj.contains(key))
      throw ParseError("missing key \"" + key + "\" in " + where);
}

inline int get_id(const nlohmann::json& obj, const char* key,
                  const std::string& where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() <= 0)
    throw ParseError(std::string(key) + " in " + where +
                     " must be a positive integer");
  return v.get<int>();
}

inline double get_finite(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number())
    throw ParseError(where + " must be a finite number");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    throw ParseError(where + " must be a finite number");
  return d;
}

/// Shortest decimal that preserves the exact binary64 value.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

} // namespace detail

/// Parses the documented JSON model format. Strict: unknown keys, wrong
/// types, and non-finite numbers are rejected. The returned Model is
/// canonical: nodes/elements sorted by id, restraints sorted by node id.
inline Model parse_model(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what(), e.byte);
  }
  if (!doc.is_object())
    throw ParseError("top level must be an object");
  detail::require_keys(doc, {"nodes", "elements", "restraints"}, "document");

  Model model;
  const auto& nodes = doc.at("nodes");
  if (!nodes.is_array()) throw ParseError("\"nodes\" must be an array");
  for (const auto& jn : nodes) {
    if (!jn.is_object()) throw ParseError("node entries must be objects");
    detail::require_keys(jn, {"id", "x", "y"}, "node");
    Node n;
    n.id = detail::get_id(jn, "id", "node");
    n.x = detail::get_finite(jn.at("x"), "node x");
    n.y = detail::get_finite(jn.at("y"), "node y");
    model.nodes.push_back(n);
  }

  const auto& elements = doc.at("elements");
  if (!elements.is_array()) throw ParseError("\"elements\" must be an array");
  for (const auto& je : elements) {
    if (!je.is_object()) throw ParseError("element entries must be objects");
    detail::require_keys(je, {"id", "kind", "nodes", "props"}, "element");
    Element e;
    e.id = detail::get_id(je, "id", "element");
    const std::string kind = je.at("kind").is_string()
                                 ? je.at("kind").get<std::string>()
                                 : std::string();
    if (kind == "spring")
      e.kind = ElementKind::spring;
    else if (kind == "bar")
      e.kind = ElementKind::bar;
    else if (kind == "beam2d")
      e.kind = ElementKind::beam2d;
    else
      throw ParseError("unknown element kind \"" + kind + "\"");
    const auto& jn = je.at("nodes");
    if (!jn.is_array() || jn.size() != 2)
      throw ParseError("element nodes must be a pair of node ids");
    for (int i = 0; i < 2; ++i) {
      if (!jn[i].is_number_integer() || jn[i].get<long long>() <= 0)
        throw ParseError("element node ids must be positive integers");
      e.nodes[i] = jn[i].get<int>();
    }
    const auto& props = je.at("props");
    if (!props.is_object()) throw ParseError("element props must be an object");
    const std::string where = "props of element " + std::to_string(e.id);
    switch (e.kind) {
      case ElementKind::spring:
        detail::require_keys(props, {"k"}, where);
        e.k = detail::get_finite(props.at("k"), where + " k");
        break;
      case ElementKind::bar:
        detail::require_keys(props, {"ea"}, where);
        e.ea = detail::get_finite(props.at("ea"), where + " ea");
        break;
      case ElementKind::beam2d:
        detail::require_keys(props, {"ea", "ei"}, where);
        e.ea = detail::get_finite(props.at("ea"), where + " ea");
        e.ei = detail::get_finite(props.at("ei"), where + " ei");
        break;
    }
    model.elements.push_back(e);
  }

  const auto& restraints = doc.at("restraints");
  if (!restraints.is_array())
    throw ParseError("\"restraints\" must be an array");
  for (const auto& jr : restraints) {
    if (!jr.is_object()) throw ParseError("restraint entries must be objects");
    detail::require_keys(jr, {"node", "fixed"}, "restraint");
    Restraint r;
    r.node = detail::get_id(jr, "node", "restraint");
    const auto& jf = jr.at("fixed");
    if (!jf.is_array() || jf.empty())
      throw ParseError("restraint fixed must be a non-empty array");
    for (const auto& jd : jf) {
      const std::string d = jd.is_string() ? jd.get<std::string>() : "";
      if (d == "ux")
        r.fixed[0] = true;
      else if (d == "uy")
        r.fixed[1] = true;
      else if (d == "rz")
        r.fixed[2] = true;
      else
        throw ParseError("unknown dof \"" + d + "\" in restraint");
    }
    model.restraints.push_back(r);
  }

  // Canonical order. Restraints on the same node are merged.
  std::sort(model.nodes.begin(), model.nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(model.elements.begin(), model.elements.end(),
            [](const Element& a, const Element& b) { return a.id < b.id; });
  std::map<int, std::array<bool, 3>> merged;
  for (const auto& r : model.restraints)
    for (int d = 0; d < 3; ++d)
      if (r.fixed[d]) merged[r.node][d] = true;
  model.restraints.clear();
  for (const auto& [nid, fix] : merged)
    model.restraints.push_back(Restraint{nid, fix});

  validate(model);
  return model;
}

/// Emits the canonical form: sorted entities, fixed key order, numbers with
/// 17 significant digits. serialize_model(parse_model(text)) reparses to an
/// identical Model.
inline std::string serialize_model(const Model& model) {
  Model m = model;
  std::sort(m.nodes.begin(), m.nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  std::sort(m.elements.begin(), m.elements.end(),
            [](const Element& a, const Element& b) { return a.id < b.id; });
  std::sort(m.restraints.begin(), m.restraints.end(),
            [](const Restraint& a, const Restraint& b) {
              return a.node < b.node;
            });

  std::string out;
  out += "{\n  \"nodes\": [";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const auto& n = m.nodes[i];
    out += (i ? ",\n    " : "\n    ");
    out += "{\"id\": " + std::to_string(n.id) +
           ", \"x\": " + detail::format_double(n.x) +
           ", \"y\": " + detail::format_double(n.y) + "}";
  }
  out += "\n  ],\n  \"elements\": [";
  for (std::size_t i = 0; i < m.elements.size(); ++i) {
    const auto& e = m.elements[i];
    out += (i ? ",\n    " : "\n    ");
    out += "{\"id\": " + std::to_string(e.id) + ", \"kind\": \"" +
           std::string(to_string(e.kind)) + "\", \"nodes\": [" +
           std::to_string(e.nodes[0]) + ", " + std::to_string(e.nodes[1]) +
           "], \"props\": {";
    switch (e.kind) {
      case ElementKind::spring:
        out += "\"k\": " + detail::format_double(e.k);
        break;
      case ElementKind::bar:
        out += "\"ea\": " + detail::format_double(e.ea);
        break;
      case ElementKind::beam2d:
        out += "\"ea\": " + detail::format_double(e.ea) +
               ", \"ei\": " + detail::format_double(e.ei);
        break;
    }
    out += "}}";
  }
  out += "\n  ],\n  \"restraints\": [";
  for (std::size_t i = 0; i < m.restraints.size(); ++i) {
    const auto& r = m.restraints[i];
    out += (i ? ",\n    " : "\n    ");
    out += "{\"node\": " + std::to_string(r.node) + ", \"fixed\": [";
    bool first = true;
    for (int d = 0; d < 3; ++d)
      if (r.fixed[d]) {
        if (!first) out += ", ";
        out += "\"" + std::string(to_string(static_cast<Dof>(d))) + "\"";
        first = false;
      }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

} // namespace msa
