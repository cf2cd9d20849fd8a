#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "msa/digest.hpp"
#include "msa/model.hpp"
#include "msa/stability.hpp"

namespace msa {

namespace detail {

/// JSON number with 17 significant digits (round-trips binary64 exactly).
/// Infinities have no JSON representation and are emitted as null.
inline std::string json_number(double v) {
  if (std::isinf(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // %g never emits a decimal point for integral values; that is still a
  // valid JSON number and parses back to the same double.
  return buf;
}

inline std::string json_number_array(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += json_number(values[i]);
  }
  return out + "]";
}

inline std::string json_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out + "\"";
}

inline std::string svg_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8g", v);
  return buf;
}

} // namespace detail

/// Serializes the report as a single JSON document with stable key order
/// and 17-significant-digit numbers, so identical analyses produce
/// byte-identical files.
inline std::string report_to_json(const StabilityReport& r) {
  using detail::json_number;
  using detail::json_number_array;
  using detail::json_string;
  std::string out;
  out += "{\n";
  out += "  \"tool\": \"msa\",\n";
  out += "  \"version\": " + json_string(r.version) + ",\n";
  out += "  \"input_digest\": " + json_string(r.input_digest) + ",\n";
  out += "  \"parameters\": {";
  out += "\"n_smallest\": " + std::to_string(r.params.n_smallest);
  out += ", \"n_largest\": " + std::to_string(r.params.n_largest);
  out += ", \"gap_factor\": " + json_number(r.params.gap_factor);
  out += ", \"tol\": " + json_number(r.params.tol);
  out += ", \"cond_threshold\": " + json_number(r.params.cond_threshold);
  out += ", \"seed\": " + std::to_string(r.params.seed);
  out += "},\n";
  out += "  \"free_dofs\": " + std::to_string(r.free_dofs) + ",\n";
  out += "  \"element_ids\": [";
  for (std::size_t i = 0; i < r.element_ids.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(r.element_ids[i]);
  }
  out += "],\n";
  out += "  \"condition\": {";
  out += "\"kappa_est\": " + json_number(r.condition.kappa);
  out += ", \"lambda_max_est\": " + json_number(r.condition.lambda_max);
  out += ", \"lambda_min_est\": " + json_number(r.condition.lambda_min);
  out += std::string(", \"ill_conditioned\": ") +
         (r.condition.ill_conditioned ? "true" : "false");
  out += ", \"threshold\": " + json_number(r.condition.threshold);
  out += "},\n";
  out += "  \"eigenvalues\": {";
  out += "\"smallest\": " + json_number_array(r.smallest_eigenvalues);
  out += ", \"largest\": " + json_number_array(r.largest_eigenvalues);
  out += ", \"smallest_residuals\": " + json_number_array(r.smallest_residuals);
  out += ", \"largest_residuals\": " + json_number_array(r.largest_residuals);
  out += "},\n";
  out += "  \"gap\": {";
  out += "\"k\": " + (r.gap.k ? std::to_string(*r.gap.k) : "null");
  out += ", \"gap_factor\": " + json_number(r.gap.gap_factor);
  out += ", \"candidates\": [";
  for (std::size_t i = 0; i < r.gap.table.size(); ++i) {
    if (i) out += ", ";
    const auto& c = r.gap.table[i];
    out += "{\"k\": " + std::to_string(c.k) +
           ", \"lhs\": " + json_number(c.lhs) +
           ", \"rhs\": " + json_number(c.rhs) + "}";
  }
  out += "]},\n";
  out += "  \"energy_fields\": [";
  for (std::size_t i = 0; i < r.fields.size(); ++i) {
    const auto& f = r.fields[i];
    out += (i ? ",\n    " : "\n    ");
    out += "{\"eigenvector\": " + std::to_string(f.eigenvector);
    out += std::string(", \"kind\": \"") + f.kind + "\"";
    out += ", \"lambda\": " + json_number(f.lambda);
    out += ", \"raw\": " + json_number_array(f.raw);
    out += ", \"normalized\": " + json_number_array(f.normalized);
    out += ", \"clusters\": [";
    for (std::size_t j = 0; j < f.labels.size(); ++j) {
      if (j) out += ", ";
      out += f.labels[j] == ClusterLabel::suspect ? "\"suspect\"" : "\"sound\"";
    }
    out += "]";
    out += std::string(", \"degenerate\": ") + (f.degenerate ? "true" : "false");
    out += std::string(", \"no_separation\": ") +
           (f.no_separation ? "true" : "false");
    out += "}";
  }
  out += r.fields.empty() ? "],\n" : "\n  ],\n";
  out += "  \"warnings\": [";
  for (std::size_t i = 0; i < r.warnings.size(); ++i) {
    if (i) out += ", ";
    out += json_string(r.warnings[i]);
  }
  out += "]\n}\n";
  return out;
}

/// Energy overlay: the model wireframe in gray with one circle per
/// in-cluster element, centered on the element midpoint, radius
/// r_max * sqrt(normalized energy) so circle area tracks energy.
/// Out-of-cluster (sound) and degenerate energies are displayed as zero,
/// i.e. their circles are omitted.
inline std::string render_svg(const Model& model, const EnergyField& field) {
  using detail::svg_number;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& n : model.nodes) {
    if (first) {
      xmin = xmax = n.x;
      ymin = ymax = n.y;
      first = false;
    }
    xmin = std::min(xmin, n.x);
    xmax = std::max(xmax, n.x);
    ymin = std::min(ymin, n.y);
    ymax = std::max(ymax, n.y);
  }
  const double span = std::max(xmax - xmin, ymax - ymin);
  const double margin = 0.05 * (span > 0 ? span : 1.0);
  const double diag = std::hypot(xmax - xmin, ymax - ymin);
  const double r_max = 0.04 * (diag > 0 ? diag : 1.0);
  const double x0 = xmin - margin, y0 = ymin - margin;
  const double w = (xmax - xmin) + 2 * margin, h = (ymax - ymin) + 2 * margin;
  // Model y points up, SVG y points down: mirror inside the box.
  const auto sy = [&](double y) { return (ymin + ymax) - y; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ";
  out += "viewBox=\"" + svg_number(x0) + " " + svg_number(y0) + " " +
         svg_number(w) + " " + svg_number(h) + "\" width=\"800\" height=\"" +
         svg_number(800.0 * h / w) + "\">\n";
  out += "  <g stroke=\"#888888\" stroke-width=\"" + svg_number(0.01 * diag) +
         "\" stroke-linecap=\"round\">\n";
  for (const auto& e : model.elements) {
    const Node* a = model.find_node(e.nodes[0]);
    const Node* b = model.find_node(e.nodes[1]);
    out += "    <line x1=\"" + svg_number(a->x) + "\" y1=\"" +
           svg_number(sy(a->y)) + "\" x2=\"" + svg_number(b->x) + "\" y2=\"" +
           svg_number(sy(b->y)) + "\"/>\n";
  }
  out += "  </g>\n";
  out += "  <g fill=\"#cc2222\" fill-opacity=\"0.6\">\n";
  for (std::size_t i = 0; i < model.elements.size(); ++i) {
    if (field.degenerate || i >= field.labels.size() ||
        field.labels[i] != ClusterLabel::suspect)
      continue;
    const double value = field.normalized[i];
    if (!(value > 0.0)) continue;
    const auto& e = model.elements[i];
    const Node* a = model.find_node(e.nodes[0]);
    const Node* b = model.find_node(e.nodes[1]);
    const double cx = 0.5 * (a->x + b->x);
    const double cy = sy(0.5 * (a->y + b->y));
    out += "    <circle cx=\"" + svg_number(cx) + "\" cy=\"" + svg_number(cy) +
           "\" r=\"" + svg_number(r_max * std::sqrt(value)) + "\"/>\n";
  }
  out += "  </g>\n</svg>\n";
  return out;
}

} // namespace msa
