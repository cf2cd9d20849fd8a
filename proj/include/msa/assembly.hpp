#pragma once

#include <cmath>
#include <vector>

#include "msa/dense.hpp"
#include "msa/errors.hpp"
#include "msa/model.hpp"
#include "msa/sparse.hpp"

namespace msa {

/// Element stiffness in local axes plus the local-to-global rotation.
/// The globally oriented matrix is T^T K_local T.
struct ElementStiffness {
  int element_id = 0;
  DenseMatrix k_local; // symmetric PSD, n_e x n_e
  DenseMatrix t;       // orthogonal, n_e x n_e

  DenseMatrix global() const { return transpose(t) * k_local * t; }
};

namespace detail {

// Block-diagonal rotation: each node's (ux, uy) pair rotated by the element
// direction cosines, rz (if present) passed through.
inline DenseMatrix rotation(int ndofs, double c, double s) {
  DenseMatrix t(ndofs, ndofs);
  const int per_node = ndofs / 2;
  for (int n = 0; n < 2; ++n) {
    const int o = n * per_node;
    t(o + 0, o + 0) = c;
    t(o + 0, o + 1) = s;
    t(o + 1, o + 0) = -s;
    t(o + 1, o + 1) = c;
    if (per_node == 3) t(o + 2, o + 2) = 1.0;
  }
  return t;
}

inline DenseMatrix axial_stiffness(double k) {
  DenseMatrix m(4, 4);
  m(0, 0) = k;
  m(0, 2) = -k;
  m(2, 0) = -k;
  m(2, 2) = k;
  return m;
}

// Euler-Bernoulli 2D frame element in local axes,
// dof order (u1, v1, rz1, u2, v2, rz2).
inline DenseMatrix beam_stiffness(double ea, double ei, double len) {
  const double a = ea / len;
  const double b1 = 12.0 * ei / (len * len * len);
  const double b2 = 6.0 * ei / (len * len);
  const double b3 = 4.0 * ei / len;
  const double b4 = 2.0 * ei / len;
  DenseMatrix m(6, 6);
  m(0, 0) = a;
  m(0, 3) = -a;
  m(3, 0) = -a;
  m(3, 3) = a;
  m(1, 1) = b1;
  m(1, 2) = b2;
  m(2, 1) = b2;
  m(1, 4) = -b1;
  m(4, 1) = -b1;
  m(1, 5) = b2;
  m(5, 1) = b2;
  m(2, 2) = b3;
  m(2, 4) = -b2;
  m(4, 2) = -b2;
  m(2, 5) = b4;
  m(5, 2) = b4;
  m(4, 4) = b1;
  m(4, 5) = -b2;
  m(5, 4) = -b2;
  m(5, 5) = b3;
  return m;
}

} // namespace detail

/// Builds K_local and T for one element from its end-node coordinates.
inline ElementStiffness element_matrices(const Element& e, const Node& a,
                                         const Node& b) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (!(len > 0.0))
    throw ModelError("element " + std::to_string(e.id) +
                     " has non-positive length");
  const double c = (b.x - a.x) / len;
  const double s = (b.y - a.y) / len;

  ElementStiffness es;
  es.element_id = e.id;
  switch (e.kind) {
    case ElementKind::spring:
      es.k_local = detail::axial_stiffness(e.k);
      es.t = detail::rotation(4, c, s);
      break;
    case ElementKind::bar:
      es.k_local = detail::axial_stiffness(e.ea / len);
      es.t = detail::rotation(4, c, s);
      break;
    case ElementKind::beam2d:
      es.k_local = detail::beam_stiffness(e.ea, e.ei, len);
      es.t = detail::rotation(6, c, s);
      break;
  }
  return es;
}

/// Element matrices for the whole model, aligned with model.elements order.
inline std::vector<ElementStiffness> all_element_matrices(const Model& model) {
  std::vector<ElementStiffness> out;
  out.reserve(model.elements.size());
  for (const auto& e : model.elements) {
    const Node* a = model.find_node(e.nodes[0]);
    const Node* b = model.find_node(e.nodes[1]);
    if (!a || !b)
      throw ModelError("element " + std::to_string(e.id) +
                       " references missing node");
    out.push_back(element_matrices(e, *a, *b));
  }
  return out;
}

/// Assembles A = sum_e T^T K^(e) T scattered through m_e. Rows/columns of
/// restrained dofs are absent; free dofs without stiffness keep their
/// (empty) row, since zero-stiffness dofs are what the analysis hunts.
/// Accumulation order is fixed by (element id, local row, local col).
inline SparseSymmetric assemble(const Model& model, const DofMap& dofmap) {
  if (dofmap.free_count < 1)
    throw ModelError("model is fully restrained (no free dofs)");
  std::vector<std::size_t> order(model.elements.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return model.elements[a].id < model.elements[b].id;
  });
  std::vector<Triplet> triplets;
  for (std::size_t ei : order) {
    const Element& e = model.elements[ei];
    const auto es =
        element_matrices(e, *model.find_node(e.nodes[0]),
                         *model.find_node(e.nodes[1]));
    const DenseMatrix g = es.global();
    const auto& m = dofmap.element_dofs[ei];
    const int ne = static_cast<int>(m.size());
    for (int r = 0; r < ne; ++r) {
      if (m[r] == kRestrained) continue;
      for (int c = 0; c < ne; ++c) {
        if (m[c] == kRestrained) continue;
        if (m[r] <= m[c]) triplets.push_back({m[r], m[c], g(r, c)});
      }
    }
  }
  return SparseSymmetric::from_triplets(dofmap.free_count, std::move(triplets));
}

} // namespace msa
