#pragma once

// Shared model builders and small oracles for the test suites.

#include <cmath>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "msa/msa.hpp"

namespace fixtures {

// Portal-frame fixture: 6 nodes carrying 7 free dofs, 8 axial springs.
// Its free-dof connectivity graph has 7 vertices and 11 edges; the two
// springs E7 and E8 are the only stiffness of the last free dof (ux of
// node 6), so scaling them by `weak_scale` plants a weakly connected dof.
//
// Free dofs in canonical numbering (0-based):
//   0: ux@n1   1: ux@n2   2: uy@n2   3: uy@n3   4: ux@n4   5: uy@n5   6: ux@n6
inline msa::Model portal_frame(double weak_scale = 1.0, double k = 1000.0) {
  msa::Model m;
  m.nodes = {{1, 0, 3}, {2, 3, 4}, {3, 1, 1}, {4, 4, 2}, {5, 6, 5}, {6, 7, 1}};
  const auto spring = [&](int id, int a, int b, double stiff) {
    msa::Element e;
    e.id = id;
    e.kind = msa::ElementKind::spring;
    e.nodes = {a, b};
    e.k = stiff;
    return e;
  };
  m.elements = {
      spring(1, 2, 3, k), spring(2, 2, 5, k), spring(3, 3, 5, k),
      spring(4, 1, 3, k), spring(5, 1, 4, k), spring(6, 4, 5, k),
      spring(7, 4, 6, k * weak_scale), spring(8, 5, 6, k * weak_scale)};
  m.restraints = {{1, {false, true, true}}, {2, {false, false, true}},
                  {3, {true, false, true}}, {4, {false, true, true}},
                  {5, {true, false, true}}, {6, {false, true, true}}};
  return m;
}

/// Portal frame with a second, independent weak dof: node 7 hangs on two
/// extra weak springs, so its ux becomes one more weakly connected dof.
inline msa::Model portal_frame_two_weak(double weak_scale, double k = 1000.0) {
  msa::Model m = portal_frame(weak_scale, k);
  m.nodes.push_back({7, 9, 4});
  msa::Element e;
  e.kind = msa::ElementKind::spring;
  e.k = k * weak_scale;
  e.id = 9;
  e.nodes = {4, 7};
  m.elements.push_back(e);
  e.id = 10;
  e.nodes = {5, 7};
  m.elements.push_back(e);
  m.restraints.push_back({7, {false, true, true}});
  return m;
}

/// Closed square of four beam elements with no restraints: a connected 2D
/// frame whose only zero-energy motions are the three rigid-body modes.
inline msa::Model unrestrained_square(double ea = 2.0e5, double ei = 4.0e3) {
  msa::Model m;
  m.nodes = {{1, 0, 0}, {2, 4, 0}, {3, 4, 4}, {4, 0, 4}};
  const auto beam = [&](int id, int a, int b) {
    msa::Element e;
    e.id = id;
    e.kind = msa::ElementKind::beam2d;
    e.nodes = {a, b};
    e.ea = ea;
    e.ei = ei;
    return e;
  };
  m.elements = {beam(1, 1, 2), beam(2, 2, 3), beam(3, 3, 4), beam(4, 4, 1)};
  return m;
}

/// Two nodes joined by one spring, no restraints (rank-1 stiffness).
inline msa::Model free_spring_pair(double k = 1000.0) {
  msa::Model m;
  m.nodes = {{1, 0, 0}, {2, 2, 0}};
  msa::Element e;
  e.id = 1;
  e.kind = msa::ElementKind::spring;
  e.nodes = {1, 2};
  e.k = k;
  m.elements = {e};
  return m;
}

/// Random valid model: nodes on a jittered grid, elements joining random
/// distinct nodes, every node lightly restrained with some probability.
/// Always leaves at least one free dof.
inline msa::Model random_model(std::mt19937_64& rng, int n_elements) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  msa::Model m;
  const int n_nodes = 3 + static_cast<int>(rng() % (n_elements + 2));
  const int cols = static_cast<int>(std::ceil(std::sqrt(double(n_nodes))));
  for (int i = 0; i < n_nodes; ++i)
    m.nodes.push_back({i + 1, (i % cols) + jitter(rng), (i / cols) + jitter(rng)});
  for (int e = 0; e < n_elements; ++e) {
    const int a = 1 + static_cast<int>(rng() % n_nodes);
    int b = 1 + static_cast<int>(rng() % n_nodes);
    while (b == a) b = 1 + static_cast<int>(rng() % n_nodes);
    msa::Element el;
    el.id = e + 1;
    el.nodes = {a, b};
    const int kind = static_cast<int>(rng() % 3);
    const double mag = std::pow(10.0, 2.0 + 3.0 * unit(rng));
    if (kind == 0) {
      el.kind = msa::ElementKind::spring;
      el.k = mag;
    } else if (kind == 1) {
      el.kind = msa::ElementKind::bar;
      el.ea = mag;
    } else {
      el.kind = msa::ElementKind::beam2d;
      el.ea = mag;
      el.ei = 0.05 * mag;
    }
    m.elements.push_back(el);
  }
  for (const auto& node : m.nodes) {
    msa::Restraint r;
    r.node = node.id;
    for (int d = 0; d < 3; ++d) r.fixed[d] = unit(rng) < 0.3;
    if (r.fixed[0] || r.fixed[1] || r.fixed[2]) m.restraints.push_back(r);
  }
  // Keep at least one free dof.
  if (msa::build_dof_map(m).free_count == 0) m.restraints.pop_back();
  return m;
}

/// Random sparse symmetric positive definite matrix via strict diagonal
/// dominance: off-diagonal entries in [-1, 1], diagonal = |row sum| + slack.
inline msa::SparseSymmetric random_sparse_psd(std::mt19937_64& rng, int n,
                                              int extra_per_row = 3) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<msa::Triplet> triplets;
  std::vector<double> diag(n, 0.0);
  std::set<std::pair<int, int>> used;
  for (int r = 0; r < n; ++r) {
    for (int t = 0; t < extra_per_row; ++t) {
      const int c = static_cast<int>(rng() % n);
      if (c == r) continue;
      const auto key = std::minmax(r, c);
      if (!used.insert({key.first, key.second}).second) continue;
      const double v = 2.0 * unit(rng) - 1.0;
      triplets.push_back({key.first, key.second, v});
      diag[r] += std::abs(v);
      diag[c] += std::abs(v);
    }
  }
  for (int r = 0; r < n; ++r)
    triplets.push_back({r, r, diag[r] + 0.1 + unit(rng)});
  return msa::SparseSymmetric::from_triplets(n, std::move(triplets));
}

/// Dense reference matvec for oracle comparisons.
inline std::vector<double> dense_matvec(const msa::DenseMatrix& a,
                                        const std::vector<double>& x) {
  std::vector<double> y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
  return y;
}

/// Undirected free-dof graph edges induced by the element maps: each
/// element makes a clique over its free dofs.
inline std::set<std::pair<int, int>> dof_graph_edges(const msa::DofMap& dm) {
  std::set<std::pair<int, int>> edges;
  for (const auto& m : dm.element_dofs)
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = i + 1; j < m.size(); ++j) {
        if (m[i] == msa::kRestrained || m[j] == msa::kRestrained) continue;
        edges.insert(std::minmax(m[i], m[j]));
      }
  return edges;
}

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = gauss(rng);
    s += x * x;
  }
  s = std::sqrt(s);
  for (auto& x : v) x /= s;
  return v;
}

} // namespace fixtures
