#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msa/assembly.hpp"
#include "msa/conditioning.hpp"
#include "msa/digest.hpp"
#include "msa/eigen.hpp"
#include "msa/errors.hpp"
#include "msa/model.hpp"
#include "msa/sparse.hpp"

namespace msa {

// ---------------------------------------------------------------------------
// Spectral gap
// ---------------------------------------------------------------------------

struct GapCandidate {
  int k = 0;      // 1-based index into the smallest eigenvalues
  double lhs = 0; // lambda_{k-1}/lambda_k (1 at k = 1 by convention)
  double rhs = 0; // gf * lambda_k/lambda_{k+1}
};

struct GapResult {
  std::optional<int> k; // last eigenvalue inside the small cluster, 1-based
  double gap_factor = 0.0;
  std::vector<GapCandidate> table; // every inspected candidate
};

/// Looks for the smallest k < n_s with lambda_{k-1}/lambda_k >
/// gf * lambda_k/lambda_{k+1}. At k = 1 the left side is taken as 1.
/// Eigenvalues at or below 1e-300 are clamped to 1e-300 first, so exact
/// zeros (rigid-body modes) register as maximal gaps instead of 0/0.
inline GapResult detect_gap(std::span<const double> lambdas_smallest,
                            double gf) {
  GapResult result;
  result.gap_factor = gf;
  const int ns = static_cast<int>(lambdas_smallest.size());
  if (ns < 2) return result; // no candidate k exists
  std::vector<double> lam(lambdas_smallest.begin(), lambdas_smallest.end());
  for (double& v : lam) v = std::max(v, 1e-300);
  for (int k = 1; k < ns; ++k) {
    GapCandidate c;
    c.k = k;
    c.lhs = (k == 1) ? 1.0 : lam[k - 2] / lam[k - 1];
    c.rhs = gf * lam[k - 1] / lam[k];
    result.table.push_back(c);
    if (!result.k && c.lhs > c.rhs) result.k = k;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Per-element energies
// ---------------------------------------------------------------------------

/// v_e = 1/2 * ||u(m_e)||^2 over the element's free dofs.
inline std::vector<double> energy_v(std::span<const double> u,
                                    const DofMap& dofmap) {
  std::vector<double> out;
  out.reserve(dofmap.element_dofs.size());
  for (const auto& m : dofmap.element_dofs) {
    double s = 0.0;
    for (int g : m)
      if (g != kRestrained) s += u[g] * u[g];
    out.push_back(0.5 * s);
  }
  return out;
}

/// s_e = 1/2 * u(m_e)^T (T^T K T) u(m_e); restrained entries contribute 0.
inline std::vector<double> energy_s(
    std::span<const double> u, std::span<const ElementStiffness> matrices,
    const DofMap& dofmap) {
  std::vector<double> out;
  out.reserve(dofmap.element_dofs.size());
  for (std::size_t e = 0; e < dofmap.element_dofs.size(); ++e) {
    const auto& m = dofmap.element_dofs[e];
    const DenseMatrix g = matrices[e].global();
    const int ne = static_cast<int>(m.size());
    std::vector<double> x(ne, 0.0);
    for (int i = 0; i < ne; ++i)
      if (m[i] != kRestrained) x[i] = u[m[i]];
    double s = 0.0;
    for (int i = 0; i < ne; ++i) {
      double row = 0.0;
      for (int j = 0; j < ne; ++j) row += g(i, j) * x[j];
      s += x[i] * row;
    }
    out.push_back(0.5 * s);
  }
  return out;
}

struct NormalizedEnergies {
  std::vector<double> values;
  bool degenerate = false; // all raw energies were zero
};

/// Divides by the maximum so the largest element is exactly 1. An all-zero
/// field is returned unchanged and flagged degenerate.
inline NormalizedEnergies normalize_energies(std::span<const double> raw) {
  NormalizedEnergies out;
  out.values.assign(raw.begin(), raw.end());
  double m = 0.0;
  for (double v : raw) m = std::max(m, v);
  if (m <= 0.0) {
    out.degenerate = true;
    return out;
  }
  for (double& v : out.values) v /= m;
  return out;
}

enum class ClusterLabel { suspect, sound };

struct Partition {
  std::vector<ClusterLabel> labels;
  bool no_separation = false; // the field has no usable gap; all suspect
};

/// Two-way split of normalized energies: sort descending, clamp below
/// 1e-15, cut at the largest log-gap between consecutive values. The
/// maximal element is always suspect; ties pick the smaller suspect set.
inline Partition partition_two_clusters(std::span<const double> normalized) {
  const int n = static_cast<int>(normalized.size());
  Partition out;
  out.labels.assign(n, ClusterLabel::sound);
  if (n == 0) return out;

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (normalized[a] != normalized[b]) return normalized[a] > normalized[b];
    return a < b;
  });
  const auto clamped_log = [&](int i) {
    return std::log(std::max(normalized[order[i]], 1e-15));
  };
  int split = -1; // index of the last suspect in sorted order
  double best = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double gap = clamped_log(i) - clamped_log(i + 1);
    if (gap > best) {
      best = gap;
      split = i;
    }
  }
  if (split < 0) {
    out.no_separation = true; // uniform values (or a single element)
    for (auto& l : out.labels) l = ClusterLabel::suspect;
    return out;
  }
  for (int i = 0; i <= split; ++i)
    out.labels[order[i]] = ClusterLabel::suspect;
  return out;
}

// ---------------------------------------------------------------------------
// Full analysis
// ---------------------------------------------------------------------------

/// Clustered energies of one eigenvector. `eigenvector` is the 1-based
/// position in the full ascending spectrum (1..k for v-fields,
/// n-n_l+1..n for s-fields). Raw and normalized values are kept; mapping
/// out-of-cluster values to zero is a display transform in the report
/// layer only.
struct EnergyField {
  int eigenvector = 0;
  char kind = 'v'; // 'v' (eigenvector mass) or 's' (strain energy)
  double lambda = 0.0;
  std::vector<double> raw;
  std::vector<double> normalized;
  std::vector<ClusterLabel> labels;
  bool degenerate = false;
  bool no_separation = false;
};

struct AnalysisParams {
  int n_smallest = 8;
  int n_largest = 0;
  double gap_factor = 10.0;
  double tol = 1e-8;
  double cond_threshold = 1e10;
  unsigned long long seed = 42;
  std::string input_digest; // filled by the caller (CLI hashes the file)
};

struct StabilityReport {
  std::string version;
  std::string input_digest;
  AnalysisParams params;
  std::vector<int> element_ids; // order of every per-element array
  ConditionEstimate condition;
  std::vector<double> smallest_eigenvalues;
  std::vector<double> largest_eigenvalues;
  std::vector<double> smallest_residuals;
  std::vector<double> largest_residuals;
  GapResult gap;
  std::vector<EnergyField> fields;
  std::vector<std::string> warnings;
  int free_dofs = 0;
  EigenSet eigen; // full eigenpairs, for library consumers
};

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kNoGapWarning =
    "no spectral gap detected; try a larger n_s";

/// The whole pipeline: assemble -> condition estimate -> extreme eigenpairs
/// -> gap detection -> per-element energies -> normalization -> clustering.
/// v-fields are produced for eigenvectors 1..k inside the gap (none when no
/// gap is found; the report then carries a warning), s-fields for all
/// n_largest pairs.
inline StabilityReport run_stability_analysis(const Model& model,
                                              const AnalysisParams& params) {
  if (params.n_smallest < 0 || params.n_largest < 0 ||
      params.n_smallest + params.n_largest < 1)
    throw std::invalid_argument(
        "n_smallest and n_largest must be non-negative and not both zero");
  if (params.gap_factor < 1.0)
    throw std::invalid_argument("gap factor must be >= 1");
  validate(model);

  StabilityReport report;
  report.version = kVersion;
  report.params = params;
  // The CLI passes a digest of the raw model file; library callers fall
  // back to hashing the canonical serialization.
  report.input_digest = params.input_digest.empty()
                            ? content_digest(serialize_model(model))
                            : params.input_digest;

  const DofMap dofmap = build_dof_map(model);
  report.free_dofs = dofmap.free_count;
  const auto matrices = all_element_matrices(model);
  const SparseSymmetric a = assemble(model, dofmap);
  for (const auto& e : model.elements) report.element_ids.push_back(e.id);

  if (params.n_smallest + params.n_largest > dofmap.free_count)
    throw std::invalid_argument(
        "n_s + n_l exceeds the number of free dofs (" +
        std::to_string(dofmap.free_count) + ")");

  EigenOptions eig_opts;
  eig_opts.tol = params.tol;
  eig_opts.seed = params.seed;

  report.condition =
      estimate_condition(a, params.cond_threshold, eig_opts);
  report.eigen = solve_extreme_eigenpairs(a, params.n_smallest,
                                          params.n_largest, eig_opts);
  for (const auto& p : report.eigen.smallest) {
    report.smallest_eigenvalues.push_back(p.lambda);
    report.smallest_residuals.push_back(p.residual);
  }
  for (const auto& p : report.eigen.largest) {
    report.largest_eigenvalues.push_back(p.lambda);
    report.largest_residuals.push_back(p.residual);
  }

  report.gap = detect_gap(report.smallest_eigenvalues, params.gap_factor);
  if (!report.gap.k) report.warnings.push_back(kNoGapWarning);

  const auto finish_field = [&](EnergyField field) {
    auto norm = normalize_energies(field.raw);
    field.normalized = std::move(norm.values);
    field.degenerate = norm.degenerate;
    if (field.degenerate) {
      field.labels.assign(field.raw.size(), ClusterLabel::sound);
      report.warnings.push_back(
          std::string("energy field ") + field.kind + " for eigenvector " +
          std::to_string(field.eigenvector) +
          " is identically zero; excluded from clustering");
    } else {
      auto part = partition_two_clusters(field.normalized);
      field.labels = std::move(part.labels);
      field.no_separation = part.no_separation;
      if (field.no_separation)
        report.warnings.push_back(
            std::string("energy field ") + field.kind + " for eigenvector " +
            std::to_string(field.eigenvector) +
            " shows no cluster separation");
    }
    report.fields.push_back(std::move(field));
  };

  if (report.gap.k) {
    for (int i = 0; i < *report.gap.k; ++i) {
      EnergyField field;
      field.eigenvector = i + 1;
      field.kind = 'v';
      field.lambda = report.eigen.smallest[i].lambda;
      field.raw = energy_v(report.eigen.smallest[i].vector, dofmap);
      finish_field(std::move(field));
    }
  }
  for (std::size_t i = 0; i < report.eigen.largest.size(); ++i) {
    EnergyField field;
    field.eigenvector = dofmap.free_count - params.n_largest +
                        static_cast<int>(i) + 1;
    field.kind = 's';
    field.lambda = report.eigen.largest[i].lambda;
    field.raw = energy_s(report.eigen.largest[i].vector, matrices, dofmap);
    finish_field(std::move(field));
  }

  return report;
}

} // namespace msa
