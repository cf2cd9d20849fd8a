#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "msa/cholesky.hpp"
#include "msa/dense.hpp"
#include "msa/errors.hpp"
#include "msa/sparse.hpp"

namespace msa {

struct EigenPair {
  double lambda = 0.0;
  std::vector<double> vector;
  double residual = 0.0; // ||A u - lambda u||_2
};

/// Extreme eigenpairs of a sparse symmetric matrix: the n_s smallest and
/// n_l largest, each list ascending, eigenvectors unit 2-norm.
struct EigenSet {
  std::vector<EigenPair> smallest;
  std::vector<EigenPair> largest;
  double norm1 = 0.0; // ||A||_1, the residual scale
  unsigned long long seed = 0;
};

struct EigenOptions {
  double tol = 1e-8;            // accept when ||Au-λu|| <= tol*max(1,||A||_1)
  unsigned long long seed = 42; // starting-vector seed
  double sigma_scale = 1e-8;    // shift σ = -sigma_scale*||A||_1
  int max_steps_override = 0;   // 0 = spec cap 10*(n_s+n_l)+200
};

struct DenseEigen {
  std::vector<double> lambdas; // ascending
  DenseMatrix vectors;         // orthonormal columns, aligned with lambdas
};

namespace detail {

/// Implicit-shift QL for a symmetric tridiagonal matrix (classic EISPACK
/// tql2 scheme). d = diagonal, e = off-diagonal (size n-1). On return d
/// holds eigenvalues ascending and the columns of z the eigenvectors.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double> e,
                           DenseMatrix& z) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd)
          break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw SolverError("tridiagonal QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < z.rows(); ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  // ascending order, carrying the eigenvector columns along
  for (int i = 0; i < n - 1; ++i) {
    int k = i;
    for (int j = i + 1; j < n; ++j)
      if (d[j] < d[k]) k = j;
    if (k != i) {
      std::swap(d[i], d[k]);
      for (int r = 0; r < z.rows(); ++r) {
        const double tmp = z(r, i);
        z(r, i) = z(r, k);
        z(r, k) = tmp;
      }
    }
  }
}

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// Lanczos tridiagonalization with full (two-pass) reorthogonalization.
/// On breakdown the basis is extended with a fresh random direction, so the
/// session can always reach an invariant subspace of the full space.
class LanczosSession {
public:
  LanczosSession(int n, std::mt19937_64& rng) : n_(n), rng_(rng) {
    basis_.push_back(random_unit());
  }

  int steps() const { return static_cast<int>(alpha_.size()); }
  bool exhausted() const { return exhausted_; }

  /// One Lanczos step with operator op(x, y). Returns false once the basis
  /// spans the whole space (no further extension possible).
  template <class Op>
  bool step(Op&& op) {
    if (exhausted_) return false;
    const int j = steps();
    std::vector<double> w(n_);
    op(std::span<const double>(basis_[j]), std::span<double>(w));
    const double a = dot(w, basis_[j]);
    alpha_.push_back(a);
    for (int i = 0; i < n_; ++i) w[i] -= a * basis_[j][i];
    if (j > 0 && beta_[j - 1] != 0.0)
      for (int i = 0; i < n_; ++i) w[i] -= beta_[j - 1] * basis_[j - 1][i];
    reorthogonalize(w);
    const double b = norm2(w);
    tnorm_ = std::max({tnorm_, std::abs(a), b});
    const double tiny = 64.0 * std::numeric_limits<double>::epsilon() *
                        std::max(1.0, tnorm_);
    if (b > tiny) {
      beta_.push_back(b);
      for (int i = 0; i < n_; ++i) w[i] /= b;
      basis_.push_back(std::move(w));
      return true;
    }
    // Invariant subspace found: restart with a fresh orthogonal direction.
    beta_.push_back(0.0);
    if (static_cast<int>(basis_.size()) >= n_) {
      exhausted_ = true;
      return false;
    }
    for (int attempt = 0; attempt < 16; ++attempt) {
      std::vector<double> v = random_unit();
      reorthogonalize(v);
      const double nv = norm2(v);
      if (nv > 1e-3) { // random vector has O(1) mass outside span(V)
        for (int i = 0; i < n_; ++i) v[i] /= nv;
        basis_.push_back(std::move(v));
        return true;
      }
    }
    exhausted_ = true;
    return false;
  }

  struct Ritz {
    double theta = 0.0;  // operator eigenvalue estimate
    double bound = 0.0;  // residual estimate |beta_m * s_mi| in operator space
    std::vector<double> y; // Ritz vector, unit norm
  };

  /// The `count` algebraically largest Ritz pairs of the current subspace.
  std::vector<Ritz> top_ritz(int count) const {
    const int m = steps();
    std::vector<double> d = alpha_;
    std::vector<double> e(beta_.begin(),
                          beta_.begin() + std::max(0, m - 1));
    DenseMatrix z = DenseMatrix::identity(m);
    tridiagonal_ql(d, std::move(e), z);
    const double beta_last = beta_.empty() ? 0.0 : beta_[m - 1];
    std::vector<Ritz> out;
    for (int t = 0; t < std::min(count, m); ++t) {
      const int col = m - 1 - t; // ascending order -> take from the top
      Ritz r;
      r.theta = d[col];
      r.bound = std::abs(beta_last * z(m - 1, col));
      r.y.assign(n_, 0.0);
      for (int q = 0; q < m; ++q) {
        const double zq = z(q, col);
        if (zq == 0.0) continue;
        for (int i = 0; i < n_; ++i) r.y[i] += zq * basis_[q][i];
      }
      const double ny = norm2(r.y);
      if (ny > 0.0)
        for (int i = 0; i < n_; ++i) r.y[i] /= ny;
      out.push_back(std::move(r));
    }
    return out;
  }

private:
  std::vector<double> random_unit() {
    std::vector<double> v(n_);
    double nrm = 0.0;
    do {
      for (int i = 0; i < n_; ++i) v[i] = 2.0 * unit_uniform(rng_) - 1.0;
      nrm = norm2(v);
    } while (nrm == 0.0);
    for (int i = 0; i < n_; ++i) v[i] /= nrm;
    return v;
  }

  void reorthogonalize(std::vector<double>& w) const {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis_) {
        const double c = dot(w, v);
        if (c == 0.0) continue;
        for (int i = 0; i < n_; ++i) w[i] -= c * v[i];
      }
  }

  int n_;
  std::mt19937_64& rng_;
  std::vector<std::vector<double>> basis_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  double tnorm_ = 0.0;
  bool exhausted_ = false;
};

struct VerifiedPair {
  EigenPair pair;
  bool ok = false;
};

/// Rayleigh-quotient refresh + true residual against A; eigenvalues
/// indistinguishable from zero at machine precision are snapped to 0 so
/// rigid-body modes register exactly.
inline VerifiedPair verify_against_matrix(const SparseSymmetric& a,
                                          std::vector<double> u, double scale,
                                          double tol) {
  std::vector<double> au(a.dim());
  a.matvec(u, au);
  double lambda = dot(au, u);
  if (std::abs(lambda) <= 1e-14 * scale) lambda = 0.0;
  double r2 = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double ri = au[i] - lambda * u[i];
    r2 += ri * ri;
  }
  VerifiedPair v;
  v.pair.lambda = lambda;
  v.pair.vector = std::move(u);
  v.pair.residual = std::sqrt(r2);
  v.ok = v.pair.residual <= tol * scale;
  return v;
}

inline void canonicalize_sign(std::vector<double>& u) {
  int imax = 0;
  for (std::size_t i = 1; i < u.size(); ++i)
    if (std::abs(u[i]) > std::abs(u[imax])) imax = static_cast<int>(i);
  if (u[imax] < 0.0)
    for (auto& x : u) x = -x;
}

} // namespace detail

/// Full dense eigendecomposition by cyclic Jacobi rotations; the
/// verification oracle for the sparse path. Stops when the off-diagonal
/// Frobenius norm falls below 1e-12 * ||A||_F.
inline DenseEigen jacobi_eigendecomposition(DenseMatrix a) {
  if (a.rows() != a.cols()) throw Error("jacobi: matrix must be square");
  const int n = a.rows();
  DenseMatrix v = DenseMatrix::identity(n);
  double norm_f = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) norm_f += a(i, j) * a(i, j);
  norm_f = std::sqrt(norm_f);
  const double target = 1e-12 * norm_f;

  const auto off_norm = [&] {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  int sweep = 0;
  while (off_norm() > target) {
    if (++sweep > 100)
      throw SolverError("Jacobi eigendecomposition failed to converge");
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t =
            std::copysign(1.0, theta) /
            (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k != p && k != q) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(p, k) = a(k, p);
            a(k, q) = s * akp + c * akq;
            a(q, k) = a(k, q);
          }
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  DenseEigen out;
  out.lambdas.resize(n);
  for (int i = 0; i < n; ++i) out.lambdas[i] = a(i, i);
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return out.lambdas[x] < out.lambdas[y]; });
  std::sort(out.lambdas.begin(), out.lambdas.end());
  out.vectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  return out;
}

/// Dense brute-force oracle over the sparse type. Guarded to n <= 2000.
inline DenseEigen dense_oracle_eig(const SparseSymmetric& a) {
  if (a.dim() > 2000)
    throw Error("dense_oracle_eig: dimension guard exceeded (n <= 2000)");
  return jacobi_eigendecomposition(a.to_dense());
}

/// Extreme eigenpairs of A: the n_small smallest via shift-invert Lanczos
/// (shift σ = -sigma_scale*||A||_1 keeps A - σI positive definite even for
/// singular PSD A) and the n_large largest via plain Lanczos, both with
/// full reorthogonalization and a fixed seeded starting vector.
inline EigenSet solve_extreme_eigenpairs(const SparseSymmetric& a, int n_small,
                                         int n_large,
                                         const EigenOptions& opts = {}) {
  const int n = a.dim();
  if (n_small < 0 || n_large < 0)
    throw std::invalid_argument("eigenpair counts must be non-negative");
  if (n_small + n_large < 1)
    throw std::invalid_argument("at least one eigenpair must be requested");
  if (n_small + n_large > n)
    throw std::invalid_argument(
        "requested " + std::to_string(n_small + n_large) +
        " eigenpairs from a matrix of dimension " + std::to_string(n));

  EigenSet out;
  out.seed = opts.seed;
  out.norm1 = a.norm1();
  const double scale = std::max(1.0, out.norm1);

  if (a.nnz() == 0) {
    // Zero matrix: every unit vector is an eigenvector for eigenvalue 0.
    const auto basis_pair = [&](int i) {
      EigenPair p;
      p.lambda = 0.0;
      p.vector.assign(n, 0.0);
      p.vector[i] = 1.0;
      p.residual = 0.0;
      return p;
    };
    for (int i = 0; i < n_small; ++i) out.smallest.push_back(basis_pair(i));
    for (int i = n - n_large; i < n; ++i) out.largest.push_back(basis_pair(i));
    return out;
  }

  const int cap = opts.max_steps_override > 0
                      ? opts.max_steps_override
                      : 10 * (n_small + n_large) + 200;
  std::mt19937_64 rng(opts.seed);

  // Runs one Lanczos sweep on `op`, accepting the `want` top Ritz pairs of
  // the operator once the mapped A-space residuals meet the bound.
  // `bound_to_a_residual(theta, bound)` converts an operator-space residual
  // estimate to an A-space one.
  const auto drive = [&](auto&& op, int want, auto&& bound_to_a_residual)
      -> std::vector<EigenPair> {
    detail::LanczosSession session(n, rng);
    double safety = 0.5;
    const int check_every = 4;
    while (true) {
      const bool extended = session.step(op);
      const bool last_chance = !extended || session.steps() >= cap;
      const bool due = last_chance || (session.steps() >= want &&
                                       session.steps() % check_every == 0);
      if (!due) continue;
      auto ritz = session.top_ritz(want);
      bool plausible = static_cast<int>(ritz.size()) == want;
      if (plausible)
        for (const auto& r : ritz)
          if (bound_to_a_residual(r.theta, r.bound) >
              safety * opts.tol * scale) {
            plausible = false;
            break;
          }
      if (!plausible && !last_chance) continue;
      std::vector<EigenPair> pairs;
      bool all_ok = true;
      double worst = 0.0;
      for (auto& r : ritz) {
        auto v =
            detail::verify_against_matrix(a, std::move(r.y), scale, opts.tol);
        worst = std::max(worst, v.pair.residual);
        all_ok = all_ok && v.ok;
        pairs.push_back(std::move(v.pair));
      }
      if (all_ok && static_cast<int>(pairs.size()) == want) return pairs;
      if (last_chance)
        throw SolverError("eigensolver did not converge within " +
                          std::to_string(session.steps()) +
                          " Lanczos steps; worst residual " +
                          std::to_string(worst) + " vs bound " +
                          std::to_string(opts.tol * scale));
      safety *= 0.1; // demand tighter subspace bounds before re-verifying
    }
  };

  if (n_small > 0) {
    const double sigma = -opts.sigma_scale * out.norm1;
    SparseCholesky factor(a, -sigma); // A - σI
    const double shifted_norm = out.norm1 + std::abs(sigma);
    auto pairs = drive(
        [&](std::span<const double> x, std::span<double> y) {
          factor.solve(x, y);
        },
        n_small,
        [&](double theta, double bound) {
          if (theta <= 0.0) return std::numeric_limits<double>::infinity();
          return shifted_norm * bound / theta;
        });
    std::sort(pairs.begin(), pairs.end(),
              [](const EigenPair& x, const EigenPair& y) {
                return x.lambda < y.lambda;
              });
    for (auto& p : pairs) detail::canonicalize_sign(p.vector);
    out.smallest = std::move(pairs);
  }

  if (n_large > 0) {
    auto pairs = drive(
        [&](std::span<const double> x, std::span<double> y) {
          a.matvec(x, y);
        },
        n_large, [](double, double bound) { return bound; });
    std::sort(pairs.begin(), pairs.end(),
              [](const EigenPair& x, const EigenPair& y) {
                return x.lambda < y.lambda;
              });
    for (auto& p : pairs) detail::canonicalize_sign(p.vector);
    out.largest = std::move(pairs);
  }

  return out;
}

} // namespace msa
