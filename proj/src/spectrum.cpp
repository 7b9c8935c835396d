#include "spectrahar/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <new>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <lapacke.h>

#include "spectrahar/errors.hpp"

namespace spectrahar {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct DenseResult {
  Eigen::VectorXd values;   // all eigenvalues, ascending
  Eigen::MatrixXd vectors;  // first n_vectors eigenvectors
};

// Eigen's QL solver for tiny blocks and for any LAPACK failure.
DenseResult dense_eigen_fallback(const Eigen::MatrixXd& L, Eigen::Index n_vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L, n_vectors > 0 ? Eigen::ComputeEigenvectors
                                                                     : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed to converge");
  DenseResult out;
  out.values = es.eigenvalues();
  if (n_vectors > 0) out.vectors = es.eigenvectors().leftCols(std::min(n_vectors, L.rows()));
  return out;
}

// OpenBLAS picks kernel paths by pointer alignment, so every array handed to
// LAPACK lives at a fixed 64-byte alignment; otherwise results vary in the
// last bits with the allocator (and hence with the thread count).
template <typename T>
class AlignedArray {
 public:
  explicit AlignedArray(std::size_t n) : n_(std::max<std::size_t>(n, 1)) {
    const std::size_t bytes = (n_ * sizeof(T) + 63) / 64 * 64;
    ptr_ = static_cast<T*>(std::aligned_alloc(64, bytes));
    if (!ptr_) throw std::bad_alloc();
    std::fill(ptr_, ptr_ + n_, T{});
  }
  ~AlignedArray() { std::free(ptr_); }
  AlignedArray(const AlignedArray&) = delete;
  AlignedArray& operator=(const AlignedArray&) = delete;
  T* data() { return ptr_; }
  T& operator[](std::size_t i) { return ptr_[i]; }

 private:
  std::size_t n_;
  T* ptr_;
};

// Dense route for one block: tridiagonalize (dsytrd), all eigenvalues from the
// tridiagonal (dsterf), leading eigenvectors by bisection and inverse
// iteration (dstebz, dstein), back-transformed with the stored reflectors.
DenseResult dense_eigen(const Eigen::MatrixXd& L, Eigen::Index n_vectors) {
  const lapack_int n = static_cast<lapack_int>(L.rows());
  if (n <= 8) return dense_eigen_fallback(L, n_vectors);
  const auto un = static_cast<std::size_t>(n);
  const lapack_int m = static_cast<lapack_int>(std::min<Eigen::Index>(n_vectors, n));
  const auto um = static_cast<std::size_t>(m);

  AlignedArray<double> A(un * un), d(un), e(un), tau(un);
  std::copy(L.data(), L.data() + un * un, A.data());

  double query = 0.0;
  lapack_int info = LAPACKE_dsytrd_work(LAPACK_COL_MAJOR, 'L', n, A.data(), n, d.data(), e.data(), tau.data(),
                                        &query, -1);
  if (info != 0) return dense_eigen_fallback(L, n_vectors);
  const lapack_int lwork = std::max<lapack_int>(static_cast<lapack_int>(query), 5 * n);
  AlignedArray<double> work(static_cast<std::size_t>(lwork));
  info = LAPACKE_dsytrd_work(LAPACK_COL_MAJOR, 'L', n, A.data(), n, d.data(), e.data(), tau.data(), work.data(),
                             lwork);
  if (info != 0) return dense_eigen_fallback(L, n_vectors);

  DenseResult out;
  {
    AlignedArray<double> values(un), e_copy(un);
    std::copy(d.data(), d.data() + un, values.data());
    std::copy(e.data(), e.data() + un, e_copy.data());
    info = LAPACKE_dsterf_work(n, values.data(), e_copy.data());
    if (info != 0) return dense_eigen_fallback(L, n_vectors);
    out.values = Eigen::Map<Eigen::VectorXd>(values.data(), n);
  }

  if (m > 0) {
    AlignedArray<double> w(un), z(un * um);
    AlignedArray<lapack_int> iblock(un), isplit(un), iwork(3 * un), ifail(um);
    lapack_int found = 0, nsplit = 0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    info = LAPACKE_dstebz_work('I', 'B', n, 0.0, 0.0, 1, m, abstol, d.data(), e.data(), &found, &nsplit, w.data(),
                               iblock.data(), isplit.data(), work.data(), iwork.data());
    if (info != 0 || found != m) return dense_eigen_fallback(L, n_vectors);
    info = LAPACKE_dstein_work(LAPACK_COL_MAJOR, n, d.data(), e.data(), m, w.data(), iblock.data(), isplit.data(),
                               z.data(), n, work.data(), iwork.data(), ifail.data());
    if (info != 0) return dense_eigen_fallback(L, n_vectors);
    // 'B' order groups pairs by split block; restore ascending order
    std::vector<lapack_int> order(um);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](lapack_int a, lapack_int b) { return w[a] < w[b]; });
    {
      AlignedArray<double> sorted(un * um);
      for (std::size_t j = 0; j < um; ++j)
        std::copy(z.data() + order[j] * un, z.data() + (order[j] + 1) * un, sorted.data() + j * un);
      std::copy(sorted.data(), sorted.data() + un * um, z.data());
    }
    // back-transform: Q = H(1) ... H(n-1) from the dsytrd reflectors
    const Eigen::Map<const Eigen::MatrixXd> reflectors(A.data(), n, n);
    const Eigen::Map<const Eigen::VectorXd> coeffs(tau.data(), n - 1);
    out.vectors = Eigen::Map<Eigen::MatrixXd>(z.data(), n, m);
    out.vectors.applyOnTheLeft(Eigen::HouseholderSequence<Eigen::Map<const Eigen::MatrixXd>,
                                                          Eigen::Map<const Eigen::VectorXd>>(reflectors, coeffs)
                                   .setLength(n - 1)
                                   .setShift(1));

    const double scale = std::max(1.0, out.values.cwiseAbs().maxCoeff());
    const Eigen::MatrixXd R = L * out.vectors - out.vectors * out.values.head(m).asDiagonal();
    const Eigen::VectorXd norms = out.vectors.colwise().norm();
    if (R.colwise().norm().maxCoeff() > 1e-9 * scale || (norms.array() - 1.0).abs().maxCoeff() > 1e-9)
      return dense_eigen_fallback(L, n_vectors);
  }
  return out;
}

// Smallest `count` eigenpairs of a connected Laplacian block via Lanczos on
// (L + shift I)^-1 with full reorthogonalization. A single start vector only
// resolves one copy of a repeated eigenvalue inside the block; components
// are split beforehand so the zero eigenvalue is always simple here.
DenseResult shift_invert_lanczos(const SparseMatrix& L, Eigen::Index count) {
  const Eigen::Index n = L.rows();
  const double shift = 1e-2;
  SparseMatrix shifted = L;
  for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift;
  Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
  if (solver.info() != Eigen::Success) throw NumericError("sparse factorization failed in Lanczos");

  std::mt19937_64 rng(0x5eed1234ULL);
  std::normal_distribution<double> gauss;
  auto random_unit = [&](const Eigen::MatrixXd& basis, Eigen::Index used) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    for (int pass = 0; pass < 2; ++pass)
      v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    return Eigen::VectorXd(v / v.norm());
  };

  Eigen::MatrixXd V(n, std::min<Eigen::Index>(n, std::max<Eigen::Index>(2 * count + 20, 64)));
  std::vector<double> alpha, beta;
  V.col(0) = random_unit(V, 0);
  Eigen::Index steps = 0;
  double last_beta = 0.0;

  while (true) {
    Eigen::VectorXd w = solver.solve(V.col(steps));
    const double a = V.col(steps).dot(w);
    alpha.push_back(a);
    w -= a * V.col(steps);
    if (steps > 0) w -= last_beta * V.col(steps - 1);
    for (int pass = 0; pass < 2; ++pass)
      w -= V.leftCols(steps + 1) * (V.leftCols(steps + 1).transpose() * w);
    double b = w.norm();
    ++steps;

    const bool exhausted = steps == n;
    bool check = exhausted || (steps >= count && (steps % 8 == 0));
    if (check) {
      const Eigen::Index k = static_cast<Eigen::Index>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
      for (Eigen::Index i = 0; i < k; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      // largest theta <-> smallest lambda
      bool converged = true;
      const Eigen::Index want = std::min(count, k);
      for (Eigen::Index i = 0; i < want && !exhausted; ++i) {
        const Eigen::Index col = k - 1 - i;
        const double theta = es.eigenvalues()[col];
        if (std::abs(b * es.eigenvectors()(k - 1, col)) > 1e-11 * std::abs(theta)) {
          converged = false;
          break;
        }
      }
      if (converged && want == count && (exhausted || b >= 1e-10)) {
        DenseResult out;
        out.values.resize(count);
        out.vectors.resize(n, count);
        for (Eigen::Index i = 0; i < count; ++i) {
          const Eigen::Index col = k - 1 - i;
          Eigen::VectorXd u = V.leftCols(k) * es.eigenvectors().col(col);
          u.normalize();
          out.vectors.col(i) = u;
          out.values[i] = u.dot(L * u);
        }
        // Rayleigh quotients can reorder nearly equal values.
        std::vector<Eigen::Index> order(count);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index x, Eigen::Index y) { return out.values[x] < out.values[y]; });
        DenseResult sorted;
        sorted.values.resize(count);
        sorted.vectors.resize(n, count);
        for (Eigen::Index i = 0; i < count; ++i) {
          sorted.values[i] = out.values[order[i]];
          sorted.vectors.col(i) = out.vectors.col(order[i]);
        }
        return sorted;
      }
      if (exhausted) throw NumericError("Lanczos failed to converge");
    }

    if (steps == V.cols()) V.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(n, 2 * V.cols()));
    if (b < 1e-10) {
      // invariant subspace reached; continue from a fresh orthogonal direction
      b = 0.0;
      V.col(steps) = random_unit(V, steps);
    } else {
      V.col(steps) = w / b;
    }
    beta.push_back(b);
    last_beta = b;
  }
}

std::vector<std::vector<Eigen::Index>> components_of(const SparseMatrix& L) {
  const Eigen::Index n = L.rows();
  std::vector<int> label(n, -1);
  std::vector<std::vector<Eigen::Index>> comps;
  std::vector<Eigen::Index> stack;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(comps.size());
    comps.emplace_back();
    label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      Eigen::Index v = stack.back();
      stack.pop_back();
      comps[id].push_back(v);
      for (SparseMatrix::InnerIterator it(L, v); it; ++it) {
        if (it.value() != 0.0 && label[it.row()] < 0) {
          label[it.row()] = id;
          stack.push_back(it.row());
        }
      }
    }
    std::sort(comps[id].begin(), comps[id].end());
  }
  return comps;
}

void clamp_eigenvalues(std::vector<double>& values) {
  if (values.empty()) return;
  const double top = *std::max_element(values.begin(), values.end());
  const double tol = 1e-8 * std::max(1.0, top);
  // roundoff on a component's zero eigenvalue is O(eps * lambda_max)
  const double zero = 1e-11 * std::max(1.0, top);
  for (double& v : values) {
    if (v < -tol) throw NumericError("Laplacian eigenvalue " + std::to_string(v) + " is negative");
    if (v < zero) v = 0.0;
  }
}

Spectrum decompose_by_components(const LaplacianMatrix& L, Eigen::Index wanted, Eigen::Index n_vectors,
                                 const SpectrumOptions& options) {
  const Eigen::Index n = L.dimension();
  struct Candidate {
    double value;
    std::size_t comp;
    Eigen::Index local;
  };
  const auto comps = components_of(L.entries);
  const bool full = static_cast<std::size_t>(n) <= options.dense_limit;
  std::vector<Eigen::Index> local(static_cast<std::size_t>(n), -1);
  std::vector<DenseResult> results(comps.size());
  std::vector<Candidate> candidates;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    const auto& idx = comps[c];
    const Eigen::Index size = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index take = full ? size : std::min(size, wanted);
    if (static_cast<std::size_t>(size) <= options.dense_limit) {
      Eigen::MatrixXd block = Eigen::MatrixXd::Zero(size, size);
      for (Eigen::Index a = 0; a < size; ++a) local[idx[a]] = a;
      for (Eigen::Index a = 0; a < size; ++a)
        for (SparseMatrix::InnerIterator it(L.entries, idx[a]); it; ++it) block(local[it.row()], a) = it.value();
      results[c] = dense_eigen(block, std::min(size, n_vectors));
    } else {
      std::vector<Eigen::Triplet<double>> trips;
      for (Eigen::Index a = 0; a < size; ++a) local[idx[a]] = a;
      for (Eigen::Index a = 0; a < size; ++a)
        for (SparseMatrix::InnerIterator it(L.entries, idx[a]); it; ++it)
          trips.emplace_back(local[it.row()], a, it.value());
      SparseMatrix block(size, size);
      block.setFromTriplets(trips.begin(), trips.end());
      results[c] = shift_invert_lanczos(block, take);
    }
    for (Eigen::Index i = 0; i < take; ++i) candidates.push_back({results[c].values[i], c, i});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  const auto n_candidates = static_cast<Eigen::Index>(candidates.size());
  const Eigen::Index keep = full ? n_candidates : std::min(wanted, n_candidates);

  Spectrum s;
  s.n_vertices = static_cast<std::size_t>(n);
  s.complete = keep == n;
  s.eigenvectors = Eigen::MatrixXd::Zero(n, std::min(keep, n_vectors));
  for (Eigen::Index i = 0; i < keep; ++i) {
    const auto& cand = candidates[i];
    s.eigenvalues.push_back(cand.value);
    if (i < s.eigenvectors.cols()) {
      const auto& idx = comps[cand.comp];
      for (std::size_t a = 0; a < idx.size(); ++a)
        s.eigenvectors(idx[a], i) = results[cand.comp].vectors(static_cast<Eigen::Index>(a), cand.local);
    }
  }
  return s;
}

}  // namespace

void canonicalize_in_place(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = -1;
  double best_abs = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (best < 0) throw NumericError("cannot canonicalize the sign of a zero vector");
  if (v[best] < 0.0) v = -v;
}

Eigen::VectorXd canonical_sign(const Eigen::VectorXd& v) {
  Eigen::VectorXd out = v;
  canonicalize_in_place(out);
  return out;
}

Spectrum decompose(const LaplacianMatrix& L, int k_values, int k_vectors, const SpectrumOptions& options) {
  if (k_values < 0 || k_vectors < 0) throw UsageError("k_values and k_vectors must be >= 0");
  const Eigen::Index n = L.dimension();
  if (n == 0) throw DataError("cannot decompose an empty Laplacian");
  const Eigen::Index wanted = std::min<Eigen::Index>(n, std::max(k_values, k_vectors) + 1);
  const Eigen::Index n_vectors = options.compute_vectors ? std::min<Eigen::Index>(n, k_vectors + 1) : 0;

  Spectrum s = decompose_by_components(L, wanted, n_vectors, options);
  clamp_eigenvalues(s.eigenvalues);
  for (Eigen::Index c = 0; c < s.eigenvectors.cols(); ++c) canonicalize_in_place(s.eigenvectors.col(c));
  return s;
}

}  // namespace spectrahar
