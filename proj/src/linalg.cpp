#include "tarc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tarc/errors.hpp"

namespace tarc::linalg {

namespace {

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " must be square, got " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }
}

void require_finite(const ComplexMatrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " has non-finite entries");
  }
}

void check_pivots(const Eigen::PartialPivLU<ComplexMatrix>& lu) {
  const auto& packed = lu.matrixLU();
  for (Index i = 0; i < packed.rows(); ++i) {
    if (std::abs(packed(i, i)) < kSingularPivot) {
      throw Error(ErrorKind::SingularMatrix,
                  "pivot " + std::to_string(i) + " below " + std::to_string(kSingularPivot));
    }
  }
}

}  // namespace

LuSolver::LuSolver(const ComplexMatrix& a) {
  require_square(a, "LU operand");
  require_finite(a, "LU operand");
  lu_.compute(a);
  check_pivots(lu_);
}

ComplexMatrix LuSolver::solve(const ComplexMatrix& b) const {
  if (b.rows() != lu_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "right-hand side row count differs from matrix");
  }
  return lu_.solve(b);
}

ComplexMatrix LuSolver::solve_transposed(const ComplexMatrix& b) const {
  if (b.rows() != lu_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "right-hand side row count differs from matrix");
  }
  return lu_.transpose().solve(b);
}

ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b) {
  return LuSolver(a).solve(b);
}

void fix_phase(ComplexVector& v) {
  if (v.size() == 0) return;
  Index imax = 0;
  double best = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    // strict comparison keeps the first of several equal-magnitude entries
    const double m = std::abs(v[i]);
    if (m > best * (1.0 + 1e-12)) {
      best = m;
      imax = i;
    }
  }
  if (best <= 0.0) return;
  v *= std::conj(v[imax]) / best;
  v[imax] = Complex(std::abs(v[imax]), 0.0);
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.norm();
  return (a - a.adjoint()).norm() <= rel_tol * std::max(scale, 1e-300);
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

std::vector<EigenPair> eig_hermitian(const ComplexMatrix& a) {
  require_square(a, "Hermitian operand");
  require_finite(a, "Hermitian operand");
  if (!is_hermitian(a)) throw Error(ErrorKind::NotHermitian, "matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "Hermitian eigensolver did not converge");
  }
  const Index n = a.rows();
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(n));
  // Eigen returns ascending order
  for (Index i = n - 1; i >= 0; --i) {
    ComplexVector v = solver.eigenvectors().col(i);
    fix_phase(v);
    out.push_back({Complex(solver.eigenvalues()[i], 0.0), std::move(v)});
  }
  return out;
}

std::vector<EigenPair> eig_hpd_pencil(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "pencil A");
  require_square(b, "pencil B");
  if (a.rows() != b.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "pencil operands differ in size");
  }
  require_finite(a, "pencil A");
  require_finite(b, "pencil B");
  if (!is_hermitian(a)) throw Error(ErrorKind::NotHermitian, "pencil A is not Hermitian");
  if (!is_hermitian(b)) throw Error(ErrorKind::NotHermitian, "pencil B is not Hermitian");

  Eigen::LLT<ComplexMatrix> chol(hermitian_part(b));
  if (chol.info() != Eigen::Success) {
    throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization of B failed");
  }
  // B = L Lᴴ, i.e. C = Lᴴ. Reduced operator L⁻¹ A L⁻ᴴ.
  const auto lower = chol.matrixL();
  ComplexMatrix tmp = lower.solve(hermitian_part(a));
  ComplexMatrix reduced = lower.solve(tmp.adjoint()).adjoint();
  reduced = hermitian_part(reduced);

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(reduced);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "reduced Hermitian eigensolver did not converge");
  }
  const ComplexMatrix vectors = chol.matrixU().solve(solver.eigenvectors());

  const Index n = a.rows();
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = n - 1; i >= 0; --i) {
    ComplexVector v = vectors.col(i);
    fix_phase(v);
    out.push_back({Complex(solver.eigenvalues()[i], 0.0), std::move(v)});
  }
  return out;
}

std::vector<EigenPair> eig_general(const ComplexMatrix& a) {
  require_square(a, "eigen operand");
  require_finite(a, "eigen operand");
  const Index n = a.rows();
  Eigen::ComplexEigenSolver<ComplexMatrix> solver;
  solver.setMaxIterations(kMaxQrIterationsPerEigenvalue * std::max<Index>(n, 1));
  solver.compute(a, true);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::NoConvergence, "complex Schur iteration exceeded " +
                                              std::to_string(kMaxQrIterationsPerEigenvalue) +
                                              " sweeps per eigenvalue");
  }
  std::vector<EigenPair> out;
  out.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    ComplexVector v = solver.eigenvectors().col(i);
    const double nrm = v.norm();
    if (nrm > 0.0) v /= nrm;
    fix_phase(v);
    out.push_back({solver.eigenvalues()[i], std::move(v)});
  }
  return out;
}

}  // namespace tarc::linalg
