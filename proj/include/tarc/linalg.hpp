#pragma once

// Dense complex linear-algebra kernel shared by every reduction and
// optimizer. Storage is Eigen's dense column-major matrices.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace tarc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using ComplexRow = Eigen::RowVectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct EigenPair {
  Complex value;
  ComplexVector vector;
};

namespace linalg {

/// Pivots smaller than this in magnitude are treated as exact zeros.
inline constexpr double kSingularPivot = 1e-300;
/// Relative tolerance of the Hermitian-symmetry check on pencil inputs.
inline constexpr double kHermitianTolerance = 1e-12;
/// Upper bound on QR sweeps per eigenvalue in eig_general.
inline constexpr int kMaxQrIterationsPerEigenvalue = 60;

/// Solves A X = B by LU with partial pivoting.
/// Throws SingularMatrix if any pivot magnitude is below kSingularPivot.
ComplexMatrix solve_linear(const ComplexMatrix& a, const ComplexMatrix& b);

/// Reusable LU factorization for repeated solves with the same matrix.
class LuSolver {
 public:
  explicit LuSolver(const ComplexMatrix& a);
  ComplexMatrix solve(const ComplexMatrix& b) const;
  /// Solves Aᵀ X = B with the same factorization.
  ComplexMatrix solve_transposed(const ComplexMatrix& b) const;
  Index size() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<ComplexMatrix> lu_;
};

/// Generalized Hermitian-definite eigenproblem A v = λ B v.
///
/// B is reduced by Cholesky, B = Cᴴ C, and the Hermitian matrix
/// C⁻ᴴ A C⁻¹ is diagonalized. Values are real and sorted descending.
/// Returned vectors are B-orthonormal (vᵢᴴ B vⱼ = δᵢⱼ), so they are not unit
/// Euclidean norm in general. Within a degenerate eigenspace any B-orthonormal
/// basis may be returned. Each vector's largest-magnitude entry is made real
/// and positive.
std::vector<EigenPair> eig_hpd_pencil(const ComplexMatrix& a, const ComplexMatrix& b);

/// Standard Hermitian eigenproblem, values sorted descending, unit vectors.
std::vector<EigenPair> eig_hermitian(const ComplexMatrix& a);

/// Eigenpairs of a general square matrix via complex Schur (QR) iteration.
/// Vectors have unit Euclidean norm; order is unspecified.
std::vector<EigenPair> eig_general(const ComplexMatrix& a);

/// Multiplies v by a unit phase so its largest-magnitude entry is real > 0.
void fix_phase(ComplexVector& v);

bool is_hermitian(const ComplexMatrix& a, double rel_tol = kHermitianTolerance);

/// ½(A + Aᴴ)
ComplexMatrix hermitian_part(const ComplexMatrix& a);

}  // namespace linalg
}  // namespace tarc
