#pragma once

#include <span>
#include <vector>

namespace gammaz {

/// Eigendecomposition of a small dense symmetric matrix (row-major n*n) by
/// cyclic Jacobi rotations. values are ascending; vectors[k*n..] is the
/// eigenvector of values[k].
struct SymEig {
    std::vector<double> values;
    std::vector<double> vectors;
};
SymEig jacobi_eig(std::span<const double> a, int n);

/// Smallest eigenvalue; the input is symmetrized first.
double smallest_eigenvalue(std::span<const double> a, int n);

/// Minimum-norm least-squares solution of A x = b for a rows x cols matrix
/// (row-major), via x = A^T (A A^T)^+ b with relative eigenvalue cutoff rcond.
std::vector<double> minnorm_lstsq(std::span<const double> a, int rows, int cols,
                                  std::span<const double> b, double rcond = 1e-12);

/// Solve the square system M x = b by partial-pivot elimination.
/// Returns false when M is singular to working precision.
bool solve_dense(std::vector<double> m, int n, std::span<const double> b, std::span<double> x);

/// Determinant of a small square matrix (row-major), by elimination.
double determinant(std::vector<double> m, int n);

} // namespace gammaz
