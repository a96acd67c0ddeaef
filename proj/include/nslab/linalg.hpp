#pragma once

#include <cstddef>
#include <vector>

namespace nslab {

/// Compressed sparse row matrix assembled from triplets.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}

    void reserve(std::size_t nnz) { triplets_.reserve(nnz); }
    /// Adjust dimensions before finalize (rows counted during assembly).
    void set_dims(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
    }
    void add(std::size_t r, std::size_t c, double v) {
        if (v != 0.0) triplets_.push_back({r, c, v});
    }
    /// Sort triplets, merge duplicates, build CSR. Call once after assembly.
    void finalize();
    bool finalized() const { return finalized_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t nnz() const { return values_.size(); }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const;
    void multiply_transpose(const std::vector<double>& x, std::vector<double>& y) const;

    /// Row scaling in place: row r multiplied by w[r].
    void scale_rows(const std::vector<double>& w);

    /// Euclidean norms of the columns (for diagonal preconditioning).
    std::vector<double> column_norms() const;

    /// this * other (CSR x CSR).
    SparseMatrix product(const SparseMatrix& other) const;

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

private:
    struct Triplet {
        std::size_t r, c;
        double v;
    };
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Triplet> triplets_;
    std::vector<std::size_t> row_ptr_, col_idx_;
    std::vector<double> values_;
    bool finalized_ = false;
};

struct SolveStats {
    int iterations = 0;
    double residual = 0;   // relative
    bool converged = false;
};

/// Conjugate gradients for a symmetric positive (semi-)definite operator.
/// When `project_out_constants` is set, the constant nullspace component is
/// removed from the iterates (singular Neumann problems).
SolveStats conjugate_gradient(const SparseMatrix& A, const std::vector<double>& b,
                              std::vector<double>& x, double tol, int max_iter,
                              bool project_out_constants = false);

/// CGLS: least-squares min ||Ax - b|| via conjugate gradients on the normal
/// equations without forming them; columns are rescaled by their norms first.
SolveStats cgls(const SparseMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                double tol, int max_iter);

SparseMatrix transpose(const SparseMatrix& A);

/// Reusable normal-equations solver: builds the column-scaled A^T A once and
/// serves repeated right-hand sides (the matrix is data-independent in the
/// sweep settings).
class LsqOperator {
public:
    explicit LsqOperator(const SparseMatrix& A);
    SolveStats solve(const std::vector<double>& b, std::vector<double>& x, double tol,
                     int max_iter) const;

private:
    const SparseMatrix* A_;
    SparseMatrix At_, N_;
    std::vector<double> scale_;
    std::vector<double> diag_;
};

/// Least-squares via explicitly formed normal equations of the column-scaled
/// matrix, solved by PCG with a symmetric Gauss-Seidel preconditioner.
/// `x` is used as the starting guess when its size matches.
SolveStats normal_equations_solve(const SparseMatrix& A, const std::vector<double>& b,
                                  std::vector<double>& x, double tol, int max_iter);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);

}  // namespace nslab
