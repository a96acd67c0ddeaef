#include "nslab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nslab {

void SparseMatrix::finalize() {
    if (finalized_) return;
    std::sort(triplets_.begin(), triplets_.end(), [](const Triplet& a, const Triplet& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    row_ptr_.assign(rows_ + 1, 0);
    col_idx_.clear();
    values_.clear();
    col_idx_.reserve(triplets_.size());
    values_.reserve(triplets_.size());
    std::size_t i = 0;
    for (std::size_t r = 0; r < rows_; ++r) {
        while (i < triplets_.size() && triplets_[i].r == r) {
            std::size_t c = triplets_[i].c;
            double v = 0;
            while (i < triplets_.size() && triplets_[i].r == r && triplets_[i].c == c)
                v += triplets_[i++].v;
            if (v != 0.0) {
                col_idx_.push_back(c);
                values_.push_back(v);
            }
        }
        row_ptr_[r + 1] = values_.size();
    }
    triplets_.clear();
    triplets_.shrink_to_fit();
    finalized_ = true;
}

void SparseMatrix::multiply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += values_[k] * x[col_idx_[k]];
        y[r] = acc;
    }
}

void SparseMatrix::multiply_transpose(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double xr = x[r];
        if (xr == 0.0) continue;
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            y[col_idx_[k]] += values_[k] * xr;
    }
}

void SparseMatrix::scale_rows(const std::vector<double>& w) {
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) values_[k] *= w[r];
}

std::vector<double> SparseMatrix::column_norms() const {
    std::vector<double> n(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            n[col_idx_[k]] += values_[k] * values_[k];
    for (double& v : n) v = std::sqrt(v);
    return n;
}

SparseMatrix SparseMatrix::product(const SparseMatrix& other) const {
    if (cols_ != other.rows_) throw std::invalid_argument("SparseMatrix::product: shape mismatch");
    SparseMatrix out(rows_, other.cols_);
    std::vector<double> acc(other.cols_, 0.0);
    std::vector<std::size_t> touched;
    for (std::size_t r = 0; r < rows_; ++r) {
        touched.clear();
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            std::size_t m = col_idx_[k];
            double v = values_[k];
            for (std::size_t k2 = other.row_ptr_[m]; k2 < other.row_ptr_[m + 1]; ++k2) {
                std::size_t c = other.col_idx_[k2];
                if (acc[c] == 0.0) touched.push_back(c);
                acc[c] += v * other.values_[k2];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (std::size_t c : touched) {
            out.add(r, c, acc[c]);
            acc[c] = 0.0;
        }
    }
    out.finalize();
    return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

namespace {
void remove_mean(std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= v.size();
    for (double& x : v) x -= m;
}
}  // namespace

SolveStats conjugate_gradient(const SparseMatrix& A, const std::vector<double>& b,
                              std::vector<double>& x, double tol, int max_iter,
                              bool project_out_constants) {
    SolveStats st;
    std::size_t n = A.cols();
    if (x.size() != n) x.assign(n, 0.0);
    std::vector<double> r(n), p(n), Ap(n);
    A.multiply(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
    if (project_out_constants) remove_mean(r);
    double b_norm = norm2(b);
    if (b_norm == 0.0) {
        x.assign(n, 0.0);
        st.converged = true;
        return st;
    }
    p = r;
    double rTr = dot(r, r);
    for (int it = 0; it < max_iter; ++it) {
        A.multiply(p, Ap);
        if (project_out_constants) remove_mean(Ap);
        double pAp = dot(p, Ap);
        if (pAp <= 0) break;
        double alpha = rTr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rTr_new = dot(r, r);
        st.iterations = it + 1;
        st.residual = std::sqrt(rTr_new) / b_norm;
        if (st.residual < tol) {
            st.converged = true;
            break;
        }
        double beta = rTr_new / rTr;
        rTr = rTr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    if (project_out_constants) remove_mean(x);
    return st;
}

SolveStats cgls(const SparseMatrix& A, const std::vector<double>& b, std::vector<double>& x,
                double tol, int max_iter) {
    SolveStats st;
    std::size_t n = A.cols();

    // column preconditioning: solve in y with x = S y, S = diag(1/||col||)
    std::vector<double> scale = A.column_norms();
    for (double& s : scale) s = (s > 0) ? 1.0 / s : 1.0;

    std::vector<double> y(n, 0.0);
    std::vector<double> r = b;           // r = b - A S y
    std::vector<double> g(n), p(n), q(A.rows()), tmp(n);

    A.multiply_transpose(r, tmp);
    for (std::size_t i = 0; i < n; ++i) g[i] = tmp[i] * scale[i];
    double g0 = norm2(g);
    if (g0 == 0.0) {
        x.assign(n, 0.0);
        st.converged = true;
        return st;
    }
    p = g;
    double gTg = g0 * g0;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) tmp[i] = p[i] * scale[i];
        A.multiply(tmp, q);
        double qq = dot(q, q);
        if (qq == 0.0) break;
        double alpha = gTg / qq;
        for (std::size_t i = 0; i < n; ++i) y[i] += alpha * p[i];
        for (std::size_t i = 0; i < A.rows(); ++i) r[i] -= alpha * q[i];
        A.multiply_transpose(r, tmp);
        for (std::size_t i = 0; i < n; ++i) g[i] = tmp[i] * scale[i];
        double gTg_new = dot(g, g);
        st.iterations = it + 1;
        st.residual = std::sqrt(gTg_new) / g0;
        if (st.residual < tol) {
            st.converged = true;
            break;
        }
        double beta = gTg_new / gTg;
        gTg = gTg_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = g[i] + beta * p[i];
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * scale[i];
    return st;
}

SparseMatrix transpose(const SparseMatrix& A) {
    SparseMatrix T(A.cols(), A.rows());
    T.reserve(A.nnz());
    for (std::size_t r = 0; r < A.rows(); ++r)
        for (std::size_t k = A.row_ptr()[r]; k < A.row_ptr()[r + 1]; ++k)
            T.add(A.col_idx()[k], r, A.values()[k]);
    T.finalize();
    return T;
}

namespace {

// symmetric Gauss-Seidel application: (D+L) y = r, z = D y, (D+U) w = z
struct SgsPreconditioner {
    const SparseMatrix* N;
    std::vector<double> diag;

    explicit SgsPreconditioner(const SparseMatrix& n) : N(&n) {
        diag.assign(n.rows(), 1.0);
        for (std::size_t r = 0; r < n.rows(); ++r)
            for (std::size_t k = n.row_ptr()[r]; k < n.row_ptr()[r + 1]; ++k)
                if (n.col_idx()[k] == r) diag[r] = n.values()[k];
    }

    void apply(const std::vector<double>& r, std::vector<double>& w,
               std::vector<double>& scratch) const {
        const auto& rp = N->row_ptr();
        const auto& ci = N->col_idx();
        const auto& va = N->values();
        std::size_t n = N->rows();
        std::vector<double>& y = scratch;
        y.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = r[i];
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
                std::size_t c = ci[k];
                if (c < i) acc -= va[k] * y[c];
            }
            y[i] = acc / diag[i];
        }
        w.assign(n, 0.0);
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = diag[ii] * y[ii];
            for (std::size_t k = rp[ii]; k < rp[ii + 1]; ++k) {
                std::size_t c = ci[k];
                if (c > ii) acc -= va[k] * w[c];
            }
            w[ii] = acc / diag[ii];
        }
    }
};

}  // namespace

LsqOperator::LsqOperator(const SparseMatrix& A) : A_(&A) {
    const std::size_t n = A.cols();
    scale_ = A.column_norms();
    for (double& s : scale_) s = (s > 0) ? 1.0 / s : 1.0;
    At_ = transpose(A);
    SparseMatrix N = At_.product(A);
    SparseMatrix Ns(n, n);
    Ns.reserve(N.nnz());
    for (std::size_t r = 0; r < N.rows(); ++r)
        for (std::size_t k = N.row_ptr()[r]; k < N.row_ptr()[r + 1]; ++k)
            Ns.add(r, N.col_idx()[k], scale_[r] * N.values()[k] * scale_[N.col_idx()[k]]);
    Ns.finalize();
    N_ = std::move(Ns);
    diag_.assign(n, 1.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = N_.row_ptr()[r]; k < N_.row_ptr()[r + 1]; ++k)
            if (N_.col_idx()[k] == r) diag_[r] = N_.values()[k];
}

SolveStats LsqOperator::solve(const std::vector<double>& b, std::vector<double>& x, double tol,
                              int max_iter) const {
    SolveStats st;
    const std::size_t n = N_.rows();
    std::vector<double> bt(n);
    At_.multiply(b, bt);
    for (std::size_t i = 0; i < n; ++i) bt[i] *= scale_[i];

    std::vector<double> y(n, 0.0);
    if (x.size() == n)
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] / scale_[i];

    // symmetric Gauss-Seidel preconditioned CG
    auto sgs_apply = [&](const std::vector<double>& r, std::vector<double>& w,
                         std::vector<double>& yv) {
        const auto& rp = N_.row_ptr();
        const auto& ci = N_.col_idx();
        const auto& va = N_.values();
        yv.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = r[i];
            for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
                std::size_t c = ci[k];
                if (c < i) acc -= va[k] * yv[c];
            }
            yv[i] = acc / diag_[i];
        }
        w.assign(n, 0.0);
        for (std::size_t ii = n; ii-- > 0;) {
            double acc = diag_[ii] * yv[ii];
            for (std::size_t k = rp[ii]; k < rp[ii + 1]; ++k) {
                std::size_t c = ci[k];
                if (c > ii) acc -= va[k] * w[c];
            }
            w[ii] = acc / diag_[ii];
        }
    };

    std::vector<double> r(n), z(n), p(n), Np(n), scratch;
    N_.multiply(y, Np);
    for (std::size_t i = 0; i < n; ++i) r[i] = bt[i] - Np[i];
    double b_norm = norm2(bt);
    if (b_norm == 0) {
        x.assign(n, 0.0);
        st.converged = true;
        return st;
    }
    sgs_apply(r, z, scratch);
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        N_.multiply(p, Np);
        double pNp = dot(p, Np);
        if (pNp <= 0) break;
        double a = rz / pNp;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += a * p[i];
            r[i] -= a * Np[i];
        }
        st.iterations = it + 1;
        st.residual = norm2(r) / b_norm;
        if (st.residual < tol) {
            st.converged = true;
            break;
        }
        sgs_apply(r, z, scratch);
        double rz_new = dot(r, z);
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] * scale_[i];
    return st;
}

SolveStats normal_equations_solve(const SparseMatrix& A, const std::vector<double>& b,
                                  std::vector<double>& x, double tol, int max_iter) {
    LsqOperator op(A);
    return op.solve(b, x, tol, max_iter);
}

}  // namespace nslab
