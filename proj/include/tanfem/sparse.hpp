#pragma once

// Compressed-row sparse matrices with a fixed sparsity pattern and dense
// vector helpers used by the Krylov solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <vector>

#include "tanfem/errors.hpp"

namespace tanfem {

using Vector = std::vector<double>;

struct CsrMatrix {
    std::size_t rows = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<int> cols;  // sorted within each row
    std::vector<double> vals;

    std::size_t nonzeros() const { return vals.size(); }

    void multiply(const Vector& x, Vector& y) const {
        y.assign(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
                s += vals[k] * x[static_cast<std::size_t>(cols[k])];
            y[i] = s;
        }
    }

    Vector operator*(const Vector& x) const {
        Vector y;
        multiply(x, y);
        return y;
    }

    /// Position of (i, j) in `vals`, or npos when outside the pattern.
    std::size_t find(std::size_t i, std::size_t j) const {
        const auto first = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
        const auto last = cols.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
        const auto it = std::lower_bound(first, last, static_cast<int>(j));
        if (it == last || *it != static_cast<int>(j)) return npos;
        return static_cast<std::size_t>(it - cols.begin());
    }

    double operator()(std::size_t i, std::size_t j) const {
        const std::size_t k = find(i, j);
        return k == npos ? 0.0 : vals[k];
    }

    Vector diagonal() const {
        Vector d(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) d[i] = (*this)(i, i);
        return d;
    }

    /// max |a_ij - a_ji| relative to max |a_ij|.
    double relative_asymmetry() const {
        double amax = 0.0, dmax = 0.0;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
                amax = std::max(amax, std::abs(vals[k]));
                dmax = std::max(dmax, std::abs(vals[k] - (*this)(static_cast<std::size_t>(cols[k]), i)));
            }
        return amax > 0.0 ? dmax / amax : 0.0;
    }

    static CsrMatrix identity(std::size_t n) {
        CsrMatrix m;
        m.rows = n;
        m.row_ptr.resize(n + 1);
        m.cols.resize(n);
        m.vals.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            m.row_ptr[i + 1] = i + 1;
            m.cols[i] = static_cast<int>(i);
        }
        return m;
    }

    static CsrMatrix diagonal_matrix(const Vector& d) {
        CsrMatrix m = identity(d.size());
        m.vals = d;
        return m;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Coordinate-format dump (1-based, general) for external verification.
inline void write_matrix_market(const CsrMatrix& m, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write " + path);
    std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
    std::fprintf(f, "%zu %zu %zu\n", m.rows, m.rows, m.nonzeros());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            std::fprintf(f, "%zu %d %.17g\n", i + 1, m.cols[k] + 1, m.vals[k]);
    std::fclose(f);
}

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vector& a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

/// y += alpha * x
inline void axpy(double alpha, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace tanfem
