#include "gammaz/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gammaz {

SymEig jacobi_eig(std::span<const double> a, int n) {
    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> m(a.begin(), a.end());
    // symmetrize defensively
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double v = 0.5 * (m[nn * i + j] + m[nn * j + i]);
            m[nn * i + j] = m[nn * j + i] = v;
        }
    std::vector<double> v(nn * nn, 0.0);
    for (int i = 0; i < n; ++i) v[nn * i + i] = 1.0;

    double norm = 0.0;
    for (double x : m) norm += x * x;
    norm = std::sqrt(norm);
    const double tol = 1e-15 * (norm > 0 ? norm : 1.0);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m[nn * i + j] * m[nn * i + j];
        if (std::sqrt(2.0 * off) < tol) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = m[nn * p + q];
                if (std::fabs(apq) < tol * 1e-2) continue;
                const double app = m[nn * p + p], aqq = m[nn * q + q];
                const double theta = 0.5 * (aqq - app) / apq;
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);
                m[nn * p + p] = app - t * apq;
                m[nn * q + q] = aqq + t * apq;
                m[nn * p + q] = m[nn * q + p] = 0.0;
                for (int k = 0; k < n; ++k) {
                    if (k != p && k != q) {
                        const double akp = m[nn * k + p], akq = m[nn * k + q];
                        m[nn * k + p] = m[nn * p + k] = akp - s * (akq + tau * akp);
                        m[nn * k + q] = m[nn * q + k] = akq + s * (akp - tau * akq);
                    }
                    const double vkp = v[nn * k + p], vkq = v[nn * k + q];
                    v[nn * k + p] = vkp - s * (vkq + tau * vkp);
                    v[nn * k + q] = vkq + s * (vkp - tau * vkq);
                }
            }
    }

    SymEig out;
    out.values.resize(nn);
    for (int i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = m[nn * i + i];
    std::vector<int> order(nn);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int i, int j) { return out.values[static_cast<std::size_t>(i)] < out.values[static_cast<std::size_t>(j)]; });
    std::vector<double> sorted_vals(nn);
    out.vectors.resize(nn * nn);
    for (int k = 0; k < n; ++k) {
        sorted_vals[static_cast<std::size_t>(k)] = out.values[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        for (int r = 0; r < n; ++r)
            out.vectors[nn * k + r] = v[nn * r + order[static_cast<std::size_t>(k)]];
    }
    out.values = std::move(sorted_vals);
    return out;
}

double smallest_eigenvalue(std::span<const double> a, int n) {
    return jacobi_eig(a, n).values.front();
}

std::vector<double> minnorm_lstsq(std::span<const double> a, int rows, int cols,
                                  std::span<const double> b, double rcond) {
    const std::size_t r = static_cast<std::size_t>(rows), c = static_cast<std::size_t>(cols);
    // gram = A A^T (rows x rows)
    std::vector<double> gram(r * r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = i; j < r; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < c; ++k) s += a[i * c + k] * a[j * c + k];
            gram[i * r + j] = gram[j * r + i] = s;
        }
    SymEig eig = jacobi_eig(gram, rows);
    const double cutoff = rcond * std::max(eig.values.back(), 0.0);
    // y = (A A^T)^+ b
    std::vector<double> y(r, 0.0);
    for (std::size_t k = 0; k < r; ++k) {
        const double lam = eig.values[k];
        if (lam <= cutoff || lam <= 0.0) continue;
        double coef = 0.0;
        for (std::size_t i = 0; i < r; ++i) coef += eig.vectors[k * r + i] * b[i];
        coef /= lam;
        for (std::size_t i = 0; i < r; ++i) y[i] += coef * eig.vectors[k * r + i];
    }
    // x = A^T y
    std::vector<double> x(c, 0.0);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < c; ++k) x[k] += a[i * c + k] * y[i];
    return x;
}

bool solve_dense(std::vector<double> m, int n, std::span<const double> b, std::span<double> x) {
    const std::size_t nn = static_cast<std::size_t>(n);
    std::vector<double> rhs(b.begin(), b.end());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[nn * r + col]) > std::fabs(m[nn * piv + col])) piv = r;
        if (std::fabs(m[nn * piv + col]) < 1e-300) return false;
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(m[nn * piv + k], m[nn * col + k]);
            std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
        }
        const double inv = 1.0 / m[nn * col + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = m[nn * r + col] * inv;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k) m[nn * r + k] -= f * m[nn * col + k];
            rhs[static_cast<std::size_t>(r)] -= f * rhs[static_cast<std::size_t>(col)];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = rhs[static_cast<std::size_t>(r)];
        for (int k = r + 1; k < n; ++k) s -= m[nn * r + k] * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(r)] = s / m[nn * r + r];
    }
    return true;
}

double determinant(std::vector<double> m, int n) {
    const std::size_t nn = static_cast<std::size_t>(n);
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(m[nn * r + col]) > std::fabs(m[nn * piv + col])) piv = r;
        if (m[nn * piv + col] == 0.0) return 0.0;
        if (piv != col) {
            for (int k = 0; k < n; ++k) std::swap(m[nn * piv + k], m[nn * col + k]);
            det = -det;
        }
        det *= m[nn * col + col];
        const double inv = 1.0 / m[nn * col + col];
        for (int r = col + 1; r < n; ++r) {
            const double f = m[nn * r + col] * inv;
            if (f == 0.0) continue;
            for (int k = col; k < n; ++k) m[nn * r + k] -= f * m[nn * col + k];
        }
    }
    return det;
}

} // namespace gammaz
