// AVX2 + FMA variants of the grid kernels. This translation unit is compiled
// with -mavx2 -mfma; callers must go through active_table(), which only
// selects these after a runtime CPU check.

#include "gammaz/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace gammaz::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void axpy_diff_avx2(double* dst, const double* a, const double* b, double c, std::size_t len) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        __m256d vd = _mm256_loadu_pd(dst + i);
        vd = _mm256_fmadd_pd(vc, _mm256_sub_pd(va, vb), vd);
        _mm256_storeu_pd(dst + i, vd);
    }
    for (; i < len; ++i) dst[i] += c * (a[i] - b[i]);
}

void grad_central_avx2(double* dst, const double* w, std::ptrdiff_t s, double inv2h,
                       std::size_t len) {
    const __m256d vh = _mm256_set1_pd(inv2h);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        __m256d hi = _mm256_loadu_pd(w + i + s);
        __m256d lo = _mm256_loadu_pd(w + i - s);
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_sub_pd(hi, lo), vh));
    }
    for (; i < len; ++i) dst[i] = (w[i + s] - w[i - s]) * inv2h;
}

void face_flux_avx2(double* G, const double* rho, const double* w, const double* kn,
                    const double* kt1, const double* gt1, const double* kt2, const double* gt2,
                    std::ptrdiff_t s, double invh, std::size_t len) {
    const __m256d vinvh = _mm256_set1_pd(invh);
    const __m256d vhalf = _mm256_set1_pd(0.5);
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        __m256d wl = _mm256_loadu_pd(w + i);
        __m256d wr = _mm256_loadu_pd(w + i + s);
        __m256d t = _mm256_mul_pd(_mm256_loadu_pd(kn + i),
                                  _mm256_mul_pd(_mm256_sub_pd(wr, wl), vinvh));
        if (kt1) {
            __m256d g = _mm256_mul_pd(vhalf, _mm256_add_pd(_mm256_loadu_pd(gt1 + i),
                                                           _mm256_loadu_pd(gt1 + i + s)));
            t = _mm256_fmadd_pd(_mm256_loadu_pd(kt1 + i), g, t);
        }
        if (kt2) {
            __m256d g = _mm256_mul_pd(vhalf, _mm256_add_pd(_mm256_loadu_pd(gt2 + i),
                                                           _mm256_loadu_pd(gt2 + i + s)));
            t = _mm256_fmadd_pd(_mm256_loadu_pd(kt2 + i), g, t);
        }
        __m256d rbar = _mm256_mul_pd(vhalf, _mm256_add_pd(_mm256_loadu_pd(rho + i),
                                                          _mm256_loadu_pd(rho + i + s)));
        _mm256_storeu_pd(G + i, _mm256_mul_pd(rbar, t));
    }
    for (; i < len; ++i) {
        double t = kn[i] * (w[i + s] - w[i]) * invh;
        if (kt1) t += kt1[i] * 0.5 * (gt1[i] + gt1[i + s]);
        if (kt2) t += kt2[i] * 0.5 * (gt2[i] + gt2[i + s]);
        G[i] = 0.5 * (rho[i] + rho[i + s]) * t;
    }
}

double dot_avx2(const double* a, const double* b, std::size_t len) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < len; ++i) s += a[i] * b[i];
    return s;
}

double sum_avx2(const double* a, std::size_t len) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < len; ++i) s += a[i];
    return s;
}

double abs_diff_sum_avx2(const double* a, const double* b, std::size_t len) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_andnot_pd(signmask, d));
    }
    double s = hsum(acc);
    for (; i < len; ++i) {
        const double d = a[i] - b[i];
        s += d < 0 ? -d : d;
    }
    return s;
}

double weighted_quad3_avx2(const double* rho, const double* gx, const double* gy,
                           const double* gz, const double* m00, const double* m11,
                           const double* m22, const double* m01, const double* m02,
                           const double* m12, std::size_t len) {
    const __m256d two = _mm256_set1_pd(2.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
        const __m256d x = gx ? _mm256_loadu_pd(gx + i) : _mm256_setzero_pd();
        const __m256d y = gy ? _mm256_loadu_pd(gy + i) : _mm256_setzero_pd();
        const __m256d z = gz ? _mm256_loadu_pd(gz + i) : _mm256_setzero_pd();
        __m256d q = _mm256_setzero_pd();
        if (m00) q = _mm256_fmadd_pd(_mm256_loadu_pd(m00 + i), _mm256_mul_pd(x, x), q);
        if (m11) q = _mm256_fmadd_pd(_mm256_loadu_pd(m11 + i), _mm256_mul_pd(y, y), q);
        if (m22) q = _mm256_fmadd_pd(_mm256_loadu_pd(m22 + i), _mm256_mul_pd(z, z), q);
        if (m01) q = _mm256_fmadd_pd(_mm256_mul_pd(two, _mm256_loadu_pd(m01 + i)), _mm256_mul_pd(x, y), q);
        if (m02) q = _mm256_fmadd_pd(_mm256_mul_pd(two, _mm256_loadu_pd(m02 + i)), _mm256_mul_pd(x, z), q);
        if (m12) q = _mm256_fmadd_pd(_mm256_mul_pd(two, _mm256_loadu_pd(m12 + i)), _mm256_mul_pd(y, z), q);
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(rho + i), q, acc);
    }
    double s = hsum(acc);
    for (; i < len; ++i) {
        const double x = gx ? gx[i] : 0.0;
        const double y = gy ? gy[i] : 0.0;
        const double z = gz ? gz[i] : 0.0;
        double q = 0.0;
        if (m00) q += m00[i] * x * x;
        if (m11) q += m11[i] * y * y;
        if (m22) q += m22[i] * z * z;
        if (m01) q += 2.0 * m01[i] * x * y;
        if (m02) q += 2.0 * m02[i] * x * z;
        if (m12) q += 2.0 * m12[i] * y * z;
        s += rho[i] * q;
    }
    return s;
}

} // namespace

const Table& avx2_table() {
    static const Table t = {
        "avx2",
        axpy_diff_avx2,
        grad_central_avx2,
        face_flux_avx2,
        dot_avx2,
        sum_avx2,
        abs_diff_sum_avx2,
        weighted_quad3_avx2,
    };
    return t;
}

} // namespace gammaz::kernels

#endif // x86_64
