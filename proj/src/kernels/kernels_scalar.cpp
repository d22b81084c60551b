#include "gammaz/kernels.hpp"

namespace gammaz::kernels {
namespace {

void axpy_diff_scalar(double* dst, const double* a, const double* b, double c, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) dst[i] += c * (a[i] - b[i]);
}

void grad_central_scalar(double* dst, const double* w, std::ptrdiff_t s, double inv2h,
                         std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) dst[i] = (w[i + s] - w[i - s]) * inv2h;
}

void face_flux_scalar(double* G, const double* rho, const double* w, const double* kn,
                      const double* kt1, const double* gt1, const double* kt2, const double* gt2,
                      std::ptrdiff_t s, double invh, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) {
        double t = kn[i] * (w[i + s] - w[i]) * invh;
        if (kt1) t += kt1[i] * 0.5 * (gt1[i] + gt1[i + s]);
        if (kt2) t += kt2[i] * 0.5 * (gt2[i] + gt2[i + s]);
        G[i] = 0.5 * (rho[i] + rho[i + s]) * t;
    }
}

double dot_scalar(const double* a, const double* b, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += a[i] * b[i];
    return s;
}

double sum_scalar(const double* a, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += a[i];
    return s;
}

double abs_diff_sum_scalar(const double* a, const double* b, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double d = a[i] - b[i];
        s += d < 0 ? -d : d;
    }
    return s;
}

double weighted_quad3_scalar(const double* rho, const double* gx, const double* gy,
                             const double* gz, const double* m00, const double* m11,
                             const double* m22, const double* m01, const double* m02,
                             const double* m12, std::size_t len) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
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

const Table& scalar_table() {
    static const Table t = {
        "scalar",
        axpy_diff_scalar,
        grad_central_scalar,
        face_flux_scalar,
        dot_scalar,
        sum_scalar,
        abs_diff_sum_scalar,
        weighted_quad3_scalar,
    };
    return t;
}

} // namespace gammaz::kernels
