#pragma once

#include <cstddef>

namespace gammaz::kernels {

/// Hot grid loops of the density solver, provided as scalar reference
/// implementations plus SIMD variants selected once at runtime by CPU
/// feature detection. Every variant computes the same quantity; the test
/// suite checks scalar/SIMD equivalence on random data.
///
/// Conventions: all pointers reference arrays of at least `len` valid
/// elements at the given offsets; `s` is the element stride to the neighbor
/// cell along the flux axis (reads touch [i, i+s]).
struct Table {
    const char* name;

    /// dst[i] += c * (a[i] - b[i])
    void (*axpy_diff)(double* dst, const double* a, const double* b, double c, std::size_t len);

    /// dst[i] = (w[i+s] - w[i-s]) * inv2h   (callers handle boundary stencils)
    void (*grad_central)(double* dst, const double* w, std::ptrdiff_t s, double inv2h,
                         std::size_t len);

    /// Face flux between cells i and i+s with full-matrix diffusion:
    ///   G[i] = 0.5*(rho[i]+rho[i+s]) * ( kn[i]*(w[i+s]-w[i])*invh
    ///          + kt1[i]*0.5*(gt1[i]+gt1[i+s]) + kt2[i]*0.5*(gt2[i]+gt2[i+s]) )
    /// kt1/gt1 and kt2/gt2 may be null (dimension < 3).
    void (*face_flux)(double* G, const double* rho, const double* w, const double* kn,
                      const double* kt1, const double* gt1, const double* kt2, const double* gt2,
                      std::ptrdiff_t s, double invh, std::size_t len);

    double (*dot)(const double* a, const double* b, std::size_t len);
    double (*sum)(const double* a, std::size_t len);
    /// sum |a[i] - b[i]|
    double (*abs_diff_sum)(const double* a, const double* b, std::size_t len);

    /// sum_i rho[i] * g(i)^T M(i) g(i) with g = (gx,gy,gz) and M the packed
    /// symmetric 3x3 per cell (m00,m11,m22,m01,m02,m12); null components are
    /// treated as zero.
    double (*weighted_quad3)(const double* rho, const double* gx, const double* gy,
                             const double* gz, const double* m00, const double* m11,
                             const double* m22, const double* m01, const double* m02,
                             const double* m12, std::size_t len);
};

const Table& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const Table& avx2_table();
#endif

/// Table chosen at startup: AVX2 when the CPU supports it, scalar otherwise.
/// The environment variable GAMMAZ_KERNELS=scalar|avx2 overrides.
const Table& active_table();

} // namespace gammaz::kernels
