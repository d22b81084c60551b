#include <doctest.h>

#include <cmath>
#include <vector>

#include "gammaz/kernels.hpp"
#include "oracles.hpp"

using gammaz::kernels::Table;

namespace {

std::vector<double> random_vec(std::size_t n, oracles::Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.unit();
    return v;
}

bool close(double a, double b, double tol = 1e-13) {
    return std::fabs(a - b) <= tol * (1.0 + std::max(std::fabs(a), std::fabs(b)));
}

// every variant must agree with the scalar reference on random data
void check_pair(const Table& ref, const Table& alt) {
    oracles::Rng rng(2026);
    for (std::size_t len : {1ul, 3ul, 4ul, 17ul, 256ul, 1023ul}) {
        auto a = random_vec(len + 8, rng), b = random_vec(len + 8, rng);
        auto rho = random_vec(len + 8, rng), w = random_vec(len + 8, rng);
        for (double& v : rho) v = std::fabs(v) + 0.1;

        auto d1 = random_vec(len, rng);
        auto d2 = d1;
        ref.axpy_diff(d1.data(), a.data(), b.data(), 0.37, len);
        alt.axpy_diff(d2.data(), a.data(), b.data(), 0.37, len);
        for (std::size_t i = 0; i < len; ++i) CHECK(close(d1[i], d2[i]));

        std::vector<double> g1(len), g2(len);
        ref.grad_central(g1.data(), w.data() + 4, 4, 3.5, len);
        alt.grad_central(g2.data(), w.data() + 4, 4, 3.5, len);
        for (std::size_t i = 0; i < len; ++i) CHECK(close(g1[i], g2[i]));

        auto kn = random_vec(len + 8, rng), kt1 = random_vec(len + 8, rng), kt2 = random_vec(len + 8, rng);
        auto gt1 = random_vec(len + 8, rng), gt2 = random_vec(len + 8, rng);
        std::vector<double> G1(len), G2(len);
        ref.face_flux(G1.data(), rho.data(), w.data(), kn.data(), kt1.data(), gt1.data(),
                      kt2.data(), gt2.data(), 4, 2.0, len);
        alt.face_flux(G2.data(), rho.data(), w.data(), kn.data(), kt1.data(), gt1.data(),
                      kt2.data(), gt2.data(), 4, 2.0, len);
        for (std::size_t i = 0; i < len; ++i) CHECK(close(G1[i], G2[i]));
        ref.face_flux(G1.data(), rho.data(), w.data(), kn.data(), nullptr, nullptr, nullptr,
                      nullptr, 1, 2.0, len);
        alt.face_flux(G2.data(), rho.data(), w.data(), kn.data(), nullptr, nullptr, nullptr,
                      nullptr, 1, 2.0, len);
        for (std::size_t i = 0; i < len; ++i) CHECK(close(G1[i], G2[i]));

        CHECK(close(ref.dot(a.data(), b.data(), len), alt.dot(a.data(), b.data(), len), 1e-12));
        CHECK(close(ref.sum(a.data(), len), alt.sum(a.data(), len), 1e-12));
        CHECK(close(ref.abs_diff_sum(a.data(), b.data(), len),
                    alt.abs_diff_sum(a.data(), b.data(), len), 1e-12));

        auto m00 = random_vec(len, rng), m11 = random_vec(len, rng), m22 = random_vec(len, rng);
        auto m01 = random_vec(len, rng), m02 = random_vec(len, rng), m12 = random_vec(len, rng);
        CHECK(close(ref.weighted_quad3(rho.data(), a.data(), b.data(), w.data(), m00.data(),
                                       m11.data(), m22.data(), m01.data(), m02.data(), m12.data(), len),
                    alt.weighted_quad3(rho.data(), a.data(), b.data(), w.data(), m00.data(),
                                       m11.data(), m22.data(), m01.data(), m02.data(), m12.data(), len),
                    1e-12));
        CHECK(close(ref.weighted_quad3(rho.data(), a.data(), nullptr, nullptr, m00.data(), nullptr,
                                       nullptr, nullptr, nullptr, nullptr, len),
                    alt.weighted_quad3(rho.data(), a.data(), nullptr, nullptr, m00.data(), nullptr,
                                       nullptr, nullptr, nullptr, nullptr, len),
                    1e-12));
    }
}

} // namespace

TEST_CASE("scalar kernels match naive formulas") {
    const Table& k = gammaz::kernels::scalar_table();
    oracles::Rng rng(9);
    const std::size_t len = 37;
    auto a = random_vec(len + 8, rng), b = random_vec(len + 8, rng);
    double want = 0;
    for (std::size_t i = 0; i < len; ++i) want += a[i] * b[i];
    CHECK(close(k.dot(a.data(), b.data(), len), want));
    std::vector<double> g(len);
    k.grad_central(g.data(), a.data() + 2, 2, 0.5, len);
    for (std::size_t i = 0; i < len; ++i) CHECK(g[i] == doctest::Approx((a[i + 4] - a[i]) * 0.5));
}

TEST_CASE("active table agrees with the scalar reference") {
    const Table& active = gammaz::kernels::active_table();
    INFO("active kernel table: ", active.name);
    check_pair(gammaz::kernels::scalar_table(), active);
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variants agree with the scalar reference when supported") {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return;
    check_pair(gammaz::kernels::scalar_table(), gammaz::kernels::avx2_table());
}
#endif
