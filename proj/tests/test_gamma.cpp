#include <doctest.h>

#include <cmath>

#include "gammaz/gamma.hpp"
#include "oracles.hpp"

using namespace gammaz;

namespace {

std::vector<double> random_point(int d, oracles::Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (double& v : x) v = rng.unit();
    return x;
}

// Finite-difference evaluation of the defining Gamma-2 bracket using only
// expression values (independent of the jet machinery). Works for the
// horizontal form and, with `rows = z`, the first bracket of the z-form.
double fd_gamma2(const SubRiemannianStructure& s, const Expression& f,
                 const std::vector<double>& x0, bool vertical) {
    const int D = s.dim();
    const long double h = 1e-3L;
    const long double hg = 1e-4L;
    auto evald = [&](const Expression& e, const std::vector<long double>& y) {
        std::vector<double> yd(y.begin(), y.end());
        return static_cast<long double>(e.eval(yd));
    };
    auto gradf = [&](const std::vector<long double>& y, int k) {
        oracles::Fn fe = [&](const std::vector<long double>& z) { return evald(f, z); };
        return oracles::fd1(fe, y, k, hg);
    };
    const int rows = vertical ? s.m : s.n;
    auto dirf = [&](const std::vector<long double>& y, int r) {
        long double sum = 0.0L;
        for (int c = 0; c < D; ++c)
            sum += evald(vertical ? s.z_entry(c, r) : s.a_entry(c, r), y) * gradf(y, c);
        return sum;
    };
    oracles::Fn gamma1_field = [&](const std::vector<long double>& y) {
        long double sum = 0.0L;
        for (int r = 0; r < rows; ++r) {
            const long double d_ = dirf(y, r);
            sum += d_ * d_;
        }
        return sum;
    };
    oracles::Fn Lf_field = [&](const std::vector<long double>& y) -> long double {
        // divergence-form generator by finite differences
        auto aaT = [&](const std::vector<long double>& z, int i, int k) {
            long double sum = 0.0L;
            for (int c = 0; c < s.n; ++c) sum += evald(s.a_entry(i, c), z) * evald(s.a_entry(k, c), z);
            return sum;
        };
        auto flux = [&](const std::vector<long double>& z, int i) {
            long double sum = 0.0L;
            for (int k = 0; k < D; ++k) sum += aaT(z, i, k) * gradf(z, k);
            return sum;
        };
        long double acc = 0.0L;
        for (int i = 0; i < D; ++i) {
            oracles::Fn fi = [&](const std::vector<long double>& z) { return flux(z, i); };
            acc += oracles::fd1(fi, y, i, hg);
        }
        for (int hat = 0; hat < D; ++hat) {
            long double comp = 0.0L;
            for (int k = 0; k < s.n; ++k)
                for (int kp = 0; kp < D; ++kp) {
                    oracles::Fn ae = [&](const std::vector<long double>& z) { return evald(s.a_entry(kp, k), z); };
                    comp += evald(s.a_entry(hat, k), y) * oracles::fd1(ae, y, kp, hg);
                }
            acc -= comp * gradf(y, hat);
        }
        for (int i = 0; i < D; ++i) {
            oracles::Fn ve = [&](const std::vector<long double>& z) { return evald(s.V, z); };
            acc -= oracles::fd1(ve, y, i, hg) * flux(y, i);
        }
        return acc;
    };
    std::vector<long double> x(x0.begin(), x0.end());
    // L Gamma_1(f,f): divergence form applied to the gamma1 field
    auto aaT = [&](const std::vector<long double>& z, int i, int k) {
        long double sum = 0.0L;
        for (int c = 0; c < s.n; ++c) sum += evald(s.a_entry(i, c), z) * evald(s.a_entry(k, c), z);
        return sum;
    };
    long double lg1 = 0.0L;
    for (int i = 0; i < D; ++i) {
        oracles::Fn fi = [&](const std::vector<long double>& z) {
            long double sum = 0.0L;
            for (int k = 0; k < D; ++k) sum += aaT(z, i, k) * oracles::fd1(gamma1_field, z, k, h);
            return sum;
        };
        lg1 += oracles::fd1(fi, x, i, h);
    }
    for (int hat = 0; hat < D; ++hat) {
        long double comp = 0.0L;
        for (int k = 0; k < s.n; ++k)
            for (int kp = 0; kp < D; ++kp) {
                oracles::Fn ae = [&](const std::vector<long double>& z) { return evald(s.a_entry(kp, k), z); };
                comp += evald(s.a_entry(hat, k), x) * oracles::fd1(ae, x, kp, h);
            }
        lg1 -= comp * oracles::fd1(gamma1_field, x, hat, h);
    }
    for (int i = 0; i < D; ++i) {
        oracles::Fn ve = [&](const std::vector<long double>& z) { return evald(s.V, z); };
        long double fluxg = 0.0L;
        for (int k = 0; k < D; ++k) fluxg += aaT(x, i, k) * oracles::fd1(gamma1_field, x, k, h);
        lg1 -= oracles::fd1(ve, x, i, h) * fluxg;
    }
    // Gamma_1(Lf, f) in the same directions
    long double cross = 0.0L;
    for (int r = 0; r < rows; ++r) {
        long double dLf = 0.0L, df = 0.0L;
        for (int c = 0; c < D; ++c) {
            const long double rowc = evald(vertical ? s.z_entry(c, r) : s.a_entry(c, r), x);
            dLf += rowc * oracles::fd1(Lf_field, x, c, h);
            df += rowc * gradf(x, c);
        }
        cross += dLf * df;
    }
    return static_cast<double>(0.5L * (lg1 - 2.0L * cross));
}

} // namespace

TEST_CASE("gamma1 values") {
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    const auto& c = heis.coords;
    std::vector<double> x = {1.0, 1.0, 0.7};
    CHECK(gamma1(heis, parse("x", c), parse("x", c), x) == doctest::Approx(1.0));
    CHECK(gamma1(heis, parse("z", c), parse("z", c), x) == doctest::Approx(0.5));
    CHECK(gamma1_z(heis, parse("z", c), parse("z", c), x) == doctest::Approx(1.0));
    CHECK(gamma1(heis, parse("x*y", c), parse("3", c), x) == doctest::Approx(0.0));
}

TEST_CASE("gamma2 classical control case") {
    SubRiemannianStructure ou = with_potential(make_preset(Preset::ou1d), "x^2/2");
    oracles::Rng rng(1);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> x = {1.5 * rng.unit()};
        const double g2 = gamma2(ou, parse("x", ou.coords), x);
        const double g1 = gamma1(ou, parse("x", ou.coords), parse("x", ou.coords), x);
        CHECK(g2 == doctest::Approx(1.0));
        CHECK(g1 == doctest::Approx(1.0));
    }
    // classical identity Gamma_2 = (f'')^2 + V'' (f')^2 for a = 1
    std::uint64_t st = 5;
    Expression f = random_cubic_polynomial(ou.coords, st);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> x = {rng.unit()};
        Jet fj = f.eval_jet(x, 3);
        const double want = fj.hess(0, 0) * fj.hess(0, 0) + fj.grad(0) * fj.grad(0);
        CHECK(gamma2(ou, f, x) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("gamma2 vanishes for linear f on flat structures") {
    SubRiemannianStructure flat;
    flat.n = 2; flat.m = 0;
    flat.coords = {"x", "y"};
    flat.a = {parse("1", flat.coords), parse("0", flat.coords),
              parse("0", flat.coords), parse("1", flat.coords)};
    flat.V = parse("0", flat.coords);
    flat.log_vol = parse("0", flat.coords);
    CHECK(gamma2(flat, parse("x+2*y", flat.coords), std::vector<double>{0.3, -0.8}) ==
          doctest::Approx(0.0));
}

TEST_CASE("gamma2 against the finite-difference bracket") {
    oracles::Rng rng(88);
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    for (int t = 0; t < 6; ++t) {
        std::vector<double> x = random_point(3, rng);
        Expression f = parse("x*y", heis.coords);
        const double got = gamma2(heis, f, x);
        const double want = fd_gamma2(heis, f, x, false);
        CHECK(std::fabs(got - want) <= 1e-6 * (1.0 + std::fabs(want)));
    }
}

TEST_CASE("gamma2_z_rho hand value on the nilpotent example") {
    SubRiemannianStructure s = with_potential(make_preset(Preset::heisenberg), "x^2+(y^2+z^2)/2");
    oracles::Rng rng(12);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> x = {1.0, 1.0, rng.unit()};
        CHECK(gamma2_z_rho(s, parse("z", s.coords), x) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("divergence corrections vanish for constant frames") {
    SubRiemannianStructure flat;
    flat.n = 1; flat.m = 1;
    flat.coords = {"x", "y"};
    flat.a = {parse("1", flat.coords), parse("0", flat.coords)};
    flat.z = {parse("0", flat.coords), parse("1", flat.coords)};
    flat.V = parse("x^2/2+y^2/2", flat.coords);
    flat.log_vol = parse("0", flat.coords);
    oracles::Rng rng(19);
    std::uint64_t st = 2;
    Expression f = random_cubic_polynomial(flat.coords, st);
    for (int t = 0; t < 5; ++t) {
        std::vector<double> x = random_point(2, rng);
        PointEval pe = eval_structure(flat, x);
        GammaEval ge = gamma_all(pe, f.eval_jet(x, 3));
        CHECK(ge.div_z_corr == doctest::Approx(0.0));
        CHECK(ge.div_a_corr == doctest::Approx(0.0));
    }
}

TEST_CASE("z-form with nonconstant g matches finite differences") {
    oracles::Rng rng(55);
    SubRiemannianStructure se2 =
        with_potential(make_preset(Preset::se2, {{"beta", 1.0}}, "2+sin(theta)"), "(theta^2+x^2+y^2)/2");
    for (int t = 0; t < 4; ++t) {
        std::vector<double> x = random_point(3, rng);
        std::uint64_t st = 300 + static_cast<std::uint64_t>(t);
        Expression f = random_cubic_polynomial(se2.coords, st);
        PointEval pe = eval_structure(se2, x);
        Jet fj = f.eval_jet(x, 3);
        GammaEval ge = gamma_all(pe, fj);
        // first bracket via nested finite differences
        const double zb = fd_gamma2(se2, f, x, true);
        const double got_bracket = ge.gamma2_z_rho - ge.div_z_corr + ge.div_a_corr;
        CHECK(std::fabs(got_bracket - zb) <= 2e-5 * (1.0 + std::fabs(zb)));
        // and the commutation defect is genuinely nonzero here
    }
}

TEST_CASE("gamma1 forms are nonnegative on the diagonal") {
    oracles::Rng rng(101);
    for (Preset p : {Preset::heisenberg, Preset::se2, Preset::martinet}) {
        SubRiemannianStructure s = make_preset(p);
        for (int t = 0; t < 30; ++t) {
            std::vector<double> x = random_point(3, rng);
            std::uint64_t st = 777 + static_cast<std::uint64_t>(t);
            Expression f = random_cubic_polynomial(s.coords, st);
            PointEval pe = eval_structure(s, x);
            Jet fj = f.eval_jet(x, 1);
            CHECK(gamma1(pe, fj, fj) >= -1e-13);
            CHECK(gamma1_z(pe, fj, fj) >= -1e-13);
        }
    }
}

TEST_CASE("vertical machinery degenerates cleanly without z") {
    SubRiemannianStructure ou = with_potential(make_preset(Preset::ou1d), "x^2/2");
    std::vector<double> x = {0.4};
    std::uint64_t st = 4;
    Expression f = random_cubic_polynomial(ou.coords, st);
    CHECK(gamma2_z_rho(ou, f, x) == 0.0);
    // explicit zero z-block behaves identically
    SubRiemannianStructure padded;
    padded.n = 1; padded.m = 1;
    padded.coords = {"x", "w"};
    padded.a = {parse("1", padded.coords), parse("0", padded.coords)};
    padded.z = {parse("0", padded.coords), parse("0", padded.coords)};
    padded.V = parse("x^2/2", padded.coords);
    padded.log_vol = parse("0", padded.coords);
    std::uint64_t st2 = 6;
    Expression g = random_cubic_polynomial(padded.coords, st2);
    CHECK(gamma2_z_rho(padded, g, std::vector<double>{0.4, 0.0}) == doctest::Approx(0.0));
}
