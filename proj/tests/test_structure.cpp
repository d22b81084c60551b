#include <doctest.h>

#include <cmath>

#include "gammaz/errors.hpp"
#include "gammaz/smallmat.hpp"
#include "gammaz/structure.hpp"
#include "oracles.hpp"

using namespace gammaz;

namespace {

std::vector<double> random_point(int d, oracles::Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(d));
    for (double& v : x) v = rng.unit();
    return x;
}

// finite-difference divergence-form generator, long double, expression
// evaluation only (independent of the jet path)
double fd_generator(const SubRiemannianStructure& s, const Expression& f,
                    const std::vector<double>& x0) {
    const int D = s.dim();
    const long double h = 1e-4L;
    auto evald = [&](const Expression& e, const std::vector<long double>& y) {
        std::vector<double> yd(y.begin(), y.end());
        return static_cast<long double>(e.eval(yd));
    };
    auto gradf = [&](const std::vector<long double>& y, int k) {
        oracles::Fn fe = [&](const std::vector<long double>& z) { return evald(f, z); };
        return oracles::fd1(fe, y, k, h);
    };
    auto aaT = [&](const std::vector<long double>& y, int i, int k) {
        long double sum = 0.0L;
        for (int c = 0; c < s.n; ++c) sum += evald(s.a_entry(i, c), y) * evald(s.a_entry(k, c), y);
        return sum;
    };
    std::vector<long double> x(x0.begin(), x0.end());
    // flux component i of aa^T grad f
    auto flux = [&](const std::vector<long double>& y, int i) {
        long double sum = 0.0L;
        for (int k = 0; k < D; ++k) sum += aaT(y, i, k) * gradf(y, k);
        return sum;
    };
    long double acc = 0.0L;
    for (int i = 0; i < D; ++i) {
        oracles::Fn fi = [&](const std::vector<long double>& y) { return flux(y, i); };
        acc += oracles::fd1(fi, x, i, h);
    }
    // a (x) grad a by finite differences of the entries
    for (int hat = 0; hat < D; ++hat) {
        long double comp = 0.0L;
        for (int k = 0; k < s.n; ++k)
            for (int kp = 0; kp < D; ++kp) {
                oracles::Fn ae = [&](const std::vector<long double>& y) { return evald(s.a_entry(kp, k), y); };
                comp += evald(s.a_entry(hat, k), x) * oracles::fd1(ae, x, kp, h);
            }
        acc -= comp * gradf(x, hat);
    }
    for (int i = 0; i < D; ++i) {
        oracles::Fn ve = [&](const std::vector<long double>& y) { return evald(s.V, y); };
        acc -= oracles::fd1(ve, x, i, h) * flux(x, i);
    }
    return static_cast<double>(acc);
}

} // namespace

TEST_CASE("horizontal and vertical gradients on the worked structures") {
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    const std::vector<std::string>& c = heis.coords;
    {
        auto g = horizontal_gradient(heis, parse("x", c), std::vector<double>{0.4, -0.3, 0.9});
        CHECK(g[0] == doctest::Approx(1.0));
        CHECK(g[1] == doctest::Approx(0.0));
    }
    {
        auto g = horizontal_gradient(heis, parse("z", c), std::vector<double>{1.0, 1.0, 0.2});
        CHECK(g[0] == doctest::Approx(-0.5));
        CHECK(g[1] == doctest::Approx(0.5));
        auto v = vertical_gradient(heis, parse("z", c), std::vector<double>{1.0, 1.0, 0.2});
        CHECK(v[0] == doctest::Approx(1.0));
    }
    SubRiemannianStructure mart = make_preset(Preset::martinet);
    {
        auto g = horizontal_gradient(mart, parse("z", mart.coords), std::vector<double>{0.1, 2.0, 0.0});
        CHECK(g[0] == doctest::Approx(2.0));
        CHECK(g[1] == doctest::Approx(0.0));
        auto v = vertical_gradient(mart, parse("x", mart.coords), std::vector<double>{0.1, 2.0, 0.0});
        CHECK(v[0] == doctest::Approx(0.0));
    }
    SubRiemannianStructure se2 = make_preset(Preset::se2, {{"beta", 2.0}});
    {
        auto v = vertical_gradient(se2, parse("y", se2.coords), std::vector<double>{0.3, 0.1, -0.2});
        CHECK(v[0] == doctest::Approx(-2.0));   // z^T = (0,0,-g), g = beta
    }
}

TEST_CASE("a (x) grad a") {
    oracles::Rng rng(17);
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    for (int t = 0; t < 5; ++t) {
        auto v = a_otimes_nabla_a(eval_structure(heis, random_point(3, rng)));
        for (double comp : v) CHECK(comp == doctest::Approx(0.0));
    }
    SubRiemannianStructure mart = make_preset(Preset::martinet);
    auto v = a_otimes_nabla_a(eval_structure(mart, std::vector<double>{0.2, 3.0, -1.0}));
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[1] == doctest::Approx(3.0));
    CHECK(v[2] == doctest::Approx(0.0));
    SubRiemannianStructure ou = make_preset(Preset::ou1d);
    auto w = a_otimes_nabla_a(eval_structure(ou, std::vector<double>{0.7}));
    CHECK(w[0] == doctest::Approx(0.0));
}

TEST_CASE("invariant measure identity") {
    oracles::Rng rng(23);
    SubRiemannianStructure mart = make_preset(Preset::martinet);
    std::vector<double> pts(300);
    for (double& v : pts) v = rng.unit();
    CHECK(check_invariant_measure(mart, pts, 100) <= 1e-12);

    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    CHECK(check_invariant_measure(heis, pts, 100) <= 1e-12);

    // deliberately wrong volume: residual is max |y| over the samples
    SubRiemannianStructure bad = mart;
    bad.log_vol = parse("0", bad.coords);
    double maxy = 0.0;
    for (int p = 0; p < 100; ++p) maxy = std::max(maxy, std::fabs(pts[static_cast<std::size_t>(3 * p + 1)]));
    CHECK(check_invariant_measure(bad, pts, 100) == doctest::Approx(maxy).epsilon(1e-12));
}

TEST_CASE("drift examples") {
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    {
        auto b = drift_b(eval_structure(heis, std::vector<double>{0.3, 0.4, -0.5}));
        for (double v : b) CHECK(v == doctest::Approx(0.0));   // V = 0
    }
    SubRiemannianStructure heisv = with_potential(heis, "x^2+(y^2+z^2)/2");
    {
        auto b = drift_b(eval_structure(heisv, std::vector<double>{0.0, 0.0, 0.0}));
        for (double v : b) CHECK(v == doctest::Approx(0.0));
    }
    SubRiemannianStructure ou = with_potential(make_preset(Preset::ou1d), "x^2/2");
    auto b = drift_b(eval_structure(ou, std::vector<double>{3.0}));
    CHECK(b[0] == doctest::Approx(-1.5));
}

TEST_CASE("generator values") {
    SubRiemannianStructure heis = make_preset(Preset::heisenberg);
    {
        // V = 0, f = x^2: aa^T grad f = (2x, 0, -xy), divergence 2
        oracles::Rng rng(3);
        for (int t = 0; t < 5; ++t)
            CHECK(generator_L(heis, parse("x^2", heis.coords), random_point(3, rng)) == doctest::Approx(2.0));
        CHECK(generator_L(heis, parse("5", heis.coords), std::vector<double>{0.1, 0.2, 0.3}) ==
              doctest::Approx(0.0));
    }
    SubRiemannianStructure heisv = with_potential(heis, "x^2+(y^2+z^2)/2");
    oracles::Rng rng(9);
    for (int t = 0; t < 5; ++t) {
        auto x = random_point(3, rng);
        const double want = x[0] * x[1] / 2.0 - x[2] * (x[0] * x[0] + x[1] * x[1]) / 4.0;
        CHECK(generator_L(heisv, parse("z", heisv.coords), x) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("generator matches the finite-difference divergence form") {
    oracles::Rng rng(1234);
    std::vector<SubRiemannianStructure> presets;
    presets.push_back(with_potential(make_preset(Preset::heisenberg), "x^2+(y^2+z^2)/2"));
    presets.push_back(with_potential(make_preset(Preset::martinet), "(x^2+y^2)/2"));
    presets.push_back(with_potential(make_preset(Preset::se2), "(theta^2+x^2+y^2)/2"));
    presets.push_back(with_potential(make_preset(Preset::ou1d), "x^2/2"));
    int done = 0;
    for (int t = 0; t < 100; ++t) {
        const SubRiemannianStructure& s = presets[static_cast<std::size_t>(t) % presets.size()];
        std::vector<double> x = random_point(s.dim(), rng);
        std::uint64_t st = 1000 + static_cast<std::uint64_t>(t);
        Expression f = random_cubic_polynomial(s.coords, st);
        const double jet_val = generator_L(s, f, x);
        const double fd_val = fd_generator(s, f, x);
        CHECK(std::fabs(jet_val - fd_val) <= 1e-6 * (1.0 + std::fabs(fd_val)));
        ++done;
    }
    CHECK(done == 100);
}

TEST_CASE("gradients are linear in f") {
    oracles::Rng rng(6);
    SubRiemannianStructure se2 = make_preset(Preset::se2, {{"beta", 1.0}}, "2+sin(theta)");
    std::uint64_t s1 = 77, s2 = 78;
    Expression f = random_cubic_polynomial(se2.coords, s1);
    Expression g = random_cubic_polynomial(se2.coords, s2);
    const double alpha = 1.7, beta = -0.4;
    for (int t = 0; t < 20; ++t) {
        auto x = random_point(3, rng);
        PointEval pe = eval_structure(se2, x);
        Jet fj = f.eval_jet(x, 1), gj = g.eval_jet(x, 1);
        Jet combo = alpha * fj + beta * gj;
        auto hf = horizontal_gradient(pe, fj), hg = horizontal_gradient(pe, gj),
             hc = horizontal_gradient(pe, combo);
        for (int k = 0; k < 2; ++k)
            CHECK(hc[static_cast<std::size_t>(k)] ==
                  doctest::Approx(alpha * hf[static_cast<std::size_t>(k)] + beta * hg[static_cast<std::size_t>(k)]).epsilon(1e-14));
    }
}

TEST_CASE("aa^T and zz^T stay positive semidefinite") {
    oracles::Rng rng(29);
    for (Preset p : {Preset::heisenberg, Preset::se2, Preset::martinet}) {
        SubRiemannianStructure s = make_preset(p);
        for (int t = 0; t < 20; ++t) {
            PointEval pe = eval_structure(s, random_point(3, rng));
            std::vector<double> A(9), Z(9);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    A[static_cast<std::size_t>(i * 3 + j)] = pe.aat(i, j).value();
                    Z[static_cast<std::size_t>(i * 3 + j)] = pe.zzt(i, j).value();
                }
            CHECK(smallest_eigenvalue(A, 3) >= -1e-12);
            CHECK(smallest_eigenvalue(Z, 3) >= -1e-12);
        }
    }
}
