#include "gammaz/gamma.hpp"

namespace gammaz {

namespace {

// Gamma_1 field as a jet: sum_k (row_k . grad f)^2 where row_k are the jets
// of a^T (or z^T) row k. Keeps order `ord` in the base point.
Jet gamma1_field(const PointEval& pe, std::span<const Jet> rows, int nrows, const Jet& f, int ord) {
    const int D = pe.D;
    Jet acc(D, ord);
    for (int k = 0; k < nrows; ++k) {
        Jet dir(D, ord);
        for (int h = 0; h < D; ++h)
            dir += rows[static_cast<std::size_t>(k * D + h)].truncated(ord) *
                   f.derivative(h).truncated(ord);
        acc += dir * dir;
    }
    return acc;
}

double gamma1_values(const PointEval& pe, std::span<const Jet> rows, int nrows, const Jet& f,
                     const Jet& g) {
    const int D = pe.D;
    double acc = 0.0;
    for (int k = 0; k < nrows; ++k) {
        double df = 0.0, dg = 0.0;
        for (int h = 0; h < D; ++h) {
            df += rows[static_cast<std::size_t>(k * D + h)].value() * f.grad(h);
            dg += rows[static_cast<std::size_t>(k * D + h)].value() * g.grad(h);
        }
        acc += df * dg;
    }
    return acc;
}

// Bilinear vector Gamma_{1, grad(M)}(f,f): component khat is
// <grad f, d_khat(M) grad f>, returned as order-1 jets for the divergence.
std::vector<Jet> grad_bilinear_vector(const PointEval& pe, std::span<const Jet> M, const Jet& f) {
    const int D = pe.D;
    std::vector<Jet> out(static_cast<std::size_t>(D), Jet(D, 1));
    for (int kh = 0; kh < D; ++kh) {
        Jet acc(D, 1);
        for (int i = 0; i < D; ++i)
            for (int j = 0; j < D; ++j)
                acc += f.derivative(i).truncated(1) *
                       M[static_cast<std::size_t>(i * D + j)].derivative(kh).truncated(1) *
                       f.derivative(j).truncated(1);
        out[static_cast<std::size_t>(kh)] = acc;
    }
    return out;
}

// (1/rho*) div(rho* M F) = sum_i [ d_i (M F)_i + (grad log rho*)_i (M F)_i ]
double weighted_divergence(const PointEval& pe, std::span<const Jet> M, std::span<const Jet> F) {
    const int D = pe.D;
    double acc = 0.0;
    for (int i = 0; i < D; ++i) {
        Jet comp(D, 1);
        for (int k = 0; k < D; ++k)
            comp += M[static_cast<std::size_t>(i * D + k)].truncated(1) * F[static_cast<std::size_t>(k)];
        acc += comp.grad(i) + pe.grad_log_rho[static_cast<std::size_t>(i)] * comp.value();
    }
    return acc;
}

double bracket(const PointEval& pe, std::span<const Jet> rows, int nrows, const Jet& f) {
    Jet g1 = gamma1_field(pe, rows, nrows, f, 2);
    const double lg1 = apply_generator(pe, g1);
    Jet lf = generator_jet(pe, f);
    const double g1_lf_f = gamma1_values(pe, rows, nrows, lf, f);
    return 0.5 * (lg1 - 2.0 * g1_lf_f);
}

} // namespace

double gamma1(const PointEval& pe, const Jet& f, const Jet& g) {
    return gamma1_values(pe, pe.aT, pe.n, f, g);
}

double gamma1_z(const PointEval& pe, const Jet& f, const Jet& g) {
    return gamma1_values(pe, pe.zT, pe.m, f, g);
}

double gamma1(const SubRiemannianStructure& s, const Expression& f, const Expression& g,
              std::span<const double> x) {
    return gamma1(eval_structure(s, x), f.eval_jet(x, 1), g.eval_jet(x, 1));
}

double gamma1_z(const SubRiemannianStructure& s, const Expression& f, const Expression& g,
                std::span<const double> x) {
    return gamma1_z(eval_structure(s, x), f.eval_jet(x, 1), g.eval_jet(x, 1));
}

double gamma2(const PointEval& pe, const Jet& f) {
    return bracket(pe, pe.aT, pe.n, f);
}

double gamma2(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x) {
    return gamma2(eval_structure(s, x), f.eval_jet(x, 3));
}

double gamma2_z_rho(const PointEval& pe, const Jet& f) {
    if (pe.m == 0) return 0.0;
    const double zb = bracket(pe, pe.zT, pe.m, f);
    std::vector<Jet> va = grad_bilinear_vector(pe, pe.aaT, f);
    std::vector<Jet> vz = grad_bilinear_vector(pe, pe.zzT, f);
    return zb + weighted_divergence(pe, pe.zzT, va) - weighted_divergence(pe, pe.aaT, vz);
}

double gamma2_z_rho(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x) {
    return gamma2_z_rho(eval_structure(s, x), f.eval_jet(x, 3));
}

GammaEval gamma_all(const PointEval& pe, const Jet& f) {
    GammaEval out;
    out.gamma1 = gamma1(pe, f, f);
    out.gamma1_z = gamma1_z(pe, f, f);
    out.gamma2 = gamma2(pe, f);
    if (pe.m > 0) {
        std::vector<Jet> va = grad_bilinear_vector(pe, pe.aaT, f);
        std::vector<Jet> vz = grad_bilinear_vector(pe, pe.zzT, f);
        out.div_z_corr = weighted_divergence(pe, pe.zzT, va);
        out.div_a_corr = weighted_divergence(pe, pe.aaT, vz);
        out.gamma2_z_rho = bracket(pe, pe.zT, pe.m, f) + out.div_z_corr - out.div_a_corr;
    }
    return out;
}

} // namespace gammaz
