#include "gammaz/bochner.hpp"

#include <cmath>

#include "gammaz/errors.hpp"
#include "gammaz/gamma.hpp"
#include "gammaz/smallmat.hpp"

namespace gammaz {

std::vector<double> GradLinearField::apply(std::span<const double> grad) const {
    std::vector<double> out(static_cast<std::size_t>(len), 0.0);
    for (int e = 0; e < len; ++e) {
        double s = 0.0;
        for (int j = 0; j < dim; ++j) s += at(e, j) * grad[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(e)] = s;
    }
    return out;
}

namespace {

inline double aTv(const PointEval& pe, int i, int hat) { return pe.at(i, hat).value(); }
inline double zTv(const PointEval& pe, int i, int hat) { return pe.zt(i, hat).value(); }
inline double daT(const PointEval& pe, int i, int hat, int along) { return pe.at(i, hat).grad(along); }
inline double dzT(const PointEval& pe, int i, int hat, int along) { return pe.zt(i, hat).grad(along); }
inline double ddaT(const PointEval& pe, int i, int hat, int a1, int a2) { return pe.at(i, hat).hess(a1, a2); }
inline double ddzT(const PointEval& pe, int i, int hat, int a1, int a2) { return pe.zt(i, hat).hess(a1, a2); }

// gemm-free small helpers on row-major buffers
std::vector<double> mat_apply_field(std::span<const double> M, int rows, int cols,
                                    const GradLinearField& fld) {
    // (M * fld): rows x dim coefficient matrix
    std::vector<double> out(static_cast<std::size_t>(rows) * fld.dim, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double mv = M[static_cast<std::size_t>(r) * cols + c];
            if (mv == 0.0) continue;
            for (int j = 0; j < fld.dim; ++j)
                out[static_cast<std::size_t>(r) * fld.dim + j] += mv * fld.at(c, j);
        }
    return out;
}

GradLinearField matT_apply_field(std::span<const double> M, int rows, int cols,
                                 const GradLinearField& fld) {
    // (M^T * fld): fld has len == rows; result len == cols
    GradLinearField out(cols, fld.dim);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double mv = M[static_cast<std::size_t>(r) * cols + c];
            if (mv == 0.0) continue;
            for (int j = 0; j < fld.dim; ++j) out.at(c, j) += mv * fld.at(r, j);
        }
    return out;
}

// accumulate  coeffs^T coeffs  (coeffs: rows x dim) into B (dim x dim), scaled
void accumulate_gram(std::span<const double> coeffs, int rows, int dim, double scale,
                     std::span<double> B) {
    for (int r = 0; r < rows; ++r)
        for (int u = 0; u < dim; ++u) {
            const double cu = coeffs[static_cast<std::size_t>(r) * dim + u];
            if (cu == 0.0) continue;
            for (int v = 0; v < dim; ++v)
                B[static_cast<std::size_t>(u) * dim + v] +=
                    scale * cu * coeffs[static_cast<std::size_t>(r) * dim + v];
        }
}

void symmetrize(std::span<double> B, int d) {
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double v = 0.5 * (B[static_cast<std::size_t>(i) * d + j] +
                                    B[static_cast<std::size_t>(j) * d + i]);
            B[static_cast<std::size_t>(i) * d + j] = B[static_cast<std::size_t>(j) * d + i] = v;
        }
}

double quad_value(std::span<const double> B, std::span<const double> g, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            s += g[static_cast<std::size_t>(i)] * B[static_cast<std::size_t>(i) * d + j] *
                 g[static_cast<std::size_t>(j)];
    return s;
}

// drift b = -1/2 aa^T grad V as order-1 jets
std::vector<Jet> drift_jets(const PointEval& pe) {
    const int D = pe.D;
    std::vector<Jet> b(static_cast<std::size_t>(D), Jet(D, 1));
    for (int kh = 0; kh < D; ++kh) {
        Jet acc(D, 1);
        for (int kp = 0; kp < D; ++kp)
            acc += pe.aat(kh, kp).truncated(1) * pe.V_jet.derivative(kp).truncated(1);
        b[static_cast<std::size_t>(kh)] = -0.5 * acc;
    }
    return b;
}

} // namespace

BochnerFrame build_frame(const SubRiemannianStructure& s, std::span<const double> x) {
    BochnerFrame fr;
    fr.pe = eval_structure(s, x);
    fr.preset = s.preset;
    const PointEval& pe = fr.pe;
    const int n = pe.n, m = pe.m, D = pe.D;
    fr.n = n; fr.m = m; fr.D = D;

    fr.Q.assign(static_cast<std::size_t>(n * n) * (D * D), 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int ih = 0; ih < D; ++ih)
                for (int kh = 0; kh < D; ++kh)
                    fr.Q[static_cast<std::size_t>(i * n + k) * (D * D) + ih * D + kh] =
                        aTv(pe, i, ih) * aTv(pe, k, kh);
    fr.P.assign(static_cast<std::size_t>(n * m) * (D * D), 0.0);
    for (int zr = 0; zr < m; ++zr)
        for (int k = 0; k < n; ++k)
            for (int ih = 0; ih < D; ++ih)
                for (int kh = 0; kh < D; ++kh)
                    fr.P[static_cast<std::size_t>(zr * n + k) * (D * D) + ih * D + kh] =
                        zTv(pe, zr, ih) * aTv(pe, k, kh);

    fr.C = GradLinearField(D * D, D);
    fr.F = GradLinearField(D * D, D);
    fr.G = GradLinearField(D * D, D);
    fr.Dvec = GradLinearField(n * n, D);
    fr.E = GradLinearField(n * m, D);

    for (int ih = 0; ih < D; ++ih)
        for (int kh = 0; kh < D; ++kh) {
            const int slot = ih * D + kh;
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < n; ++k)
                    for (int ip = 0; ip < D; ++ip) {
                        const double t = aTv(pe, i, ih) * aTv(pe, i, ip) * daT(pe, k, kh, ip) -
                                         aTv(pe, k, ip) * aTv(pe, i, kh) * daT(pe, i, ih, ip);
                        if (t == 0.0) continue;
                        for (int j = 0; j < D; ++j) fr.C.at(slot, j) += t * aTv(pe, k, j);
                    }
            for (int i = 0; i < n; ++i)
                for (int k = 0; k < m; ++k)
                    for (int ip = 0; ip < D; ++ip) {
                        const double t = aTv(pe, i, ih) * aTv(pe, i, ip) * dzT(pe, k, kh, ip) -
                                         zTv(pe, k, ip) * aTv(pe, i, kh) * daT(pe, i, ih, ip);
                        if (t == 0.0) continue;
                        for (int j = 0; j < D; ++j) fr.F.at(slot, j) += t * zTv(pe, k, j);
                    }
            // here kh plays the role of the second Hessian slot of G
            for (int i = 0; i < n; ++i)
                for (int jz = 0; jz < m; ++jz)
                    for (int jp = 0; jp < D; ++jp)
                        for (int ip = 0; ip < D; ++ip) {
                            const double zz = zTv(pe, jz, kh) * zTv(pe, jz, jp);
                            fr.G.at(slot, ip) += zz * daT(pe, i, ih, jp) * aTv(pe, i, ip) +
                                                 zz * daT(pe, i, ip, jp) * aTv(pe, i, ih);
                            const double aa = aTv(pe, i, ih) * aTv(pe, i, ip);
                            fr.G.at(slot, jp) -= aa * dzT(pe, jz, kh, ip) * zTv(pe, jz, jp) +
                                                 aa * dzT(pe, jz, jp, ip) * zTv(pe, jz, kh);
                        }
        }

    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < D; ++j) {
                double t = 0.0;
                for (int ih = 0; ih < D; ++ih) t += aTv(pe, i, ih) * daT(pe, k, j, ih);
                fr.Dvec.at(i * n + k, j) = t;
            }
    for (int zr = 0; zr < m; ++zr)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < D; ++j) {
                double t = 0.0;
                for (int ih = 0; ih < D; ++ih) t += aTv(pe, k, ih) * dzT(pe, zr, j, ih);
                fr.E.at(zr * n + k, j) = t;
            }
    return fr;
}

namespace {

GradLinearField assumption_rhs(const BochnerFrame& fr) {
    const int D = fr.D;
    GradLinearField rhs(D * D, D);
    for (int e = 0; e < D * D; ++e)
        for (int j = 0; j < D; ++j)
            rhs.at(e, j) = fr.F.at(e, j) + fr.C.at(e, j) + fr.G.at(e, j);
    GradLinearField qd = matT_apply_field(fr.Q, fr.n * fr.n, D * D, fr.Dvec);
    GradLinearField pe_ = matT_apply_field(fr.P, fr.n * fr.m, D * D, fr.E);
    for (int e = 0; e < D * D; ++e)
        for (int j = 0; j < D; ++j) rhs.at(e, j) += qd.at(e, j) + pe_.at(e, j);
    return rhs;
}

// Gram matrices S = [Q^TQ | P^TP], D^2 x 2D^2
std::vector<double> stacked_system(const BochnerFrame& fr) {
    const int D = fr.D, dd = D * D;
    std::vector<double> S(static_cast<std::size_t>(dd) * (2 * dd), 0.0);
    for (int r = 0; r < dd; ++r)
        for (int c = 0; c < dd; ++c) {
            double q = 0.0, p = 0.0;
            for (int t = 0; t < fr.n * fr.n; ++t)
                q += fr.Q[static_cast<std::size_t>(t) * dd + r] * fr.Q[static_cast<std::size_t>(t) * dd + c];
            for (int t = 0; t < fr.n * fr.m; ++t)
                p += fr.P[static_cast<std::size_t>(t) * dd + r] * fr.P[static_cast<std::size_t>(t) * dd + c];
            S[static_cast<std::size_t>(r) * (2 * dd) + c] = q;
            S[static_cast<std::size_t>(r) * (2 * dd) + dd + c] = p;
        }
    return S;
}

double assumption_residual(const BochnerFrame& fr, const LambdaPair& lp) {
    const int D = fr.D, dd = D * D;
    std::vector<double> S = stacked_system(fr);
    GradLinearField rhs = assumption_rhs(fr);
    double num = 0.0, den = 0.0;
    for (int ih = 0; ih < D; ++ih)
        for (int kh = ih; kh < D; ++kh)
            for (int j = 0; j < D; ++j) {
                const int r1 = ih * D + kh, r2 = kh * D + ih;
                double lv = 0.0;
                for (int c = 0; c < dd; ++c) {
                    const double s1 = 0.5 * (S[static_cast<std::size_t>(r1) * (2 * dd) + c] +
                                             S[static_cast<std::size_t>(r2) * (2 * dd) + c]);
                    const double s2 = 0.5 * (S[static_cast<std::size_t>(r1) * (2 * dd) + dd + c] +
                                             S[static_cast<std::size_t>(r2) * (2 * dd) + dd + c]);
                    lv += s1 * lp.lambda1.at(c, j) + s2 * lp.lambda2.at(c, j);
                }
                const double rv = 0.5 * (rhs.at(r1, j) + rhs.at(r2, j));
                num += (lv - rv) * (lv - rv);
                den += rv * rv;
            }
    num = std::sqrt(num);
    den = std::sqrt(den);
    return den > 1e-300 ? num / den : num;
}

LambdaPair preset_lambda(const BochnerFrame& fr) {
    const PointEval& pe = fr.pe;
    const int D = fr.D;
    LambdaPair lp;
    lp.lambda1 = GradLinearField(D * D, D);
    lp.lambda2 = GradLinearField(D * D, D);
    switch (fr.preset) {
        case Preset::heisenberg: {
            // lambda1 identically zero; lambda2 puts +-(a^T grad f) into the
            // (z,x) and (z,y) Hessian slots
            for (int j = 0; j < D; ++j) {
                lp.lambda2.at(2 * D + 0, j) = aTv(pe, 1, j);
                lp.lambda2.at(2 * D + 1, j) = -aTv(pe, 0, j);
            }
            break;
        }
        case Preset::se2: {
            const double e = pe.at(1, 1).value();             // exp(beta theta)
            const double beta = pe.at(1, 1).grad(0) / e;
            const double g = -pe.zt(0, 2).value();
            lp.lambda1.at(0 * D + 1, 1) = beta;
            lp.lambda1.at(0 * D + 2, 2) = 0.5 * beta;
            lp.lambda1.at(1 * D + 0, 1) = beta;
            lp.lambda1.at(2 * D + 0, 2) = 0.5 * beta;
            lp.lambda1.at(2 * D + 2, 0) = -beta;
            const double ig2 = 1.0 / (g * g);
            for (int j = 0; j < D; ++j) lp.lambda2.at(2 * D + 0, j) = -beta * ig2 * aTv(pe, 1, j);
            lp.lambda2.at(2 * D + 2, 0) = beta * ig2;
            break;
        }
        case Preset::martinet: {
            const double y = pe.x[1];
            lp.lambda1.at(0 * D + 1, 2) = 0.5 * y;
            lp.lambda1.at(1 * D + 0, 2) = 0.5 * y;
            lp.lambda2.at(2 * D + 0, 1) = -y;
            lp.lambda2.at(2 * D + 1, 2) = 0.5 * y * y * y;
            lp.lambda2.at(2 * D + 1, 0) = y;
            break;
        }
        case Preset::ou1d:
            break; // constant frame: both shifts vanish
        default:
            throw ConfigError("preset shift vectors are only defined for builtin structures");
    }
    return lp;
}

} // namespace

LambdaPair solve_lambda(const BochnerFrame& fr, LambdaMode mode) {
    const int D = fr.D, dd = D * D;
    LambdaPair lp;
    if (mode == LambdaMode::preset) {
        lp = preset_lambda(fr);
    } else {
        lp.lambda1 = GradLinearField(dd, D);
        lp.lambda2 = GradLinearField(dd, D);
        std::vector<double> S = stacked_system(fr);
        GradLinearField rhs = assumption_rhs(fr);
        const int nsym = D * (D + 1) / 2;
        std::vector<double> Ssym(static_cast<std::size_t>(nsym) * (2 * dd), 0.0);
        int row = 0;
        for (int ih = 0; ih < D; ++ih)
            for (int kh = ih; kh < D; ++kh, ++row) {
                const int r1 = ih * D + kh, r2 = kh * D + ih;
                for (int c = 0; c < 2 * dd; ++c)
                    Ssym[static_cast<std::size_t>(row) * (2 * dd) + c] =
                        0.5 * (S[static_cast<std::size_t>(r1) * (2 * dd) + c] +
                               S[static_cast<std::size_t>(r2) * (2 * dd) + c]);
            }
        std::vector<double> b(static_cast<std::size_t>(nsym));
        for (int j = 0; j < D; ++j) {
            int rr = 0;
            for (int ih = 0; ih < D; ++ih)
                for (int kh = ih; kh < D; ++kh, ++rr)
                    b[static_cast<std::size_t>(rr)] = 0.5 * (rhs.at(ih * D + kh, j) + rhs.at(kh * D + ih, j));
            std::vector<double> sol = minnorm_lstsq(Ssym, nsym, 2 * dd, b);
            for (int c = 0; c < dd; ++c) {
                lp.lambda1.at(c, j) = sol[static_cast<std::size_t>(c)];
                lp.lambda2.at(c, j) = sol[static_cast<std::size_t>(dd + c)];
            }
        }
    }
    lp.residual = assumption_residual(fr, lp);
    if (lp.residual > kAssumptionTol) throw AssumptionUnsatisfied(lp.residual, kAssumptionTol);
    return lp;
}

HessRg hess_and_rg(const BochnerFrame& fr, const LambdaPair& lp, const Jet& f) {
    const int D = fr.D, dd = D * D;
    std::vector<double> grad(static_cast<std::size_t>(D));
    for (int j = 0; j < D; ++j) grad[static_cast<std::size_t>(j)] = f.grad(j);
    std::vector<double> X(static_cast<std::size_t>(dd));
    for (int ih = 0; ih < D; ++ih)
        for (int kh = 0; kh < D; ++kh) X[static_cast<std::size_t>(ih * D + kh)] = f.hess(ih, kh);
    std::vector<double> l1 = lp.lambda1.apply(grad);
    std::vector<double> l2 = lp.lambda2.apply(grad);
    std::vector<double> dv = fr.Dvec.apply(grad);
    std::vector<double> ev = fr.E.apply(grad);

    auto norm2_image = [&](std::span<const double> M, int rows, std::span<const double> v) {
        double s = 0.0;
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int c = 0; c < dd; ++c) acc += M[static_cast<std::size_t>(r) * dd + c] * v[static_cast<std::size_t>(c)];
            s += acc * acc;
        }
        return s;
    };
    std::vector<double> xl1(X), xl2(X);
    for (int c = 0; c < dd; ++c) {
        xl1[static_cast<std::size_t>(c)] += l1[static_cast<std::size_t>(c)];
        xl2[static_cast<std::size_t>(c)] += l2[static_cast<std::size_t>(c)];
    }
    HessRg out;
    out.hess2 = norm2_image(fr.Q, fr.n * fr.n, xl1) + norm2_image(fr.P, fr.n * fr.m, xl2);
    double rg = -norm2_image(fr.Q, fr.n * fr.n, l1) - norm2_image(fr.P, fr.n * fr.m, l2);
    for (double v : dv) rg += v * v;
    for (double v : ev) rg += v * v;
    out.rg = rg;
    return out;
}

std::vector<double> rg_matrix(const BochnerFrame& fr, const LambdaPair& lp) {
    const int D = fr.D, dd = D * D;
    std::vector<double> B(static_cast<std::size_t>(D) * D, 0.0);
    std::vector<double> ql1 = mat_apply_field(fr.Q, fr.n * fr.n, dd, lp.lambda1);
    std::vector<double> pl2 = mat_apply_field(fr.P, fr.n * fr.m, dd, lp.lambda2);
    accumulate_gram(ql1, fr.n * fr.n, D, -1.0, B);
    accumulate_gram(pl2, fr.n * fr.m, D, -1.0, B);
    accumulate_gram(fr.Dvec.c, fr.n * fr.n, D, 1.0, B);
    accumulate_gram(fr.E.c, fr.n * fr.m, D, 1.0, B);
    symmetrize(B, D);
    return B;
}

std::vector<double> r_ab_matrix(const BochnerFrame& fr) {
    const PointEval& pe = fr.pe;
    const int n = fr.n, D = fr.D;
    std::vector<double> B(static_cast<std::size_t>(D) * D, 0.0);
    auto add = [&](int u, int v, double c) { B[static_cast<std::size_t>(u) * D + v] += c; };
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int ip = 0; ip < D; ++ip)
                for (int ih = 0; ih < D; ++ih)
                    for (int kh = 0; kh < D; ++kh) {
                        const double t1 = aTv(pe, i, ip) * daT(pe, i, ih, ip) * daT(pe, k, kh, ih);
                        const double t2 = aTv(pe, i, ip) * aTv(pe, i, ih) * ddaT(pe, k, kh, ih, ip);
                        const double t3 = -aTv(pe, k, kh) * daT(pe, i, ip, kh) * daT(pe, i, ih, ip);
                        const double t4 = -aTv(pe, k, kh) * aTv(pe, i, ip) * ddaT(pe, i, ih, ip, kh);
                        if (t1 != 0.0 || t2 != 0.0)
                            for (int j = 0; j < D; ++j) add(kh, j, (t1 + t2) * aTv(pe, k, j));
                        if (t3 != 0.0 || t4 != 0.0)
                            for (int j = 0; j < D; ++j) add(ih, j, (t3 + t4) * aTv(pe, k, j));
                    }
    std::vector<Jet> b = drift_jets(pe);
    for (int i = 0; i < n; ++i)
        for (int ih = 0; ih < D; ++ih)
            for (int kh = 0; kh < D; ++kh) {
                const double t1 = -2.0 * aTv(pe, i, ih) * b[static_cast<std::size_t>(kh)].grad(ih);
                const double t2 = 2.0 * b[static_cast<std::size_t>(kh)].value() * daT(pe, i, ih, kh);
                for (int j = 0; j < D; ++j) {
                    if (t1 != 0.0) add(kh, j, t1 * aTv(pe, i, j));
                    if (t2 != 0.0) add(ih, j, t2 * aTv(pe, i, j));
                }
            }
    symmetrize(B, D);
    return B;
}

std::vector<double> r_zb_matrix(const BochnerFrame& fr) {
    const PointEval& pe = fr.pe;
    const int n = fr.n, m = fr.m, D = fr.D;
    std::vector<double> B(static_cast<std::size_t>(D) * D, 0.0);
    if (m == 0) return B;
    auto add = [&](int u, int v, double c) { B[static_cast<std::size_t>(u) * D + v] += c; };
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m; ++k)
            for (int ip = 0; ip < D; ++ip)
                for (int ih = 0; ih < D; ++ih)
                    for (int kh = 0; kh < D; ++kh) {
                        const double t1 = aTv(pe, i, ip) * daT(pe, i, ih, ip) * dzT(pe, k, kh, ih);
                        const double t2 = aTv(pe, i, ip) * aTv(pe, i, ih) * ddzT(pe, k, kh, ih, ip);
                        const double t3 = -zTv(pe, k, kh) * daT(pe, i, ip, kh) * daT(pe, i, ih, ip);
                        const double t4 = -zTv(pe, k, kh) * aTv(pe, i, ip) * ddaT(pe, i, ih, ip, kh);
                        if (t1 != 0.0 || t2 != 0.0)
                            for (int j = 0; j < D; ++j) add(kh, j, (t1 + t2) * zTv(pe, k, j));
                        if (t3 != 0.0 || t4 != 0.0)
                            for (int j = 0; j < D; ++j) add(ih, j, (t3 + t4) * zTv(pe, k, j));
                    }
    std::vector<Jet> b = drift_jets(pe);
    for (int i = 0; i < m; ++i)
        for (int ih = 0; ih < D; ++ih)
            for (int kh = 0; kh < D; ++kh) {
                const double t1 = -2.0 * zTv(pe, i, ih) * b[static_cast<std::size_t>(kh)].grad(ih);
                const double t2 = 2.0 * b[static_cast<std::size_t>(kh)].value() * dzT(pe, i, ih, kh);
                for (int j = 0; j < D; ++j) {
                    if (t1 != 0.0) add(kh, j, t1 * zTv(pe, i, j));
                    if (t2 != 0.0) add(ih, j, t2 * zTv(pe, i, j));
                }
            }
    symmetrize(B, D);
    return B;
}

std::vector<double> r_rho_matrix(const BochnerFrame& fr) {
    const PointEval& pe = fr.pe;
    const int n = fr.n, m = fr.m, D = fr.D;
    std::vector<double> B(static_cast<std::size_t>(D) * D, 0.0);
    if (m == 0) return B;
    auto add = [&](int u, int v, double c) { B[static_cast<std::size_t>(u) * D + v] += c; };
    std::vector<double> zlr(static_cast<std::size_t>(m), 0.0), alr(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < m; ++k)
        for (int h = 0; h < D; ++h) zlr[static_cast<std::size_t>(k)] += zTv(pe, k, h) * pe.grad_log_rho[static_cast<std::size_t>(h)];
    for (int l = 0; l < n; ++l)
        for (int h = 0; h < D; ++h) alr[static_cast<std::size_t>(l)] += aTv(pe, l, h) * pe.grad_log_rho[static_cast<std::size_t>(h)];

    for (int k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i)
            for (int kp = 0; kp < D; ++kp)
                for (int kh = 0; kh < D; ++kh)
                    for (int ih = 0; ih < D; ++ih)
                        for (int ip = 0; ip < D; ++ip) {
                            double t = 2.0 * dzT(pe, k, kp, kp) * zTv(pe, k, kh) * daT(pe, i, ih, kh) * aTv(pe, i, ip);
                            t += 2.0 * zTv(pe, k, kp) * dzT(pe, k, kh, kp) * daT(pe, i, ih, kh) * aTv(pe, i, ip);
                            t += 2.0 * zTv(pe, k, kp) * zTv(pe, k, kh) * ddaT(pe, i, ih, kh, kp) * aTv(pe, i, ip);
                            t += 2.0 * zTv(pe, k, kp) * zTv(pe, k, kh) * daT(pe, i, ih, kh) * daT(pe, i, ip, kp);
                            if (t != 0.0) add(ih, ip, t);
                        }
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i)
            for (int kh = 0; kh < D; ++kh)
                for (int ih = 0; ih < D; ++ih)
                    for (int ip = 0; ip < D; ++ip) {
                        const double t = 2.0 * zlr[static_cast<std::size_t>(k)] * zTv(pe, k, kh) * daT(pe, i, ih, kh) * aTv(pe, i, ip);
                        if (t != 0.0) add(ih, ip, t);
                    }
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l)
            for (int lp = 0; lp < D; ++lp)
                for (int lh = 0; lh < D; ++lh)
                    for (int jh = 0; jh < D; ++jh)
                        for (int jp = 0; jp < D; ++jp) {
                            double t = -2.0 * daT(pe, l, lp, lp) * aTv(pe, l, lh) * dzT(pe, j, jh, lh) * zTv(pe, j, jp);
                            t += -2.0 * aTv(pe, l, lp) * daT(pe, l, lh, lp) * dzT(pe, j, jh, lh) * zTv(pe, j, jp);
                            t += -2.0 * aTv(pe, l, lp) * aTv(pe, l, lh) * ddzT(pe, j, jh, lh, lp) * zTv(pe, j, jp);
                            t += -2.0 * aTv(pe, l, lp) * aTv(pe, l, lh) * dzT(pe, j, jh, lh) * dzT(pe, j, jp, lp);
                            if (t != 0.0) add(jh, jp, t);
                        }
    for (int j = 0; j < m; ++j)
        for (int l = 0; l < n; ++l)
            for (int lh = 0; lh < D; ++lh)
                for (int jh = 0; jh < D; ++jh)
                    for (int jp = 0; jp < D; ++jp) {
                        const double t = -2.0 * alr[static_cast<std::size_t>(l)] * aTv(pe, l, lh) * dzT(pe, j, jh, lh) * zTv(pe, j, jp);
                        if (t != 0.0) add(jh, jp, t);
                    }
    symmetrize(B, D);
    return B;
}

TensorValues curvature_tensors(const BochnerFrame& fr, const Jet& f) {
    const int D = fr.D;
    std::vector<double> grad(static_cast<std::size_t>(D));
    for (int j = 0; j < D; ++j) grad[static_cast<std::size_t>(j)] = f.grad(j);
    TensorValues out;
    out.r_ab = quad_value(r_ab_matrix(fr), grad, D);
    out.r_zb = quad_value(r_zb_matrix(fr), grad, D);
    out.r_rho = quad_value(r_rho_matrix(fr), grad, D);
    return out;
}

CurvatureMatrix extract_A(const SubRiemannianStructure& s, std::span<const double> x,
                          LambdaMode mode) {
    BochnerFrame fr = build_frame(s, x);
    LambdaPair lp = solve_lambda(fr, mode);
    const int D = fr.D;
    // M = [a | z] with column c < n the c-th horizontal direction
    std::vector<double> M(static_cast<std::size_t>(D) * D, 0.0);
    for (int r = 0; r < D; ++r) {
        for (int c = 0; c < fr.n; ++c) M[static_cast<std::size_t>(r) * D + c] = aTv(fr.pe, c, r);
        for (int c = 0; c < fr.m; ++c) M[static_cast<std::size_t>(r) * D + fr.n + c] = zTv(fr.pe, c, r);
    }
    const double det = determinant(M, D);
    if (std::fabs(det) < 1e-12) throw SingularFrame(std::fabs(det));
    // columns of Minv via dense solves against unit vectors
    std::vector<double> Minv(static_cast<std::size_t>(D) * D, 0.0);
    {
        std::vector<double> e(static_cast<std::size_t>(D), 0.0), col(static_cast<std::size_t>(D));
        for (int c = 0; c < D; ++c) {
            e.assign(static_cast<std::size_t>(D), 0.0);
            e[static_cast<std::size_t>(c)] = 1.0;
            solve_dense(M, D, e, col);
            for (int r = 0; r < D; ++r) Minv[static_cast<std::size_t>(r) * D + c] = col[static_cast<std::size_t>(r)];
        }
    }
    auto to_u_basis = [&](std::span<const double> B) {
        std::vector<double> out(static_cast<std::size_t>(D) * D, 0.0);
        for (int r = 0; r < D; ++r)
            for (int c = 0; c < D; ++c) {
                double sum = 0.0;
                for (int i = 0; i < D; ++i)
                    for (int j = 0; j < D; ++j)
                        sum += Minv[static_cast<std::size_t>(r) * D + i] * B[static_cast<std::size_t>(i) * D + j] *
                               Minv[static_cast<std::size_t>(c) * D + j];
                out[static_cast<std::size_t>(r) * D + c] = sum;
            }
        symmetrize(out, D);
        return out;
    };
    std::vector<double> Bg = rg_matrix(fr, lp);
    std::vector<double> Bab = r_ab_matrix(fr);
    for (std::size_t t = 0; t < Bg.size(); ++t) Bg[t] += Bab[t];
    CurvatureMatrix cm;
    cm.D = D;
    cm.A_rg_ab = to_u_basis(Bg);
    cm.A_zb = to_u_basis(r_zb_matrix(fr));
    cm.A_rho = to_u_basis(r_rho_matrix(fr));
    cm.A.assign(static_cast<std::size_t>(D) * D, 0.0);
    for (std::size_t t = 0; t < cm.A.size(); ++t)
        cm.A[t] = cm.A_rg_ab[t] + cm.A_zb[t] + cm.A_rho[t];
    return cm;
}

double verify_bochner(const SubRiemannianStructure& s, const Jet& f_jet,
                      std::span<const double> x, LambdaMode mode) {
    BochnerFrame fr = build_frame(s, x);
    const double lhs = gamma2(fr.pe, f_jet) + gamma2_z_rho(fr.pe, f_jet);
    LambdaPair lp = solve_lambda(fr, mode);
    HessRg hr = hess_and_rg(fr, lp, f_jet);
    TensorValues tv = curvature_tensors(fr, f_jet);
    const double rhs = hr.hess2 + hr.rg + tv.r_ab + tv.r_zb + tv.r_rho;
    return std::fabs(lhs - rhs) / (1.0 + std::fabs(lhs));
}

double verify_bochner(const SubRiemannianStructure& s, const Expression& f,
                      std::span<const double> x, LambdaMode mode) {
    return verify_bochner(s, f.eval_jet(x, 3), x, mode);
}

} // namespace gammaz
