#include "gammaz/structure.hpp"

#include <cmath>
#include <cstdlib>

#include "gammaz/errors.hpp"

namespace gammaz {

namespace {

std::vector<Expression> parse_matrix(std::span<const std::string> entries,
                                     std::span<const std::string> coords,
                                     const std::map<std::string, double>& params) {
    std::vector<Expression> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(parse(e, coords, params));
    return out;
}

} // namespace

Preset preset_from_name(std::string_view name) {
    if (name == "heisenberg") return Preset::heisenberg;
    if (name == "se2") return Preset::se2;
    if (name == "martinet") return Preset::martinet;
    if (name == "ou1d") return Preset::ou1d;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::string_view preset_name(Preset p) {
    switch (p) {
        case Preset::heisenberg: return "heisenberg";
        case Preset::se2: return "se2";
        case Preset::martinet: return "martinet";
        case Preset::ou1d: return "ou1d";
        default: return "custom";
    }
}

SubRiemannianStructure make_preset(Preset which, const std::map<std::string, double>& params,
                                   std::string_view g_expr) {
    SubRiemannianStructure s;
    s.preset = which;
    switch (which) {
        case Preset::heisenberg: {
            s.n = 2; s.m = 1;
            s.coords = {"x", "y", "z"};
            const std::string a[] = {"1", "0", "0", "1", "-y/2", "x/2"};
            const std::string z[] = {"0", "0", "1"};
            s.a = parse_matrix(a, s.coords, params);
            s.z = parse_matrix(z, s.coords, params);
            s.V = parse("0", s.coords);
            s.log_vol = parse("0", s.coords);
            break;
        }
        case Preset::se2: {
            s.n = 2; s.m = 1;
            s.coords = {"theta", "x", "y"};
            std::map<std::string, double> p = params;
            if (!p.count("beta")) p["beta"] = 1.0;
            const std::string g(g_expr.empty() ? "beta" : g_expr);
            const std::string a[] = {"1", "0", "0", "exp(beta*theta)", "0", "1"};
            const std::string z[] = {"0", "0", "-(" + g + ")"};
            s.a = parse_matrix(a, s.coords, p);
            s.z = parse_matrix(z, s.coords, p);
            s.V = parse("0", s.coords);
            s.log_vol = parse("0", s.coords);
            break;
        }
        case Preset::martinet: {
            s.n = 2; s.m = 1;
            s.coords = {"x", "y", "z"};
            const std::string a[] = {"1", "0", "0", "1", "y^2/2", "0"};
            const std::string z[] = {"0", "0", "1"};
            s.a = parse_matrix(a, s.coords, params);
            s.z = parse_matrix(z, s.coords, params);
            s.V = parse("0", s.coords);
            s.log_vol = parse("-y^2/2", s.coords);
            break;
        }
        case Preset::ou1d: {
            s.n = 1; s.m = 0;
            s.coords = {"x"};
            const std::string a[] = {"1"};
            s.a = parse_matrix(a, s.coords, params);
            s.V = parse("0", s.coords);
            s.log_vol = parse("0", s.coords);
            break;
        }
        default:
            throw ConfigError("make_preset called without a preset");
    }
    return s;
}

SubRiemannianStructure with_potential(SubRiemannianStructure s, std::string_view v_text,
                                      const std::map<std::string, double>& params) {
    s.V = parse(v_text, s.coords, params);
    return s;
}

PointEval eval_structure(const SubRiemannianStructure& s, std::span<const double> x) {
    PointEval pe;
    pe.n = s.n;
    pe.m = s.m;
    pe.D = s.dim();
    pe.x.assign(x.begin(), x.end());
    const int D = pe.D;
    pe.aT.reserve(static_cast<std::size_t>(s.n * D));
    for (int i = 0; i < s.n; ++i)
        for (int hat = 0; hat < D; ++hat) pe.aT.push_back(s.a_entry(hat, i).eval_jet(x, 2));
    pe.zT.reserve(static_cast<std::size_t>(s.m * D));
    for (int i = 0; i < s.m; ++i)
        for (int hat = 0; hat < D; ++hat) pe.zT.push_back(s.z_entry(hat, i).eval_jet(x, 2));
    pe.V_jet = s.V.eval_jet(x, 2);
    pe.logvol_jet = s.log_vol.eval_jet(x, 2);

    pe.aaT.assign(static_cast<std::size_t>(D * D), Jet(D, 2));
    pe.zzT.assign(static_cast<std::size_t>(D * D), Jet(D, 2));
    for (int i = 0; i < D; ++i)
        for (int j = i; j < D; ++j) {
            Jet sa(D, 2), sz(D, 2);
            for (int k = 0; k < s.n; ++k) sa += pe.at(k, i) * pe.at(k, j);
            for (int k = 0; k < s.m; ++k) sz += pe.zt(k, i) * pe.zt(k, j);
            pe.aaT[static_cast<std::size_t>(i * D + j)] = sa;
            pe.aaT[static_cast<std::size_t>(j * D + i)] = sa;
            pe.zzT[static_cast<std::size_t>(i * D + j)] = sz;
            pe.zzT[static_cast<std::size_t>(j * D + i)] = sz;
        }
    pe.grad_log_rho.resize(static_cast<std::size_t>(D));
    for (int i = 0; i < D; ++i)
        pe.grad_log_rho[static_cast<std::size_t>(i)] = -pe.V_jet.grad(i) + pe.logvol_jet.grad(i);
    return pe;
}

std::vector<double> horizontal_gradient(const PointEval& pe, const Jet& f) {
    std::vector<double> out(static_cast<std::size_t>(pe.n), 0.0);
    for (int k = 0; k < pe.n; ++k)
        for (int h = 0; h < pe.D; ++h) out[static_cast<std::size_t>(k)] += pe.at(k, h).value() * f.grad(h);
    return out;
}

std::vector<double> horizontal_gradient(const SubRiemannianStructure& s, const Expression& f,
                                        std::span<const double> x) {
    return horizontal_gradient(eval_structure(s, x), f.eval_jet(x, 1));
}

std::vector<double> vertical_gradient(const PointEval& pe, const Jet& f) {
    std::vector<double> out(static_cast<std::size_t>(pe.m), 0.0);
    for (int k = 0; k < pe.m; ++k)
        for (int h = 0; h < pe.D; ++h) out[static_cast<std::size_t>(k)] += pe.zt(k, h).value() * f.grad(h);
    return out;
}

std::vector<double> vertical_gradient(const SubRiemannianStructure& s, const Expression& f,
                                      std::span<const double> x) {
    return vertical_gradient(eval_structure(s, x), f.eval_jet(x, 1));
}

std::vector<double> a_otimes_nabla_a(const PointEval& pe) {
    // a_{hat k} = aT_{k hat}; derivative of a_{k' k} = aT_{k k'} along x_{k'}
    std::vector<double> out(static_cast<std::size_t>(pe.D), 0.0);
    for (int hat = 0; hat < pe.D; ++hat) {
        double s = 0.0;
        for (int k = 0; k < pe.n; ++k)
            for (int kp = 0; kp < pe.D; ++kp) s += pe.at(k, hat).value() * pe.at(k, kp).grad(kp);
        out[static_cast<std::size_t>(hat)] = s;
    }
    return out;
}

double check_invariant_measure(const SubRiemannianStructure& s,
                               std::span<const double> points_flat, int npoints) {
    const int D = s.dim();
    double worst = 0.0;
    for (int p = 0; p < npoints; ++p) {
        std::span<const double> x = points_flat.subspan(static_cast<std::size_t>(p * D),
                                                        static_cast<std::size_t>(D));
        PointEval pe = eval_structure(s, x);
        std::vector<double> lhs = a_otimes_nabla_a(pe);
        for (int i = 0; i < D; ++i) {
            double corr = 0.0;
            for (int j = 0; j < D; ++j) corr += pe.aat(i, j).value() * pe.logvol_jet.grad(j);
            worst = std::max(worst, std::fabs(lhs[static_cast<std::size_t>(i)] + corr));
        }
    }
    return worst;
}

std::vector<double> drift_b(const PointEval& pe) {
    std::vector<double> out(static_cast<std::size_t>(pe.D), 0.0);
    for (int i = 0; i < pe.D; ++i) {
        double s = 0.0;
        for (int j = 0; j < pe.D; ++j) s += pe.aat(i, j).value() * pe.V_jet.grad(j);
        out[static_cast<std::size_t>(i)] = -0.5 * s;
    }
    return out;
}

double apply_generator(const PointEval& pe, const Jet& f_jet) {
    const int D = pe.D;
    double acc = 0.0;
    for (int i = 0; i < D; ++i)
        for (int k = 0; k < D; ++k)
            acc += pe.aat(i, k).grad(i) * f_jet.grad(k) + pe.aat(i, k).value() * f_jet.hess(i, k);
    std::vector<double> aona = a_otimes_nabla_a(pe);
    for (int k = 0; k < D; ++k) acc -= aona[static_cast<std::size_t>(k)] * f_jet.grad(k);
    for (int i = 0; i < D; ++i) {
        double af = 0.0;
        for (int k = 0; k < D; ++k) af += pe.aat(i, k).value() * f_jet.grad(k);
        acc -= pe.V_jet.grad(i) * af;
    }
    return acc;
}

double generator_L(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x) {
    return apply_generator(eval_structure(s, x), f.eval_jet(x, 2));
}

Jet generator_jet(const PointEval& pe, const Jet& f_jet) {
    const int D = pe.D;
    const int out_order = std::min(f_jet.order() - 2, 1);
    Jet acc(D, out_order);
    for (int i = 0; i < D; ++i) {
        // grad V component i as a jet of order 1
        Jet dVi = pe.V_jet.derivative(i).truncated(out_order);
        Jet a_row_f(D, out_order);
        for (int k = 0; k < D; ++k) {
            const Jet dfk = f_jet.derivative(k).truncated(out_order + 1);
            acc += pe.aat(i, k).derivative(i).truncated(out_order) * dfk.truncated(out_order) +
                   pe.aat(i, k).truncated(out_order) * dfk.derivative(i);
            a_row_f += pe.aat(i, k).truncated(out_order) * dfk.truncated(out_order);
        }
        acc -= dVi * a_row_f;
    }
    // a (x) grad a as jets
    for (int hat = 0; hat < D; ++hat) {
        Jet comp(D, out_order);
        for (int k = 0; k < pe.n; ++k)
            for (int kp = 0; kp < D; ++kp)
                comp += pe.at(k, hat).truncated(out_order) * pe.at(k, kp).derivative(kp).truncated(out_order);
        acc -= comp * f_jet.derivative(hat).truncated(out_order);
    }
    return acc;
}

} // namespace gammaz
