#include "gammaz/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gammaz/errors.hpp"
#include "gammaz/kernels.hpp"
#include "gammaz/smallmat.hpp"

namespace gammaz {

namespace {

struct Workspace {
    const SubRiemannianStructure* s = nullptr;
    int dims = 0;
    std::array<int, 3> shape{1, 1, 1};
    std::array<double, 3> h{1, 1, 1};
    long total = 0;
    double cellvol = 1.0;

    std::vector<double> log_rho_star;          // grid-normalized
    std::vector<double> rho_star;
    // face diffusion rows per axis: K[axis] holds the axis-th row of aa^T at
    // the face center between cell i and its +axis neighbor
    std::array<std::array<std::vector<double>, 3>, 3> face_k;
    // cell-centered aa^T + zz^T packed symmetric (for the Fisher functional)
    std::array<std::vector<double>, 6> msym;    // 00,11,22,01,02,12
    double lambda_max = 0.0;

    std::vector<double> w, gx, gy, gz, G, drho, zeros;

    long stride(int axis) const {
        long s_ = 1;
        for (int d = axis + 1; d < 3; ++d) s_ *= shape[static_cast<std::size_t>(d)];
        return s_;
    }
};

Workspace make_workspace(const SubRiemannianStructure& s, const DensityGrid& g) {
    if (s.dim() != g.dims) throw ConfigError("grid dimension does not match the structure");
    Workspace ws;
    ws.s = &s;
    ws.dims = g.dims;
    ws.shape = g.shape;
    ws.h = g.h;
    ws.total = g.total_cells();
    ws.cellvol = g.cell_volume();
    const std::size_t total = static_cast<std::size_t>(ws.total);
    const int D = s.dim();

    ws.log_rho_star.resize(total);
    ws.rho_star.resize(total);
    for (int c = 0; c < 6; ++c) ws.msym[static_cast<std::size_t>(c)].assign(total, 0.0);
    for (int ax = 0; ax < ws.dims; ++ax)
        for (int c = 0; c < ws.dims; ++c) ws.face_k[static_cast<std::size_t>(ax)][static_cast<std::size_t>(c)].assign(total, 0.0);

    const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
    double mass = 0.0;
    for (long i = 0; i < ws.total; ++i) {
        const std::array<double, 3> xc = g.cell_center(i);
        std::span<const double> x(xc.data(), static_cast<std::size_t>(ws.dims));
        PointEval pe = eval_structure(s, x);
        ws.log_rho_star[static_cast<std::size_t>(i)] = -pe.V_jet.value() + pe.logvol_jet.value();
        std::vector<double> K(static_cast<std::size_t>(D) * D);
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) {
                const double v = pe.aat(a, b).value() + pe.zzt(a, b).value();
                K[static_cast<std::size_t>(a) * D + b] = v;
            }
        for (int c = 0; c < 6; ++c) {
            const int a = pairs[c][0], b = pairs[c][1];
            if (a < D && b < D)
                ws.msym[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] = K[static_cast<std::size_t>(a) * D + b];
        }
        std::vector<double> Ka(static_cast<std::size_t>(D) * D);
        for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b) Ka[static_cast<std::size_t>(a) * D + b] = pe.aat(a, b).value();
        ws.lambda_max = std::max(ws.lambda_max, jacobi_eig(Ka, D).values.back());
        // face rows of aa^T, evaluated at the +axis face center
        for (int ax = 0; ax < ws.dims; ++ax) {
            std::array<double, 3> xf = xc;
            xf[static_cast<std::size_t>(ax)] += 0.5 * g.h[static_cast<std::size_t>(ax)];
            PointEval pf = eval_structure(s, std::span<const double>(xf.data(), static_cast<std::size_t>(ws.dims)));
            for (int c = 0; c < ws.dims; ++c)
                ws.face_k[static_cast<std::size_t>(ax)][static_cast<std::size_t>(c)][static_cast<std::size_t>(i)] =
                    pf.aat(ax, c).value();
        }
    }
    for (long i = 0; i < ws.total; ++i) {
        ws.rho_star[static_cast<std::size_t>(i)] = std::exp(ws.log_rho_star[static_cast<std::size_t>(i)]);
        mass += ws.rho_star[static_cast<std::size_t>(i)];
    }
    mass *= ws.cellvol;
    const double logmass = std::log(mass);
    for (long i = 0; i < ws.total; ++i) {
        ws.rho_star[static_cast<std::size_t>(i)] /= mass;
        ws.log_rho_star[static_cast<std::size_t>(i)] -= logmass;
    }

    ws.w.assign(total, 0.0);
    ws.gx.assign(total, 0.0);
    ws.gy.assign(total, 0.0);
    ws.gz.assign(total, 0.0);
    ws.G.assign(total, 0.0);
    ws.drho.assign(total, 0.0);
    ws.zeros.assign(total, 0.0);
    return ws;
}

void log_ratio(const Workspace& ws, const std::vector<double>& rho, double floor,
               std::vector<double>& w) {
    const std::size_t total = static_cast<std::size_t>(ws.total);
    for (std::size_t i = 0; i < total; ++i)
        w[i] = std::log(std::max(rho[i], floor)) - ws.log_rho_star[i];
}

// cell-centered gradient with one-sided stencils on the two boundary layers
void gradient_axis(const Workspace& ws, const std::vector<double>& w, int axis,
                   std::vector<double>& g) {
    const auto& K = kernels::active_table();
    const long s = ws.stride(axis);
    const long total = ws.total;
    const int N = ws.shape[static_cast<std::size_t>(axis)];
    const double h = ws.h[static_cast<std::size_t>(axis)];
    if (N == 1) {
        std::fill(g.begin(), g.end(), 0.0);
        return;
    }
    if (total - 2 * s > 0)
        K.grad_central(g.data() + s, w.data() + s, s, 0.5 / h, static_cast<std::size_t>(total - 2 * s));
    // one-sided boundary layers (and overwrite the cross-row garbage there)
    for (long i = 0; i < total; ++i) {
        const long c = (i / s) % N;
        if (c == 0) g[static_cast<std::size_t>(i)] = (w[static_cast<std::size_t>(i + s)] - w[static_cast<std::size_t>(i)]) / h;
        else if (c == N - 1) g[static_cast<std::size_t>(i)] = (w[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i - s)]) / h;
    }
}

// one explicit Euler step accumulated into ws.drho
void flux_divergence(Workspace& ws, const std::vector<double>& rho) {
    const auto& K = kernels::active_table();
    std::fill(ws.drho.begin(), ws.drho.end(), 0.0);
    std::vector<double>* grads[3] = {&ws.gx, &ws.gy, &ws.gz};
    for (int ax = 0; ax < ws.dims; ++ax)
        gradient_axis(ws, ws.w, ax, *grads[ax]);
    for (int ax = 0; ax < ws.dims; ++ax) {
        const int N = ws.shape[static_cast<std::size_t>(ax)];
        if (N == 1) continue;
        const long s = ws.stride(ax);
        const double invh = 1.0 / ws.h[static_cast<std::size_t>(ax)];
        // transverse components of this row of aa^T
        const double* kt[2] = {nullptr, nullptr};
        const double* gt[2] = {nullptr, nullptr};
        int nt = 0;
        for (int c = 0; c < ws.dims; ++c) {
            if (c == ax) continue;
            if (ws.shape[static_cast<std::size_t>(c)] == 1) continue;
            kt[nt] = ws.face_k[static_cast<std::size_t>(ax)][static_cast<std::size_t>(c)].data();
            gt[nt] = grads[c]->data();
            ++nt;
        }
        const double* kn = ws.face_k[static_cast<std::size_t>(ax)][static_cast<std::size_t>(ax)].data();
        const std::size_t span = static_cast<std::size_t>(ws.total - s);
        K.face_flux(ws.G.data(), rho.data(), ws.w.data(), kn, kt[0], gt[0], kt[1], gt[1], s, invh, span);
        // invalidate wrap-around faces (cells in the last layer along ax)
        for (long i = 0; i < ws.total; ++i)
            if ((i / s) % N == N - 1) ws.G[static_cast<std::size_t>(i)] = 0.0;
        std::fill(ws.G.begin() + static_cast<long>(span), ws.G.end(), 0.0);
        // d rho_i += invh * (G_i - G_{i-s}), boundary terms vanish via zeroed G
        K.axpy_diff(ws.drho.data(), ws.G.data(), ws.zeros.data(), invh, static_cast<std::size_t>(ws.total));
        K.axpy_diff(ws.drho.data() + s, ws.zeros.data(), ws.G.data(), invh, span);
    }
}

double kl_of(const Workspace& ws, const std::vector<double>& rho, double floor,
             std::vector<double>& w) {
    log_ratio(ws, rho, floor, w);
    return kernels::active_table().dot(rho.data(), w.data(), static_cast<std::size_t>(ws.total)) * ws.cellvol;
}

double fisher_of(Workspace& ws, const std::vector<double>& rho, double floor) {
    log_ratio(ws, rho, floor, ws.w);
    std::vector<double>* grads[3] = {&ws.gx, &ws.gy, &ws.gz};
    for (int ax = 0; ax < ws.dims; ++ax) gradient_axis(ws, ws.w, ax, *grads[ax]);
    for (int ax = ws.dims; ax < 3; ++ax) std::fill(grads[ax]->begin(), grads[ax]->end(), 0.0);
    const auto& K = kernels::active_table();
    return K.weighted_quad3(rho.data(), ws.gx.data(), ws.gy.data(), ws.gz.data(),
                            ws.msym[0].data(), ws.msym[1].data(), ws.msym[2].data(),
                            ws.msym[3].data(), ws.msym[4].data(), ws.msym[5].data(),
                            static_cast<std::size_t>(ws.total)) *
           ws.cellvol;
}

double l1_of(const Workspace& ws, const std::vector<double>& rho) {
    return kernels::active_table().abs_diff_sum(rho.data(), ws.rho_star.data(),
                                                static_cast<std::size_t>(ws.total)) *
           ws.cellvol;
}

} // namespace

FpResult fp_run(const SubRiemannianStructure& s, const DensityGrid& rho0, const FpOptions& opt) {
    for (double v : rho0.rho)
        if (!(v > 0.0)) throw BadInitial("initial density must be positive on every cell");
    if (!(opt.t_end > 0.0)) throw ConfigError("t_end must be positive");

    Workspace ws = make_workspace(s, rho0);
    double minh2 = ws.h[0] * ws.h[0];
    for (int d = 1; d < ws.dims; ++d) minh2 = std::min(minh2, ws.h[static_cast<std::size_t>(d)] * ws.h[static_cast<std::size_t>(d)]);
    const double dt_auto = 0.2 * minh2 / std::max(ws.lambda_max, 1e-300);
    const double dt0 = opt.dt > 0.0 ? opt.dt : dt_auto;
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(opt.t_end / dt0 - 1e-12)));
    const double dt = opt.t_end / static_cast<double>(steps);

    FpResult out;
    out.rho = rho0;
    out.dt = dt;
    out.steps = steps;
    std::vector<double>& rho = out.rho.rho;
    const double mass0 = out.rho.mass();

    const long sample_every = std::max<long>(1, steps / std::max(1, opt.samples));
    Diagnostics& diag = out.diag;
    auto record = [&](double t) {
        diag.t.push_back(t);
        diag.kl.push_back(kl_of(ws, rho, opt.floor, ws.w));
        diag.fisher_az.push_back(fisher_of(ws, rho, opt.floor));
        diag.l1.push_back(l1_of(ws, rho));
    };
    record(0.0);

    const auto& K = kernels::active_table();
    for (long step = 0; step < steps; ++step) {
        log_ratio(ws, rho, opt.floor, ws.w);
        flux_divergence(ws, rho);
        K.axpy_diff(rho.data(), ws.drho.data(), ws.zeros.data(), dt, static_cast<std::size_t>(ws.total));
        bool clipped = false;
        for (double& v : rho) {
            if (!std::isfinite(v)) throw Unstable("non-finite density cell");
            if (v < 0.0) { v = 0.0; ++diag.clip_events; clipped = true; }
        }
        if (clipped) {
            const double m = out.rho.mass();
            if (!(m > 0.0)) throw Unstable("density mass collapsed");
            const double sc = mass0 / m;
            for (double& v : rho) v *= sc;
        }
        if ((step + 1) % sample_every == 0 || step + 1 == steps)
            record(dt * static_cast<double>(step + 1));
    }
    diag.mass_drift = std::fabs(out.rho.mass() - mass0) / mass0;
    return out;
}

DensityGrid stationary_density(const DensityGrid& like, const SubRiemannianStructure& s) {
    Workspace ws = make_workspace(s, like);
    DensityGrid g = like;
    g.rho = ws.rho_star;
    return g;
}

double kl_divergence(const DensityGrid& rho, const SubRiemannianStructure& s) {
    Workspace ws = make_workspace(s, rho);
    return kl_of(ws, rho.rho, 1e-300, ws.w);
}

double fisher_az(const DensityGrid& rho, const SubRiemannianStructure& s) {
    Workspace ws = make_workspace(s, rho);
    return fisher_of(ws, rho.rho, 1e-300);
}

double l1_distance(const DensityGrid& rho, const SubRiemannianStructure& s) {
    Workspace ws = make_workspace(s, rho);
    return l1_of(ws, rho.rho);
}

std::vector<double> em_particles(const SubRiemannianStructure& s, std::vector<double> x0,
                                 double t_end, double dt, std::uint64_t seed) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const int D = s.dim();
    const long npart = static_cast<long>(x0.size()) / D;
    const long steps = std::max<long>(1, static_cast<long>(std::llround(t_end / dt)));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise = std::sqrt(2.0 * dt);
    std::vector<double> xi(static_cast<std::size_t>(s.n));
    for (long step = 0; step < steps; ++step) {
        for (long p = 0; p < npart; ++p) {
            std::span<double> x(x0.data() + p * D, static_cast<std::size_t>(D));
            PointEval pe = eval_structure(s, x);
            // Ito drift: div(aa^T) - a (x) grad a - aa^T grad V
            std::array<double, Jet::kMaxDim> mu{};
            for (int kh = 0; kh < D; ++kh) {
                double v = 0.0;
                for (int ih = 0; ih < D; ++ih) v += pe.aat(ih, kh).grad(ih);
                mu[static_cast<std::size_t>(kh)] = v;
            }
            std::vector<double> aona = a_otimes_nabla_a(pe);
            for (int kh = 0; kh < D; ++kh) mu[static_cast<std::size_t>(kh)] -= aona[static_cast<std::size_t>(kh)];
            for (int ih = 0; ih < D; ++ih) {
                double av = 0.0;
                for (int kh = 0; kh < D; ++kh) av += pe.aat(ih, kh).value() * pe.V_jet.grad(kh);
                mu[static_cast<std::size_t>(ih)] -= av;
            }
            for (int k = 0; k < s.n; ++k) xi[static_cast<std::size_t>(k)] = gauss(rng);
            for (int ih = 0; ih < D; ++ih) {
                double dx = mu[static_cast<std::size_t>(ih)] * dt;
                for (int k = 0; k < s.n; ++k) dx += noise * pe.at(k, ih).value() * xi[static_cast<std::size_t>(k)];
                x[static_cast<std::size_t>(ih)] += dx;
            }
        }
    }
    return x0;
}

DissipationReport verify_dissipation(const Diagnostics& diag, double kappa) {
    DissipationReport rep;
    rep.kappa = kappa;
    rep.fisher0 = diag.fisher_az.empty() ? 0.0 : diag.fisher_az.front();
    const std::size_t nsamp = diag.t.size();
    for (std::size_t i = 1; i < nsamp; ++i) {
        const double inc = diag.kl[i] - diag.kl[i - 1];
        if (inc > 1e-12) {
            rep.monotone = false;
            rep.max_kl_increase = std::max(rep.max_kl_increase, inc);
        }
    }
    for (std::size_t i = 0; i < nsamp; ++i) {
        const bool pin = diag.l1[i] <= std::sqrt(2.0 * std::max(diag.kl[i], 0.0)) + 1e-10;
        rep.pinsker_ok.push_back(pin);
        rep.all_pinsker = rep.all_pinsker && pin;
    }
    if (kappa > 0.0) {
        rep.envelopes_checked = true;
        for (std::size_t i = 0; i < nsamp; ++i) {
            const double ekl = rep.fisher0 / (2.0 * kappa) * std::exp(-2.0 * kappa * diag.t[i]);
            const double el1 = std::sqrt(rep.fisher0 / kappa) * std::exp(-kappa * diag.t[i]);
            const bool okk = diag.kl[i] <= ekl;
            const bool okl = diag.l1[i] <= el1;
            rep.env_kl_ok.push_back(okk);
            rep.env_l1_ok.push_back(okl);
            rep.all_env_kl = rep.all_env_kl && okk;
            rep.all_env_l1 = rep.all_env_l1 && okl;
        }
    }
    // rate fit over the last half of the series, positive KL entries only
    std::size_t first = nsamp / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long cnt = 0;
    for (std::size_t i = first; i < nsamp; ++i) {
        if (diag.kl[i] <= 0.0) continue;
        const double xx = diag.t[i], yy = std::log(diag.kl[i]);
        sx += xx; sy += yy; sxx += xx * xx; sxy += xx * yy;
        ++cnt;
    }
    if (cnt >= 2) {
        const double den = cnt * sxx - sx * sx;
        if (std::fabs(den) > 0) rep.measured_rate = -(cnt * sxy - sx * sy) / den;
    }
    return rep;
}

} // namespace gammaz
