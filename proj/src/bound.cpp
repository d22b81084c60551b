#include "gammaz/bound.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "gammaz/errors.hpp"
#include "gammaz/smallmat.hpp"

namespace gammaz {

double lambda_min(std::span<const double> A, int nn) {
    return smallest_eigenvalue(A, nn);
}

double zlsi_constant(double kappa) {
    if (!(kappa > 0.0)) throw NonpositiveKappa(kappa);
    return 1.0 / (2.0 * kappa);
}

DecayEnvelope decay_envelope(double kappa, double I0, double t) {
    if (!(kappa > 0.0)) throw NonpositiveKappa(kappa);
    DecayEnvelope env;
    env.kl_bound = I0 / (2.0 * kappa) * std::exp(-2.0 * kappa * t);
    env.l1_bound = std::sqrt(I0 / kappa) * std::exp(-kappa * t);
    return env;
}

long ScanResult::cell_count() const {
    long c = 1;
    for (const auto& ax : axes) c *= ax.cells;
    return c;
}

std::vector<double> ScanResult::point_at(long flat) const {
    std::vector<double> x(axes.size());
    for (int d = static_cast<int>(axes.size()) - 1; d >= 0; --d) {
        const ScanAxis& ax = axes[static_cast<std::size_t>(d)];
        const long i = flat % ax.cells;
        flat /= ax.cells;
        x[static_cast<std::size_t>(d)] =
            ax.cells == 1 ? 0.5 * (ax.lo + ax.hi)
                          : ax.lo + (ax.hi - ax.lo) * static_cast<double>(i) / (ax.cells - 1);
    }
    return x;
}

ScanResult scan_region(const SubRiemannianStructure& s, std::span<const ScanAxis> axes,
                       LambdaMode mode, int threads, bool keep_matrices) {
    const int D = s.dim();
    if (static_cast<int>(axes.size()) != D)
        throw ConfigError("scan region must name every coordinate axis");
    ScanResult r;
    r.axes.assign(axes.begin(), axes.end());
    const long total = r.cell_count();
    r.field.assign(static_cast<std::size_t>(total), std::numeric_limits<double>::quiet_NaN());
    r.matrix_dim = D;
    if (keep_matrices)
        r.matrices.assign(static_cast<std::size_t>(total) * (D * D),
                          std::numeric_limits<double>::quiet_NaN());

    auto work = [&](long begin, long end) {
        for (long idx = begin; idx < end; ++idx) {
            std::vector<double> x = r.point_at(idx);
            try {
                CurvatureMatrix cm = extract_A(s, x, mode);
                r.field[static_cast<std::size_t>(idx)] = smallest_eigenvalue(cm.A, D);
                if (keep_matrices)
                    for (int t = 0; t < D * D; ++t)
                        r.matrices[static_cast<std::size_t>(idx) * (D * D) + t] = cm.A[static_cast<std::size_t>(t)];
            } catch (const SingularFrame&) {
                // hole stays NaN
            }
        }
    };
    if (threads <= 1 || total < 4) {
        work(0, total);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (total + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const long b = t * chunk, e = std::min(total, b + chunk);
            if (b >= e) break;
            pool.emplace_back(work, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // deterministic extrema: lowest row-major index wins ties
    r.kappa = std::numeric_limits<double>::infinity();
    r.best = -std::numeric_limits<double>::infinity();
    for (long idx = 0; idx < total; ++idx) {
        const double v = r.field[static_cast<std::size_t>(idx)];
        if (std::isnan(v)) {
            ++r.holes;
            continue;
        }
        if (v < r.kappa) { r.kappa = v; r.argmin_index = idx; }
        if (v > r.best) { r.best = v; r.argbest_index = idx; }
    }
    if (r.argmin_index >= 0) r.argmin_point = r.point_at(r.argmin_index);
    if (r.argbest_index >= 0) r.argbest_point = r.point_at(r.argbest_index);
    return r;
}

void write_scan_csv(std::ostream& os, const ScanResult& r,
                    std::span<const std::string> coord_names) {
    os << "# gammaz scan v1\n";
    for (std::size_t d = 0; d < coord_names.size(); ++d) os << coord_names[d] << ',';
    os << "lambda_min";
    const int D = r.matrix_dim;
    const bool with_mats = !r.matrices.empty();
    if (with_mats)
        for (int i = 0; i < D; ++i)
            for (int j = i; j < D; ++j) os << ",A" << (i + 1) << (j + 1);
    os << '\n';
    os.precision(17);
    const long total = r.cell_count();
    for (long idx = 0; idx < total; ++idx) {
        std::vector<double> x = r.point_at(idx);
        for (double v : x) os << v << ',';
        os << r.field[static_cast<std::size_t>(idx)];
        if (with_mats)
            for (int i = 0; i < D; ++i)
                for (int j = i; j < D; ++j)
                    os << ',' << r.matrices[static_cast<std::size_t>(idx) * (D * D) + i * D + j];
        os << '\n';
    }
}

} // namespace gammaz
