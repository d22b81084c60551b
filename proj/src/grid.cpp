#include "gammaz/grid.hpp"

#include <fstream>

#include <json.hpp>

#include "gammaz/errors.hpp"

namespace gammaz {

DensityGrid DensityGrid::zeros(std::span<const double> lo, std::span<const double> hi,
                               std::span<const int> cells) {
    if (lo.size() != hi.size() || lo.size() != cells.size() || lo.empty() || lo.size() > 3)
        throw ConfigError("density grid needs 1..3 matching box/cell specs");
    DensityGrid g;
    g.dims = static_cast<int>(lo.size());
    for (int d = 0; d < g.dims; ++d) {
        if (!(hi[static_cast<std::size_t>(d)] > lo[static_cast<std::size_t>(d)]) || cells[static_cast<std::size_t>(d)] < 1)
            throw ConfigError("density grid axis must have hi > lo and cells >= 1");
        g.lo[static_cast<std::size_t>(d)] = lo[static_cast<std::size_t>(d)];
        g.hi[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)];
        g.shape[static_cast<std::size_t>(d)] = cells[static_cast<std::size_t>(d)];
        g.h[static_cast<std::size_t>(d)] =
            (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) / cells[static_cast<std::size_t>(d)];
    }
    for (int d = g.dims; d < 3; ++d) { g.shape[static_cast<std::size_t>(d)] = 1; g.h[static_cast<std::size_t>(d)] = 1.0; }
    g.rho.assign(static_cast<std::size_t>(g.total_cells()), 0.0);
    return g;
}

double DensityGrid::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dims; ++d) v *= h[static_cast<std::size_t>(d)];
    return v;
}

double DensityGrid::mass() const {
    double s = 0.0;
    for (double v : rho) s += v;
    return s * cell_volume();
}

void DensityGrid::normalize() {
    const double m = mass();
    if (!(m > 0.0)) throw BadInitial("density has no mass");
    const double inv = 1.0 / m;
    for (double& v : rho) v *= inv;
}

std::array<double, 3> DensityGrid::cell_center(long flat) const {
    std::array<double, 3> x{};
    for (int d = 2; d >= 0; --d) {
        const long i = flat % shape[static_cast<std::size_t>(d)];
        flat /= shape[static_cast<std::size_t>(d)];
        if (d < dims)
            x[static_cast<std::size_t>(d)] = lo[static_cast<std::size_t>(d)] +
                                             (static_cast<double>(i) + 0.5) * h[static_cast<std::size_t>(d)];
    }
    return x;
}

DensityGrid DensityGrid::from_expression(std::span<const double> lo, std::span<const double> hi,
                                         std::span<const int> cells, const Expression& e) {
    DensityGrid g = zeros(lo, hi, cells);
    const long total = g.total_cells();
    for (long i = 0; i < total; ++i) {
        const std::array<double, 3> x = g.cell_center(i);
        const double v = e.eval(std::span<const double>(x.data(), static_cast<std::size_t>(g.dims)));
        if (!(v > 0.0)) throw BadInitial("initial density must be positive on the box");
        g.rho[static_cast<std::size_t>(i)] = v;
    }
    g.normalize();
    return g;
}

void save_density(const DensityGrid& g, const std::string& path) {
    {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + path + "'");
        f.write(reinterpret_cast<const char*>(g.rho.data()),
                static_cast<std::streamsize>(g.rho.size() * sizeof(double)));
    }
    nlohmann::json meta;
    meta["dims"] = g.dims;
    meta["shape"] = std::vector<int>(g.shape.begin(), g.shape.begin() + g.dims);
    meta["box"]["lo"] = std::vector<double>(g.lo.begin(), g.lo.begin() + g.dims);
    meta["box"]["hi"] = std::vector<double>(g.hi.begin(), g.hi.begin() + g.dims);
    std::ofstream f(path + ".json");
    if (!f) throw ConfigError("cannot write '" + path + ".json'");
    f << meta.dump(2) << '\n';
}

DensityGrid load_density(const std::string& path) {
    nlohmann::json meta;
    {
        std::ifstream f(path + ".json");
        if (!f) throw ConfigError("cannot read '" + path + ".json'");
        f >> meta;
    }
    std::vector<double> lo = meta["box"]["lo"].get<std::vector<double>>();
    std::vector<double> hi = meta["box"]["hi"].get<std::vector<double>>();
    std::vector<int> shape = meta["shape"].get<std::vector<int>>();
    DensityGrid g = DensityGrid::zeros(lo, hi, shape);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read '" + path + "'");
    f.read(reinterpret_cast<char*>(g.rho.data()),
           static_cast<std::streamsize>(g.rho.size() * sizeof(double)));
    if (f.gcount() != static_cast<std::streamsize>(g.rho.size() * sizeof(double)))
        throw ConfigError("density file '" + path + "' truncated");
    return g;
}

} // namespace gammaz
