#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gammaz/grid.hpp"
#include "gammaz/structure.hpp"

namespace gammaz {

/// Time series recorded along a density evolution.
struct Diagnostics {
    std::vector<double> t;
    std::vector<double> kl;
    std::vector<double> fisher_az;
    std::vector<double> l1;
    long clip_events = 0;
    double mass_drift = 0.0;   // relative |m(T) - m(0)| / m(0)
};

struct FpOptions {
    double t_end = 1.0;
    double dt = 0.0;      // <= 0: auto, 0.2 min(h^2) / max lambda_max(aa^T)
    int samples = 100;    // diagnostic records (plus t = 0)
    double floor = 1e-300;
};

struct FpResult {
    DensityGrid rho;
    Diagnostics diag;
    double dt = 0.0;
    long steps = 0;
};

/// Evolve the degenerate Fokker-Planck equation d_t rho = div(rho aa^T grad
/// log(rho/rho*)) by conservative finite volumes with arithmetic face
/// averages, central gradients and explicit Euler, no-flux boundaries. The
/// box-restricted rho* ~ e^{-V} Vol is exactly stationary at the discrete
/// level. Throws BadInitial / Unstable.
FpResult fp_run(const SubRiemannianStructure& s, const DensityGrid& rho0, const FpOptions& opt);

double kl_divergence(const DensityGrid& rho, const SubRiemannianStructure& s);
double fisher_az(const DensityGrid& rho, const SubRiemannianStructure& s);
double l1_distance(const DensityGrid& rho, const SubRiemannianStructure& s);

/// The stationary density e^{-V} Vol normalized on the same grid.
DensityGrid stationary_density(const DensityGrid& like, const SubRiemannianStructure& s);

/// Ito-form Euler-Maruyama paths of the underlying diffusion: drift
/// div(aa^T) - a (x) grad a - aa^T grad V, noise sqrt(2) a dB. Particles are
/// flattened D-vectors; the generator is deterministic per seed.
std::vector<double> em_particles(const SubRiemannianStructure& s, std::vector<double> x0,
                                 double t_end, double dt, std::uint64_t seed);

struct DissipationReport {
    bool monotone = true;               // KL nonincreasing sample-to-sample
    double max_kl_increase = 0.0;
    std::vector<bool> env_kl_ok;        // per sample, kappa > 0 only
    std::vector<bool> env_l1_ok;
    std::vector<bool> pinsker_ok;
    bool envelopes_checked = false;     // false when kappa <= 0
    bool all_env_kl = true, all_env_l1 = true, all_pinsker = true;
    double measured_rate = 0.0;         // log-linear KL fit over the last half
    double kappa = 0.0;
    double fisher0 = 0.0;
};
DissipationReport verify_dissipation(const Diagnostics& diag, double kappa);

} // namespace gammaz
