#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "gammaz/bochner.hpp"
#include "gammaz/structure.hpp"

namespace gammaz {

/// Smallest eigenvalue of a symmetric matrix (symmetrized defensively).
double lambda_min(std::span<const double> A, int nn);

/// zLSI constant 1/(2 kappa); throws NonpositiveKappa for kappa <= 0.
double zlsi_constant(double kappa);

struct DecayEnvelope {
    double kl_bound = 0.0;   // (1/2k) e^{-2kt} I0
    double l1_bound = 0.0;   // sqrt(I0/k) e^{-kt}
};
DecayEnvelope decay_envelope(double kappa, double I0, double t);

struct ScanAxis {
    double lo = 0.0, hi = 0.0;
    int cells = 1;   // 1 = fixed axis at the midpoint; >= 2 sweeps inclusive endpoints
};

/// Row-major field of lambda_min(A) over a rectangular grid. Singular-frame
/// points are recorded as NaN holes and excluded from the extrema. kappa is
/// the grid minimum; `best` is the largest pointwise lambda_min, the quantity
/// the worked examples report as "the smallest eigenvalue at a given point".
struct ScanResult {
    std::vector<ScanAxis> axes;
    std::vector<double> field;          // lambda_min per cell, NaN = hole
    std::vector<double> matrices;       // optional: D*D per cell when kept
    int matrix_dim = 0;
    double kappa = 0.0;
    long argmin_index = -1;
    std::vector<double> argmin_point;
    double best = 0.0;
    long argbest_index = -1;
    std::vector<double> argbest_point;
    long holes = 0;

    long cell_count() const;
    std::vector<double> point_at(long flat_index) const;
};

ScanResult scan_region(const SubRiemannianStructure& s, std::span<const ScanAxis> axes,
                       LambdaMode mode, int threads = 1, bool keep_matrices = false);

/// CSV: "# gammaz scan v1" header, columns x1..xD,lambda_min[,A11,A12,...],
/// row-major rows, '.' decimal, '\n' newlines.
void write_scan_csv(std::ostream& os, const ScanResult& r,
                    std::span<const std::string> coord_names);

} // namespace gammaz
