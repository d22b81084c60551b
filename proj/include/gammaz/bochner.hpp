#pragma once

#include <span>
#include <vector>

#include "gammaz/structure.hpp"

namespace gammaz {

/// A vector whose entries are linear functionals of grad f: entry e applied
/// to a gradient is sum_j c[e*dim + j] * df/dx_j. This is the shared
/// representation of the first-order objects C, D, E, F, G and the shift
/// vectors of the completing-square step.
struct GradLinearField {
    int len = 0;
    int dim = 0;
    std::vector<double> c;   // len x dim row-major

    GradLinearField() = default;
    GradLinearField(int l, int d) : len(l), dim(d), c(static_cast<std::size_t>(l) * d, 0.0) {}
    double& at(int e, int j) { return c[static_cast<std::size_t>(e * dim + j)]; }
    double at(int e, int j) const { return c[static_cast<std::size_t>(e * dim + j)]; }
    std::vector<double> apply(std::span<const double> grad) const;
};

/// Pointwise frame of the z-Bochner decomposition: the second-order coupling
/// matrices Q (n^2 x D^2) and P (nm x D^2) plus the five first-order vectors,
/// with D = n+m. E is stored in P's row order (z-row outer, a-row inner).
struct BochnerFrame {
    int n = 0, m = 0, D = 0;
    std::vector<double> Q;   // (n*n) x D^2 row-major
    std::vector<double> P;   // (n*m) x D^2 row-major
    GradLinearField C;       // len D^2
    GradLinearField F;       // len D^2
    GradLinearField G;       // len D^2
    GradLinearField Dvec;    // len n^2
    GradLinearField E;       // len n*m
    PointEval pe;
    Preset preset = Preset::none;
};

BochnerFrame build_frame(const SubRiemannianStructure& s, std::span<const double> x);

enum class LambdaMode { preset, least_squares };

/// Relative residual above which the completing-square system is declared
/// unsatisfied.
inline constexpr double kAssumptionTol = 1e-9;

struct LambdaPair {
    GradLinearField lambda1;   // len D^2
    GradLinearField lambda2;   // len D^2
    double residual = 0.0;     // relative, against the symmetrized system
};

/// Find shift vectors with (Q^TQ L1 + P^TP L2)^T X = (F+C+G+Q^TD+P^TE)^T X for
/// every symmetric X. least_squares solves the row-symmetrized system by
/// minimum-norm least squares per gradient column; preset returns the
/// closed-form choice for builtin structures. Throws AssumptionUnsatisfied
/// when the residual exceeds kAssumptionTol.
LambdaPair solve_lambda(const BochnerFrame& frame, LambdaMode mode);

struct HessRg {
    double hess2 = 0.0;   // |Hess^G_{a,z} f|^2, nonnegative
    double rg = 0.0;      // R^G(grad f, grad f)
};
HessRg hess_and_rg(const BochnerFrame& frame, const LambdaPair& lambda, const Jet& f);

struct TensorValues {
    double r_ab = 0.0;   // R^G_ab minus its R^G part (pure a/drift terms)
    double r_zb = 0.0;
    double r_rho = 0.0;
};
TensorValues curvature_tensors(const BochnerFrame& frame, const Jet& f);

/// Symmetric D x D quadratic forms in grad f coordinates for each tensor
/// piece; values are recovered as grad^T B grad.
std::vector<double> rg_matrix(const BochnerFrame& frame, const LambdaPair& lambda);
std::vector<double> r_ab_matrix(const BochnerFrame& frame);
std::vector<double> r_zb_matrix(const BochnerFrame& frame);
std::vector<double> r_rho_matrix(const BochnerFrame& frame);

/// The curvature matrix A in the U-basis U = (a^T grad f, z^T grad f),
/// A = M^{-1} B M^{-T} for M = [a|z], together with its three components.
struct CurvatureMatrix {
    int D = 0;
    std::vector<double> A;        // D x D symmetric
    std::vector<double> A_rg_ab;  // component: R^G + R_ab
    std::vector<double> A_zb;
    std::vector<double> A_rho;
};
CurvatureMatrix extract_A(const SubRiemannianStructure& s, std::span<const double> x,
                          LambdaMode mode);

/// |LHS - RHS| / (1 + |LHS|) of the z-Bochner identity at one point, LHS from
/// the iterated Gamma forms, RHS from the frame decomposition.
double verify_bochner(const SubRiemannianStructure& s, const Expression& f,
                      std::span<const double> x, LambdaMode mode = LambdaMode::least_squares);
double verify_bochner(const SubRiemannianStructure& s, const Jet& f_jet,
                      std::span<const double> x, LambdaMode mode = LambdaMode::least_squares);

} // namespace gammaz
