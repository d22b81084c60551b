#pragma once

#include <span>

#include "gammaz/structure.hpp"

namespace gammaz {

/// The four bilinear forms of the generalized Gamma-z calculus evaluated on
/// the diagonal at one point, with the two divergence correction terms kept
/// separately (gamma2_z_rho = first_bracket + div_z_corr - div_a_corr).
struct GammaEval {
    double gamma1 = 0.0;
    double gamma1_z = 0.0;
    double gamma2 = 0.0;
    double gamma2_z_rho = 0.0;
    double div_z_corr = 0.0;   // div_z^{rho*} of the grad(aa^T) bilinear vector
    double div_a_corr = 0.0;   // div_a^{rho*} of the grad(zz^T) bilinear vector
};

double gamma1(const PointEval& pe, const Jet& f, const Jet& g);
double gamma1_z(const PointEval& pe, const Jet& f, const Jet& g);
double gamma1(const SubRiemannianStructure& s, const Expression& f, const Expression& g,
              std::span<const double> x);
double gamma1_z(const SubRiemannianStructure& s, const Expression& f, const Expression& g,
                std::span<const double> x);

/// Gamma_2(f,f) = 1/2 [L Gamma_1(f,f) - 2 Gamma_1(Lf, f)], all derivatives
/// taken through jets (no nested numerical differentiation). f at order 3.
double gamma2(const PointEval& pe, const Jet& f);
double gamma2(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x);

/// Gamma_2^{z,rho*}(f,f): the z-bracket plus both divergence corrections; the
/// stationary density enters only through grad log rho*.
double gamma2_z_rho(const PointEval& pe, const Jet& f);
double gamma2_z_rho(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x);

GammaEval gamma_all(const PointEval& pe, const Jet& f);

} // namespace gammaz
