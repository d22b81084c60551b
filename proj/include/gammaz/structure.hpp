#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gammaz/expr.hpp"
#include "gammaz/jet.hpp"

namespace gammaz {

enum class Preset { none, heisenberg, se2, martinet, ou1d };

/// A sub-Riemannian structure: horizontal directions a ((n+m) x n), vertical
/// repair directions z ((n+m) x m), potential V and log of the weighted
/// volume. All entries are expressions in the declared coordinates.
/// Immutable after construction; every operation below is pure.
struct SubRiemannianStructure {
    int n = 0;
    int m = 0;
    std::vector<std::string> coords;   // n+m names
    std::vector<Expression> a;         // row-major (n+m) x n
    std::vector<Expression> z;         // row-major (n+m) x m
    Expression V;                      // defaults to 0
    Expression log_vol;                // log Vol, defaults to 0
    Preset preset = Preset::none;

    int dim() const { return n + m; }
    const Expression& a_entry(int row, int col) const { return a[static_cast<std::size_t>(row * n + col)]; }
    const Expression& z_entry(int row, int col) const { return z[static_cast<std::size_t>(row * m + col)]; }
};

/// Builtin structures from the worked examples. V is left at 0; callers
/// supply the potential explicitly. `params` feeds expression parameters
/// (se2 uses beta, default 1, and a direction magnitude g defaulting to the
/// constant beta).
SubRiemannianStructure make_preset(Preset which, const std::map<std::string, double>& params = {},
                                   std::string_view g_expr = {});
Preset preset_from_name(std::string_view name);
std::string_view preset_name(Preset p);

/// Replace the potential (and optionally log Vol) on a copy.
SubRiemannianStructure with_potential(SubRiemannianStructure s, std::string_view v_text,
                                      const std::map<std::string, double>& params = {});

/// All jets of the structure's fields at one point, to the order every
/// downstream operator needs: a^T, z^T, V, log Vol at order 2, plus cached
/// aa^T and zz^T jets and grad log rho* = -grad V + grad log Vol.
struct PointEval {
    int n = 0, m = 0, D = 0;
    std::vector<double> x;
    std::vector<Jet> aT;   // n x D, aT[i*D + hat]
    std::vector<Jet> zT;   // m x D
    Jet V_jet;
    Jet logvol_jet;
    std::vector<Jet> aaT;  // D x D
    std::vector<Jet> zzT;  // D x D
    std::vector<double> grad_log_rho;  // D

    const Jet& at(int i, int hat) const { return aT[static_cast<std::size_t>(i * D + hat)]; }
    const Jet& zt(int i, int hat) const { return zT[static_cast<std::size_t>(i * D + hat)]; }
    const Jet& aat(int i, int j) const { return aaT[static_cast<std::size_t>(i * D + j)]; }
    const Jet& zzt(int i, int j) const { return zzT[static_cast<std::size_t>(i * D + j)]; }
};

PointEval eval_structure(const SubRiemannianStructure& s, std::span<const double> x);

/// (a^T grad f)(x), length n.
std::vector<double> horizontal_gradient(const PointEval& pe, const Jet& f);
std::vector<double> horizontal_gradient(const SubRiemannianStructure& s, const Expression& f,
                                        std::span<const double> x);

/// (z^T grad f)(x), length m.
std::vector<double> vertical_gradient(const PointEval& pe, const Jet& f);
std::vector<double> vertical_gradient(const SubRiemannianStructure& s, const Expression& f,
                                      std::span<const double> x);

/// The contraction (a (x) grad a)_hat = sum_k sum_k' a_{hat k} d_{k'} a_{k' k}.
std::vector<double> a_otimes_nabla_a(const PointEval& pe);

/// max over sample points of || a(x)grad a + aa^T grad log Vol ||_inf; zero
/// exactly when log Vol matches the invariant-measure identity.
double check_invariant_measure(const SubRiemannianStructure& s,
                               std::span<const double> points_flat, int npoints);

/// b = -1/2 aa^T grad V.
std::vector<double> drift_b(const PointEval& pe);

/// Generator value L f at the point; f_jet must carry order >= 2.
double apply_generator(const PointEval& pe, const Jet& f_jet);
double generator_L(const SubRiemannianStructure& s, const Expression& f, std::span<const double> x);

/// Jet (order min(f.order-2, 1)) of the scalar field x -> (L f)(x); needs
/// f at order 3 for a first-order result.
Jet generator_jet(const PointEval& pe, const Jet& f_jet);

} // namespace gammaz
