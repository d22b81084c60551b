#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace gammaz {

/// Truncated multivariate Taylor expansion of a scalar at a point: value,
/// gradient, and fully symmetric second/third partials, over up to kMaxDim
/// variables. This is the forward-mode substrate for every differential
/// operator in the library; order 3 is exactly what the iterated Gamma
/// bilinear forms require.
///
/// Storage is dense canonical: one slot per multi-index with i <= j <= k.
/// Arithmetic between two jets yields order min(p, q).
class Jet {
public:
    static constexpr int kMaxDim = 8;
    static constexpr int kMaxCoeffs = 165; // 1 + 8 + 36 + 120

    Jet() = default;
    Jet(int dim, int order);

    static Jet constant(int dim, int order, double value);
    /// Seed jet of the coordinate x_index: value set, d/dx_index = 1, rest 0.
    static Jet variable(int dim, int order, int index, double value);

    int dim() const { return dim_; }
    int order() const { return order_; }
    int coeff_count() const { return count_; }

    double value() const { return c_[0]; }
    double& value() { return c_[0]; }
    double grad(int i) const { return order_ >= 1 ? c_[1 + i] : 0.0; }
    double& grad_ref(int i) { return c_[1 + i]; }
    double hess(int i, int j) const;
    double third(int i, int j, int k) const;
    void set_hess(int i, int j, double v);
    void set_third(int i, int j, int k, double v);

    std::span<const double> coeffs() const { return {c_.data(), static_cast<std::size_t>(count_)}; }
    std::span<double> coeffs() { return {c_.data(), static_cast<std::size_t>(count_)}; }

    /// Jet of the partial derivative d/dx_i, one order lower.
    Jet derivative(int i) const;
    /// Copy truncated to the given (smaller or equal) order.
    Jet truncated(int order) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s);

    friend Jet operator+(Jet a, const Jet& b) { a += b; return a; }
    friend Jet operator-(Jet a, const Jet& b) { a -= b; return a; }
    friend Jet operator*(Jet a, double s) { a *= s; return a; }
    friend Jet operator*(double s, Jet a) { a *= s; return a; }
    friend Jet operator+(Jet a, double s) { a += s; return a; }
    friend Jet operator+(double s, Jet a) { a += s; return a; }
    friend Jet operator-(Jet a, double s) { a -= s; return a; }
    friend Jet operator-(double s, Jet a) { a = -a; a += s; return a; }
    friend Jet operator-(const Jet& a);
    friend Jet operator*(const Jet& a, const Jet& b);   // Leibniz through order 3
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator/(Jet a, double s) { a *= 1.0 / s; return a; }
    friend Jet operator/(double s, const Jet& b);

    /// Chain rule (Faa di Bruno through order 3) with outer univariate Taylor
    /// coefficients c[k] = g^(k)(value()).
    Jet compose(const std::array<double, 4>& outer) const;

private:
    int dim_ = 0;
    int order_ = 0;
    int count_ = 1;
    std::array<double, kMaxCoeffs> c_{};

    int idx2(int i, int j) const;           // i <= j
    int idx3(int i, int j, int k) const;    // i <= j <= k
    friend struct JetOps;
};

Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sqrt(const Jet& u);
Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet tanh(const Jet& u);
/// Integer power by repeated multiplication (exact for polynomials).
Jet powi(const Jet& u, long long e);
/// Real power; requires positive base.
Jet pow(const Jet& u, double p);

} // namespace gammaz
