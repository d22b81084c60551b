#include "gammaz/jet.hpp"

#include <cassert>
#include <cmath>

#include "gammaz/errors.hpp"

namespace gammaz {

namespace {

constexpr int tri(int d) { return d * (d + 1) / 2; }
constexpr int tet(int d) { return d * (d + 1) * (d + 2) / 6; }

int num_coeffs(int dim, int order) {
    int c = 1;
    if (order >= 1) c += dim;
    if (order >= 2) c += tri(dim);
    if (order >= 3) c += tet(dim);
    return c;
}

} // namespace

Jet::Jet(int dim, int order) : dim_(dim), order_(order), count_(num_coeffs(dim, order)) {
    assert(dim >= 0 && dim <= kMaxDim && order >= 0 && order <= 3);
}

Jet Jet::constant(int dim, int order, double value) {
    Jet j(dim, order);
    j.c_[0] = value;
    return j;
}

Jet Jet::variable(int dim, int order, int index, double value) {
    Jet j(dim, order);
    j.c_[0] = value;
    if (order >= 1) j.c_[1 + index] = 1.0;
    return j;
}

int Jet::idx2(int i, int j) const {
    // offset into the order-2 block, canonical i <= j
    return 1 + dim_ + i * dim_ - i * (i - 1) / 2 + (j - i);
}

int Jet::idx3(int i, int j, int k) const {
    // multisets with smallest element < i come first, then a local 2-multiset
    // over the shifted alphabet {i..dim-1}
    const int base = 1 + dim_ + tri(dim_);
    const int block = tet(dim_) - tet(dim_ - i);
    const int dloc = dim_ - i;
    const int jl = j - i, kl = k - i;
    return base + block + jl * dloc - jl * (jl - 1) / 2 + (kl - jl);
}

double Jet::hess(int i, int j) const {
    if (order_ < 2) return 0.0;
    if (i > j) std::swap(i, j);
    return c_[idx2(i, j)];
}

double Jet::third(int i, int j, int k) const {
    if (order_ < 3) return 0.0;
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    return c_[idx3(i, j, k)];
}

void Jet::set_hess(int i, int j, double v) {
    if (i > j) std::swap(i, j);
    c_[idx2(i, j)] = v;
}

void Jet::set_third(int i, int j, int k, double v) {
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
    c_[idx3(i, j, k)] = v;
}

Jet Jet::derivative(int i) const {
    assert(order_ >= 1);
    Jet out(dim_, order_ - 1);
    out.c_[0] = grad(i);
    if (order_ >= 2)
        for (int j = 0; j < dim_; ++j) out.c_[1 + j] = hess(i, j);
    if (order_ >= 3)
        for (int j = 0; j < dim_; ++j)
            for (int k = j; k < dim_; ++k) out.c_[out.idx2(j, k)] = third(i, j, k);
    return out;
}

Jet Jet::truncated(int order) const {
    if (order >= order_) return *this;
    Jet out(dim_, order);
    for (int t = 0; t < out.count_; ++t) out.c_[t] = c_[t];
    return out;
}

Jet& Jet::operator+=(const Jet& o) {
    assert(dim_ == o.dim_);
    if (o.order_ < order_) *this = truncated(o.order_);
    for (int t = 0; t < count_; ++t) c_[t] += o.c_[t];
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    assert(dim_ == o.dim_);
    if (o.order_ < order_) *this = truncated(o.order_);
    for (int t = 0; t < count_; ++t) c_[t] -= o.c_[t];
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (int t = 0; t < count_; ++t) c_[t] *= s;
    return *this;
}

Jet operator-(const Jet& a) {
    Jet out = a;
    for (int t = 0; t < out.count_; ++t) out.c_[t] = -out.c_[t];
    return out;
}

Jet operator*(const Jet& a, const Jet& b) {
    assert(a.dim_ == b.dim_);
    const int d = a.dim_;
    Jet out(d, std::min(a.order_, b.order_));
    out.c_[0] = a.c_[0] * b.c_[0];
    if (out.order_ >= 1)
        for (int i = 0; i < d; ++i) out.c_[1 + i] = a.grad(i) * b.c_[0] + a.c_[0] * b.grad(i);
    if (out.order_ >= 2)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                out.c_[out.idx2(i, j)] = a.hess(i, j) * b.c_[0] + a.grad(i) * b.grad(j) +
                                         a.grad(j) * b.grad(i) + a.c_[0] * b.hess(i, j);
    if (out.order_ >= 3)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = j; k < d; ++k)
                    out.c_[out.idx3(i, j, k)] =
                        a.third(i, j, k) * b.c_[0] + a.hess(i, j) * b.grad(k) +
                        a.hess(i, k) * b.grad(j) + a.hess(j, k) * b.grad(i) +
                        a.grad(i) * b.hess(j, k) + a.grad(j) * b.hess(i, k) +
                        a.grad(k) * b.hess(i, j) + a.c_[0] * b.third(i, j, k);
    return out;
}

Jet Jet::compose(const std::array<double, 4>& c) const {
    const int d = dim_;
    Jet out(d, order_);
    out.c_[0] = c[0];
    if (order_ >= 1)
        for (int i = 0; i < d; ++i) out.c_[1 + i] = c[1] * grad(i);
    if (order_ >= 2)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                out.c_[idx2(i, j)] = c[1] * hess(i, j) + c[2] * grad(i) * grad(j);
    if (order_ >= 3)
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = j; k < d; ++k)
                    out.c_[idx3(i, j, k)] =
                        c[1] * third(i, j, k) +
                        c[2] * (hess(i, j) * grad(k) + hess(i, k) * grad(j) + hess(j, k) * grad(i)) +
                        c[3] * grad(i) * grad(j) * grad(k);
    return out;
}

Jet operator/(const Jet& a, const Jet& b) {
    const double v = b.value();
    if (v == 0.0) throw DomainError("division by zero");
    const double iv = 1.0 / v;
    return a * b.compose({iv, -iv * iv, 2.0 * iv * iv * iv, -6.0 * iv * iv * iv * iv});
}

Jet operator/(double s, const Jet& b) {
    const double v = b.value();
    if (v == 0.0) throw DomainError("division by zero");
    const double iv = 1.0 / v;
    return s * b.compose({iv, -iv * iv, 2.0 * iv * iv * iv, -6.0 * iv * iv * iv * iv});
}

Jet exp(const Jet& u) {
    const double e = std::exp(u.value());
    return u.compose({e, e, e, e});
}

Jet log(const Jet& u) {
    const double v = u.value();
    if (v <= 0.0) throw DomainError("log of nonpositive value");
    const double iv = 1.0 / v;
    return u.compose({std::log(v), iv, -iv * iv, 2.0 * iv * iv * iv});
}

Jet sqrt(const Jet& u) {
    const double v = u.value();
    if (v <= 0.0) throw DomainError("sqrt of nonpositive value");
    const double r = std::sqrt(v);
    return u.compose({r, 0.5 / r, -0.25 / (r * v), 0.375 / (r * v * v)});
}

Jet sin(const Jet& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return u.compose({s, c, -s, -c});
}

Jet cos(const Jet& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    return u.compose({c, -s, -c, s});
}

Jet tanh(const Jet& u) {
    const double t = std::tanh(u.value());
    const double s = 1.0 - t * t; // sech^2
    return u.compose({t, s, -2.0 * t * s, s * (6.0 * t * t - 2.0)});
}

Jet powi(const Jet& u, long long e) {
    if (e == 0) return Jet::constant(u.dim(), u.order(), 1.0);
    const bool neg = e < 0;
    unsigned long long k = neg ? static_cast<unsigned long long>(-e) : static_cast<unsigned long long>(e);
    Jet acc = Jet::constant(u.dim(), u.order(), 1.0);
    Jet base = u;
    while (k) {
        if (k & 1) acc = acc * base;
        k >>= 1;
        if (k) base = base * base;
    }
    if (neg) return 1.0 / acc;
    return acc;
}

Jet pow(const Jet& u, double p) {
    const double v = u.value();
    if (v <= 0.0) throw DomainError("fractional power of nonpositive base");
    const double f = std::pow(v, p);
    return u.compose({f, p * f / v, p * (p - 1.0) * f / (v * v), p * (p - 1.0) * (p - 2.0) * f / (v * v * v)});
}

} // namespace gammaz
