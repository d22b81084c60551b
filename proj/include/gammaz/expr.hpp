#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gammaz/jet.hpp"

namespace gammaz {

namespace detail {
struct ExprNode;
}

/// Parsed scalar expression over named coordinates. Immutable after parse;
/// evaluation is pure and therefore safe from any number of threads.
class Expression {
public:
    Expression() = default;

    double eval(std::span<const double> point) const;
    /// Taylor coefficients up to `order` (0..3) at the point. Throws
    /// DomainError when the point is outside an elementary function's domain.
    Jet eval_jet(std::span<const double> point, int order) const;

    std::string to_string() const;
    int num_coords() const { return num_coords_; }
    bool empty() const { return root_ == nullptr; }
    /// True when no coordinate appears (value is position-independent).
    bool is_constant() const;

private:
    std::shared_ptr<const detail::ExprNode> root_;
    std::shared_ptr<const std::vector<std::string>> coord_names_;
    int num_coords_ = 0;

    friend Expression parse(std::string_view, std::span<const std::string>,
                            const std::map<std::string, double>&);
};

/// Parse `text` over the given coordinate names, with parameters substituted
/// as constants. Throws SyntaxError or UnknownIdentifier.
Expression parse(std::string_view text, std::span<const std::string> coords,
                 const std::map<std::string, double>& params = {});

/// Random polynomial of total degree <= 3 with coefficients in [-1, 1],
/// deterministic in the generator state. Used by the verification command
/// and the test oracles.
Expression random_cubic_polynomial(std::span<const std::string> coords, std::uint64_t& state);

} // namespace gammaz
