#include "gammaz/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "gammaz/errors.hpp"

namespace gammaz {
namespace detail {

enum class Kind { number, coord, neg, add, sub, mul, div, pow, call };
enum class Fn { exp, log, sqrt, sin, cos, tanh };

struct ExprNode {
    Kind kind;
    double number = 0.0;     // Kind::number
    int coord = -1;          // Kind::coord
    Fn fn = Fn::exp;         // Kind::call
    std::shared_ptr<const ExprNode> a, b;
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make_number(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::number;
    n->number = v;
    return n;
}

NodePtr make_node(Kind k, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

bool node_is_constant(const ExprNode& n) {
    switch (n.kind) {
        case Kind::number: return true;
        case Kind::coord: return false;
        case Kind::neg: return node_is_constant(*n.a);
        case Kind::call: return node_is_constant(*n.a);
        default: return node_is_constant(*n.a) && node_is_constant(*n.b);
    }
}

Jet eval_node(const ExprNode& n, std::span<const double> pt, int dim, int order) {
    switch (n.kind) {
        case Kind::number: return Jet::constant(dim, order, n.number);
        case Kind::coord: return Jet::variable(dim, order, n.coord, pt[n.coord]);
        case Kind::neg: return -eval_node(*n.a, pt, dim, order);
        case Kind::add: return eval_node(*n.a, pt, dim, order) + eval_node(*n.b, pt, dim, order);
        case Kind::sub: return eval_node(*n.a, pt, dim, order) - eval_node(*n.b, pt, dim, order);
        case Kind::mul: return eval_node(*n.a, pt, dim, order) * eval_node(*n.b, pt, dim, order);
        case Kind::div: return eval_node(*n.a, pt, dim, order) / eval_node(*n.b, pt, dim, order);
        case Kind::pow: {
            Jet base = eval_node(*n.a, pt, dim, order);
            if (node_is_constant(*n.b)) {
                const double p = eval_node(*n.b, pt, dim, 0).value();
                const double r = std::nearbyint(p);
                if (p == r && std::fabs(r) < 1e18) return powi(base, static_cast<long long>(r));
                return pow(base, p);
            }
            return exp(eval_node(*n.b, pt, dim, order) * log(base));
        }
        case Kind::call: {
            Jet u = eval_node(*n.a, pt, dim, order);
            switch (n.fn) {
                case Fn::exp: return exp(u);
                case Fn::log: return log(u);
                case Fn::sqrt: return sqrt(u);
                case Fn::sin: return sin(u);
                case Fn::cos: return cos(u);
                case Fn::tanh: return tanh(u);
            }
        }
    }
    throw DomainError("corrupt expression node");
}

int precedence_level(Kind k) {
    switch (k) {
        case Kind::add:
        case Kind::sub: return 1;
        case Kind::mul:
        case Kind::div: return 2;
        case Kind::neg: return 3;
        case Kind::pow: return 4;
        default: return 5;
    }
}

void print_node(const ExprNode& n, std::ostream& os, std::span<const std::string> coords) {
    auto child = [&](const ExprNode& c, bool needs_parens) {
        if (needs_parens) os << '(';
        print_node(c, os, coords);
        if (needs_parens) os << ')';
    };
    const int lv = precedence_level(n.kind);
    switch (n.kind) {
        case Kind::number: {
            std::ostringstream tmp;
            tmp.precision(17);
            tmp << n.number;
            std::string s = tmp.str();
            if (!s.empty() && s[0] == '-') { os << '(' << s << ')'; } else { os << s; }
            break;
        }
        case Kind::coord: os << coords[static_cast<std::size_t>(n.coord)]; break;
        case Kind::neg:
            os << '-';
            child(*n.a, precedence_level(n.a->kind) < lv);
            break;
        case Kind::add:
        case Kind::sub:
            child(*n.a, precedence_level(n.a->kind) < lv);
            os << (n.kind == Kind::add ? "+" : "-");
            child(*n.b, precedence_level(n.b->kind) <= lv);
            break;
        case Kind::mul:
        case Kind::div:
            child(*n.a, precedence_level(n.a->kind) < lv);
            os << (n.kind == Kind::mul ? "*" : "/");
            child(*n.b, precedence_level(n.b->kind) <= lv);
            break;
        case Kind::pow:
            child(*n.a, precedence_level(n.a->kind) <= lv);
            os << '^';
            child(*n.b, precedence_level(n.b->kind) < lv);
            break;
        case Kind::call: {
            const char* names[] = {"exp", "log", "sqrt", "sin", "cos", "tanh"};
            os << names[static_cast<int>(n.fn)] << '(';
            print_node(*n.a, os, coords);
            os << ')';
            break;
        }
    }
}

struct Parser {
    std::string_view text;
    std::size_t pos = 0;
    std::span<const std::string> coords;
    const std::map<std::string, double>* params;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool accept(char c) {
        if (peek() == c) { ++pos; return true; }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) throw SyntaxError(pos, std::string("expected '") + c + "'");
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (accept('+')) lhs = make_node(Kind::add, lhs, parse_term());
            else if (accept('-')) lhs = make_node(Kind::sub, lhs, parse_term());
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = make_node(Kind::mul, lhs, parse_unary());
            else if (accept('/')) lhs = make_node(Kind::div, lhs, parse_unary());
            else return lhs;
        }
    }

    // unary minus binds tighter than '*' but looser than '^'
    NodePtr parse_unary() {
        if (accept('-')) return make_node(Kind::neg, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (accept('^')) return make_node(Kind::pow, base, parse_unary()); // right-assoc via unary
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= text.size()) throw SyntaxError(pos, "unexpected end of input");
        const char c = text[pos];
        if (c == '(') {
            ++pos;
            NodePtr inner = parse_sum();
            expect(')');
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        throw SyntaxError(pos, std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        const char* begin = text.data() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin) throw SyntaxError(pos, "malformed number");
        pos += static_cast<std::size_t>(end - begin);
        return make_number(v);
    }

    NodePtr parse_identifier() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
            ++pos;
        const std::string name(text.substr(start, pos - start));
        static const std::map<std::string, Fn, std::less<>> fns = {
            {"exp", Fn::exp}, {"log", Fn::log}, {"sqrt", Fn::sqrt},
            {"sin", Fn::sin}, {"cos", Fn::cos}, {"tanh", Fn::tanh}};
        if (auto it = fns.find(name); it != fns.end() && peek() == '(') {
            ++pos;
            NodePtr arg = parse_sum();
            expect(')');
            auto n = make_node(Kind::call, arg);
            const_cast<ExprNode&>(*n).fn = it->second;
            return n;
        }
        for (std::size_t i = 0; i < coords.size(); ++i)
            if (coords[i] == name) {
                auto n = std::make_shared<ExprNode>();
                n->kind = Kind::coord;
                n->coord = static_cast<int>(i);
                return n;
            }
        if (auto it = params->find(name); it != params->end()) return make_number(it->second);
        if (name == "pi") return make_number(3.14159265358979323846);
        if (name == "e") return make_number(2.71828182845904523536);
        throw UnknownIdentifier(name);
    }
};

} // namespace
} // namespace detail

double Expression::eval(std::span<const double> point) const {
    return eval_jet(point, 0).value();
}

Jet Expression::eval_jet(std::span<const double> point, int order) const {
    return detail::eval_node(*root_, point, num_coords_, order);
}

bool Expression::is_constant() const {
    return root_ == nullptr || detail::node_is_constant(*root_);
}

std::string Expression::to_string() const {
    if (!root_) return "0";
    std::ostringstream os;
    detail::print_node(*root_, os, *coord_names_);
    return os.str();
}

Expression random_cubic_polynomial(std::span<const std::string> coords, std::uint64_t& state) {
    // splitmix64; keeps the stream identical across standard libraries
    auto next_unit = [&state]() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z = z ^ (z >> 31);
        return 2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0;
    };
    const int d = static_cast<int>(coords.size());
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    auto emit = [&](const std::string& mono) {
        const double c = next_unit();
        if (!first) os << " + ";
        os << "(" << c << ")*" << mono;
        first = false;
    };
    for (int i = 0; i < d; ++i) emit(coords[static_cast<std::size_t>(i)]);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            emit(coords[static_cast<std::size_t>(i)] + "*" + coords[static_cast<std::size_t>(j)]);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = j; k < d; ++k)
                emit(coords[static_cast<std::size_t>(i)] + "*" + coords[static_cast<std::size_t>(j)] + "*" +
                     coords[static_cast<std::size_t>(k)]);
    return parse(os.str(), coords);
}

Expression parse(std::string_view text, std::span<const std::string> coords,
                 const std::map<std::string, double>& params) {
    std::size_t first = 0;
    while (first < text.size() && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    if (first == text.size()) throw SyntaxError(0, "empty expression");
    detail::Parser p{text, 0, coords, &params};
    detail::NodePtr root = p.parse_sum();
    p.skip_ws();
    if (p.pos != text.size()) throw SyntaxError(p.pos, "trailing input");
    Expression e;
    e.root_ = std::move(root);
    e.num_coords_ = static_cast<int>(coords.size());
    auto names = std::make_shared<std::vector<std::string>>(coords.begin(), coords.end());
    e.coord_names_ = std::move(names);
    return e;
}

} // namespace gammaz
