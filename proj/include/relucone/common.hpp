#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace relucone {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 32;

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};
class InvalidInput : public Error {
public:
    using Error::Error;
};
class DegenerateInput : public Error {
public:
    using Error::Error;
};
class EmptyIntersection : public Error {
public:
    using Error::Error;
};
class SingularArrangement : public Error {
public:
    using Error::Error;
};
class NoSolution : public Error {
public:
    using Error::Error;
};
class EmptyPreimage : public Error {
public:
    using Error::Error;
};
class SamplingExhausted : public Error {
public:
    using Error::Error;
};
class NotCirculant : public Error {
public:
    using Error::Error;
};
class ApexAtInfinity : public Error {
public:
    using Error::Error;
};
class PieceBudgetExceeded : public Error {
public:
    using Error::Error;
};
class ConfigError : public Error {
public:
    using Error::Error;
};
class UnsupportedProjection : public Error {
public:
    using Error::Error;
};

/// Numerical thresholds used across the library. All overridable, but the
/// defaults are what every test pins against.
struct Tolerances {
    double eps_rank = 1e-10;   // rank decisions / degenerate normals
    double eps_solve = 1e-8;   // relative residual for linear consistency
    double membership = 1e-9;  // point-in-set decisions
    double signature = 1e-9;   // Plus/Minus band around a hyperplane
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tols{};
    return tols;
}

enum class Sign : std::int8_t { Minus = -1, Zero = 0, Plus = 1 };

using SignPattern = std::vector<Sign>;

inline char sign_char(Sign s) {
    switch (s) {
    case Sign::Plus: return '+';
    case Sign::Zero: return '0';
    case Sign::Minus: return '-';
    }
    return '?';
}

inline std::string pattern_string(const SignPattern& p) {
    std::string out;
    out.reserve(p.size());
    for (Sign s : p) out.push_back(sign_char(s));
    return out;
}

/// Zero entries count as Minus; used when tallying open cells.
inline SignPattern collapse_zeros(SignPattern p) {
    for (Sign& s : p)
        if (s == Sign::Zero) s = Sign::Minus;
    return p;
}

inline bool vec_finite(const Vec& v) { return v.allFinite(); }

inline void require_vec(const Vec& v, const char* what) {
    if (v.size() < kMinDim || v.size() > kMaxDim)
        throw InvalidInput(std::string(what) + ": dimension must lie in [2, 32], got " +
                           std::to_string(v.size()));
    if (!vec_finite(v))
        throw InvalidInput(std::string(what) + ": entries must be finite");
}

inline void require_same_dim(const Vec& a, const Vec& b, const char* what) {
    if (a.size() != b.size())
        throw DimensionMismatch(std::string(what) + ": dimensions " + std::to_string(a.size()) +
                                " and " + std::to_string(b.size()) + " differ");
}

inline bool in_nonneg_orthant(const Vec& x, double tol) { return (x.array() >= -tol).all(); }

inline Vec make_vec(std::initializer_list<double> entries) {
    Vec v(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (double e : entries) v[i++] = e;
    return v;
}

}  // namespace relucone
