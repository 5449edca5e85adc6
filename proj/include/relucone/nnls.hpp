#pragma once

#include "relucone/common.hpp"

#include <optional>

namespace relucone {

struct NnlsOptions {
    double dual_tol = 1e-12;  // stationarity threshold, scaled by the problem
    int max_iterations = 0;   // 0: choose 3*cols + 30
};

struct NnlsSolution {
    Vec coeffs;
    double residual = 0.0;  // ||A z - y||_2 at the returned z
    int iterations = 0;
    bool converged = true;
};

/// Lawson-Hanson active-set solve of  min ||A z - y||  subject to  z >= 0.
/// Iteration count is bounded; `converged=false` flags an early stop.
NnlsSolution nnls(const Mat& A, const Vec& y, const NnlsOptions& opts = {});

/// True iff some z >= 0 attains  A z = y  within feas_tol (Euclidean residual).
bool cone_feasible(const Mat& A, const Vec& y, double feas_tol);

/// True iff the polyhedron { c : A c <= b } with free c is nonempty.
bool polyhedron_feasible(const Mat& A, const Vec& b, double feas_tol);

/// True iff { c : Aeq c = beq, Aineq c <= bineq } is nonempty.
bool mixed_feasible(const Mat& Aeq, const Vec& beq, const Mat& Aineq, const Vec& bineq,
                    double feas_tol);

/// A point of { c : A c <= b }, or nullopt when the polyhedron is empty.
std::optional<Vec> polyhedron_point(const Mat& A, const Vec& b, double feas_tol);

/// Deterministic hit-and-run walk over { c : A c <= b } started at c0, which
/// must be feasible. Steps outside [-span_cap, span_cap] are clamped so
/// unbounded polyhedra still mix. Returns `count` states after burn-in.
std::vector<Vec> polyhedron_walk(const Mat& A, const Vec& b, const Vec& c0, int count,
                                 std::uint64_t seed, double span_cap = 1e6);

}  // namespace relucone
