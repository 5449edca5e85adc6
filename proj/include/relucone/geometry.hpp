#pragma once

#include "relucone/common.hpp"

#include <optional>
#include <span>

namespace relucone {

/// Hyperplane { x : normal . x + offset = 0 }.
struct Hyperplane {
    Vec normal;
    double offset = 0.0;

    Hyperplane(Vec n, double off, const Tolerances& tols = default_tolerances());

    int dim() const { return static_cast<int>(normal.size()); }
    double eval(const Vec& x) const { return normal.dot(x) + offset; }
};

/// Affine subspace  { base + directions * c }  with orthonormal directions.
/// directions may have zero columns, in which case the subspace is a point.
struct AffineSubspace {
    Vec base;
    Mat directions;  // ambient_dim x dim, orthonormal columns

    AffineSubspace(Vec base_point, Mat orthonormal_directions);

    /// Orthonormalizes an arbitrary spanning set (dependent columns dropped).
    static AffineSubspace from_spanning(Vec base_point, const Mat& spanning,
                                        const Tolerances& tols = default_tolerances());

    int ambient_dim() const { return static_cast<int>(base.size()); }
    int dim() const { return static_cast<int>(directions.cols()); }

    /// Euclidean distance from x to the subspace.
    double distance(const Vec& x) const;
    bool contains(const Vec& x, double tol) const { return distance(x) <= tol; }
    Vec project(const Vec& x) const;
};

/// Which side of the plane x falls on; |eval| <= tol reports Zero.
Sign side_of(const Hyperplane& plane, const Vec& x, double tol);

/// Orthonormal basis of the column space; columns with singular value below
/// eps_rank (relative to the largest) are discarded.
Mat orthonormalize_columns(const Mat& raw, double eps_rank);

/// Mutual intersection of at most d hyperplanes as an affine subspace.
/// Throws DegenerateInput for near-zero normals and EmptyIntersection when the
/// stacked system is inconsistent beyond eps_solve.
AffineSubspace intersect_planes(std::span<const Hyperplane> planes,
                                const Tolerances& tols = default_tolerances());

/// Intersection of two affine subspaces, or nullopt if they are disjoint.
std::optional<AffineSubspace> affine_intersect(const AffineSubspace& a, const AffineSubspace& b,
                                               const Tolerances& tols = default_tolerances());

/// True iff a and b describe the same point set within tol.
bool same_subspace(const AffineSubspace& a, const AffineSubspace& b, double tol);

}  // namespace relucone
