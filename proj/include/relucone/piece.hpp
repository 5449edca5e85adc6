#pragma once

#include "relucone/dual_basis.hpp"

#include <Eigen/LU>

#include <optional>

namespace relucone {

/// Convex polyhedral patch of an affine subspace: points
///   x = base + span * c   with   coeff_a * c <= coeff_b,
/// always read together with the implicit clip to the nonnegative orthant.
/// Span columns are orthonormal; constraint rows are unit-normalized, so
/// coefficient margins are geometric distances.
struct AffinePiece {
    Vec base;
    Mat span;     // d x k
    Mat coeff_a;  // m x k
    Vec coeff_b;  // m

    SignPattern signature;      // cell of the layer the piece feeds
    std::vector<int> zero_tag;  // coordinate zero-set the piece was seeded from
    int layer = -1;
    int id = -1;
    int parent = -1;  // index into the previous stage, -1 for roots
};

AffinePiece make_point_piece(Vec point);
AffinePiece make_subspace_piece(const AffineSubspace& subspace);

AffineSubspace piece_hull(const AffinePiece& piece);
inline int piece_dim(const AffinePiece& piece) { return static_cast<int>(piece.span.cols()); }

/// Unit-normalizes constraint rows, discarding vacuous ones. Returns false
/// when a zero row is contradictory (the piece is empty).
bool normalize_constraints(AffinePiece& piece, double tol);

bool piece_contains(const AffinePiece& piece, const Vec& x, double tol);

/// Nonempty once clipped to the orthant; `margin` shrinks the coefficient
/// constraints so slivers thinner than it report empty.
bool piece_feasible(const AffinePiece& piece, double margin, double feas_tol);

/// Deterministic interior samples inside [0, box_radius]^d, or empty when the
/// clipped piece is empty there.
std::vector<Vec> sample_piece(const AffinePiece& piece, int count, std::uint64_t seed,
                              double box_radius, double feas_tol);

/// Piece cut down to the coordinate subspace { x_i = 0 : i in zero_set };
/// nullopt when the affine hulls miss each other.
std::optional<AffinePiece> slice_by_face(const AffinePiece& piece,
                                         const std::vector<int>& zero_set,
                                         const Tolerances& tols = default_tolerances());

/// All coordinate-face slices of the piece, tagged by zero set, walked in
/// subset order with closure pruning. Slices whose points carry extra
/// structural zeros are left to the matching superset tag, and slices without
/// `margin` interior in coefficient space are dropped.
std::vector<AffinePiece> face_slices(const AffinePiece& piece, double margin,
                                     const Tolerances& tols = default_tolerances());

/// Prepared inversion of one layer.
struct LayerPullback {
    explicit LayerPullback(const LayerMap& layer_map,
                           const Tolerances& tols = default_tolerances());

    LayerMap layer;
    Eigen::FullPivLU<Mat> lu;
    DualBasis basis;

    Vec invert(const Vec& q) const { return lu.solve(q - layer.bias); }
};

///// Preimage of an output-space slice through the layer: the affine inverse of
/// the slice joined with the positive span of the dual vectors for its zero
/// tag. Constraints are transported exactly; nullopt when the transported
/// rows prove the piece empty.
std::optional<AffinePiece> pull_back(const LayerPullback& pullback, const AffinePiece& out_slice,
                                     const Tolerances& tols = default_tolerances());

/// Common points of two pieces (orthant clip included in the feasibility
/// decision), or nullopt when they share nothing.
std::optional<AffinePiece> piece_intersection(const AffinePiece& a, const AffinePiece& b,
                                              const Tolerances& tols = default_tolerances());

}  // namespace relucone
