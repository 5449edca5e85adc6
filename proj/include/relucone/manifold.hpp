#pragma once

#include "relucone/common.hpp"
#include "relucone/geometry.hpp"
#include "relucone/layer.hpp"
#include "relucone/network.hpp"
#include "relucone/piece.hpp"

#include <vector>

namespace relucone {

/// Slice an affine manifold M (in the layer's input space) by the layer's
/// hyperplane arrangement: for every index subset whose plane intersection
/// meets M, emit the intersection tagged with that subset. The empty subset
/// (M itself, empty tag) is always included. Supersets of subsets that miss M
/// are pruned, since meeting a larger intersection implies meeting every
/// sub-intersection. Emitted pieces carry no coefficient constraints; they
/// are plain affine intersections. Requires dim <= 16 to keep the subset walk
/// tractable.
std::vector<AffinePiece> intersect_manifold(const AffineSubspace& M, const LayerMap& layer,
                                            const Tolerances& tols = default_tolerances());

/// Pull tagged pieces lying on the layer's tagged plane intersections back
/// through the rectifier: each output of the layer restricted to such a piece
/// has zeros exactly on the tag, so its fiber is the piece point plus the
/// positive span of the tag's dual vectors. Emitted pieces are clipped to the
/// cell of the layer they feed (signature rows) and to the nonnegative
/// orthant; pieces that miss the orthant are dropped.
std::vector<AffinePiece> backtrace_layer(const std::vector<AffinePiece>& tagged,
                                         const LayerMap& layer,
                                         const Tolerances& tols = default_tolerances());

/// Two pieces that share boundary points, together with the shared set.
struct PieceAdjacency {
    int a = -1;
    int b = -1;
    AffinePiece shared;
};

/// A continuous piecewise-affine set: pieces plus the adjacency structure of
/// their shared boundaries.
struct PiecewiseManifold {
    std::vector<AffinePiece> pieces;
    std::vector<PieceAdjacency> adjacency;
};

/// Full record of a manifold trace: per-stage pieces (same layout as
/// LayeredPreimage::stages) plus the assembled input-space manifold.
struct TraceResult {
    std::vector<std::vector<AffinePiece>> stages;
    PiecewiseManifold manifold;
};

/// Trace an affine manifold given in the final output space back to the input
/// space of the whole stack. Every point of every emitted piece maps forward
/// into M. Throws EmptyPreimage when M misses the reachable output set and
/// PieceBudgetExceeded past the configured cap.
TraceResult trace_manifold_detailed(const Network& net, const AffineSubspace& M,
                                    const PullbackOptions& opts = {},
                                    const Tolerances& tols = default_tolerances());

PiecewiseManifold trace_manifold(const Network& net, const AffineSubspace& M,
                                 const PullbackOptions& opts = {},
                                 const Tolerances& tols = default_tolerances());

}  // namespace relucone
