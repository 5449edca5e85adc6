#pragma once

#include "relucone/common.hpp"
#include "relucone/layer.hpp"
#include "relucone/piece.hpp"

#include <cstddef>
#include <vector>

namespace relucone {

/// An equal-width stack of rectifying layers applied in order: the output of
/// layers[l] feeds layers[l+1].
struct Network {
    std::vector<LayerMap> layers;

    explicit Network(std::vector<LayerMap> layer_seq);

    int dim() const { return static_cast<int>(layers.front().weights.rows()); }
    std::size_t depth() const { return layers.size(); }
};

/// Composition of the layer forward maps in order.
Vec net_forward(const Network& net, const Vec& x);

/// Activation snapshots along the forward pass: result[0] = x and
/// result[l+1] = forward(layers[l], result[l]); size depth()+1.
std::vector<Vec> net_activations(const Network& net, const Vec& x);

struct PullbackOptions {
    /// Hard cap on the total number of pieces created across all stages.
    std::size_t piece_budget = 100000;
    /// Slices whose interior is thinner than this margin are dropped.
    double margin = 1e-9;
};

/// Stage-indexed preimage pieces: stages[depth()] holds the seed piece in the
/// final output space, and stages[l] holds pieces in the input space of layer
/// l; stages[0] is the full input-domain preimage. Every piece records the
/// index of its parent in the next stage up, so forward-mapping any of its
/// points through layer l lands inside that parent.
struct LayeredPreimage {
    std::vector<std::vector<AffinePiece>> stages;

    const std::vector<AffinePiece>& input_pieces() const { return stages.front(); }
};

/// Exact preimage of an output vector under the whole stack, stage by stage.
/// Requires y >= 0 (entries below the membership tolerance are treated as
/// zero) and every layer matrix invertible.
LayeredPreimage net_preimage(const Network& net, const Vec& y, const PullbackOptions& opts = {},
                             const Tolerances& tols = default_tolerances());

/// Shared engine behind net_preimage and the manifold tracer: starting from a
/// seed piece in the final output space, repeatedly slice each stage's pieces
/// by the coordinate faces of that space and pull every slice back through
/// the layer below, keeping only pieces that meet the nonnegative orthant.
/// Throws EmptyPreimage when a stage comes out empty and PieceBudgetExceeded
/// when the cap is hit.
std::vector<std::vector<AffinePiece>> propagate_pullback(const Network& net, AffinePiece seed,
                                                         const PullbackOptions& opts = {},
                                                         const Tolerances& tols = default_tolerances());

}  // namespace relucone
