#include "relucone/network.hpp"

#include <string>
#include <utility>

namespace relucone {

Network::Network(std::vector<LayerMap> layer_seq) : layers(std::move(layer_seq)) {
    if (layers.empty()) throw InvalidInput("Network: layer stack must be nonempty");
    const Eigen::Index d = layers.front().weights.rows();
    for (const LayerMap& layer : layers)
        if (layer.weights.rows() != d)
            throw DimensionMismatch("Network: all layers must share one dimension");
}

Vec net_forward(const Network& net, const Vec& x) {
    require_vec(x, "net_forward");
    if (x.size() != net.dim()) throw DimensionMismatch("net_forward: input dimension mismatch");
    Vec h = x;
    for (const LayerMap& layer : net.layers) h = forward(layer, h);
    return h;
}

std::vector<Vec> net_activations(const Network& net, const Vec& x) {
    require_vec(x, "net_activations");
    if (x.size() != net.dim()) throw DimensionMismatch("net_activations: input dimension mismatch");
    std::vector<Vec> acts;
    acts.reserve(net.depth() + 1);
    acts.push_back(x);
    for (const LayerMap& layer : net.layers) acts.push_back(forward(layer, acts.back()));
    return acts;
}

std::vector<std::vector<AffinePiece>> propagate_pullback(const Network& net, AffinePiece seed,
                                                         const PullbackOptions& opts,
                                                         const Tolerances& tols) {
    const int d = net.dim();
    if (seed.base.size() != d)
        throw DimensionMismatch("propagate_pullback: seed dimension mismatch");
    const int depth = static_cast<int>(net.depth());

    std::vector<LayerPullback> pullbacks;
    pullbacks.reserve(net.layers.size());
    for (const LayerMap& layer : net.layers) pullbacks.emplace_back(layer, tols);

    seed.layer = depth;
    seed.id = 0;
    seed.parent = -1;

    std::vector<std::vector<AffinePiece>> stages(static_cast<size_t>(depth) + 1);
    stages[static_cast<size_t>(depth)].push_back(std::move(seed));
    std::size_t total = 1;

    for (int l = depth - 1; l >= 0; --l) {
        const std::vector<AffinePiece>& above = stages[static_cast<size_t>(l) + 1];
        std::vector<AffinePiece>& here = stages[static_cast<size_t>(l)];
        for (size_t pi = 0; pi < above.size(); ++pi) {
            for (AffinePiece& slice : face_slices(above[pi], opts.margin, tols)) {
                auto pulled = pull_back(pullbacks[static_cast<size_t>(l)], slice, tols);
                if (!pulled) continue;
                if (!piece_feasible(*pulled, /*margin=*/0.0, tols.membership)) continue;
                pulled->layer = l;
                pulled->parent = static_cast<int>(pi);
                pulled->id = static_cast<int>(here.size());
                if (++total > opts.piece_budget)
                    throw PieceBudgetExceeded("propagate_pullback: piece budget of " +
                                              std::to_string(opts.piece_budget) + " exceeded");
                here.push_back(std::move(*pulled));
            }
        }
        if (here.empty())
            throw EmptyPreimage("propagate_pullback: no piece survives below stage " +
                                std::to_string(l + 1));
    }
    return stages;
}

LayeredPreimage net_preimage(const Network& net, const Vec& y, const PullbackOptions& opts,
                             const Tolerances& tols) {
    require_vec(y, "net_preimage");
    if (y.size() != net.dim()) throw DimensionMismatch("net_preimage: output dimension mismatch");
    if (y.minCoeff() < -tols.membership)
        throw InvalidInput("net_preimage: target output has negative components");
    Vec y_clean = y;
    for (Eigen::Index i = 0; i < y_clean.size(); ++i)
        if (y_clean[i] <= tols.membership) y_clean[i] = 0.0;

    LayeredPreimage result;
    result.stages = propagate_pullback(net, make_point_piece(std::move(y_clean)), opts, tols);
    return result;
}

}  // namespace relucone
