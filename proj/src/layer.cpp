#include "relucone/layer.hpp"

#include <cmath>

namespace relucone {

LayerMap::LayerMap(Mat W, Vec b) : weights(std::move(W)), bias(std::move(b)) {
    require_vec(bias, "LayerMap bias");
    if (weights.rows() != weights.cols())
        throw InvalidInput("LayerMap weights must be square");
    if (weights.rows() != bias.size())
        throw DimensionMismatch("LayerMap weights and bias dimensions differ");
    if (!weights.allFinite()) throw InvalidInput("LayerMap weights must be finite");
}

Hyperplane LayerMap::hyperplane(int i, const Tolerances& tols) const {
    if (i < 0 || i >= dim()) throw InvalidInput("LayerMap::hyperplane: row index out of range");
    return Hyperplane(weights.row(i).transpose(), bias[i], tols);
}

Vec forward(const LayerMap& layer, const Vec& x) {
    require_same_dim(x, layer.bias, "forward");
    return (layer.weights * x + layer.bias).cwiseMax(0.0);
}

OutputPattern make_output_pattern(const Vec& y, double tol) {
    require_vec(y, "make_output_pattern");
    if (y.minCoeff() < -tol)
        throw InvalidInput("make_output_pattern: output entries must be nonnegative");
    OutputPattern out;
    out.values = y;
    for (int i = 0; i < y.size(); ++i) {
        if (y[i] > tol)
            out.positive_idx.push_back(i);
        else
            out.zero_idx.push_back(i);
    }
    return out;
}

SignPattern cell_signature(const LayerMap& layer, const Vec& x, double tol) {
    require_same_dim(x, layer.bias, "cell_signature");
    Vec pre = layer.weights * x + layer.bias;
    SignPattern sig(static_cast<size_t>(pre.size()));
    for (int i = 0; i < pre.size(); ++i) {
        if (pre[i] > tol)
            sig[static_cast<size_t>(i)] = Sign::Plus;
        else if (pre[i] < -tol)
            sig[static_cast<size_t>(i)] = Sign::Minus;
        else
            sig[static_cast<size_t>(i)] = Sign::Zero;
    }
    return sig;
}

std::set<SignPattern> enumerate_cells(const LayerMap& layer, double box_radius, double resolution,
                                      double tol) {
    const int d = layer.dim();
    if (d > 16) throw InvalidInput("enumerate_cells: dimension capped at 16");
    if (!(box_radius > 0.0) || !(resolution > 0.0))
        throw InvalidInput("enumerate_cells: box_radius and resolution must be positive");
    const long steps = static_cast<long>(std::floor(box_radius / resolution + 1e-12)) + 1;
    double total = std::pow(static_cast<double>(steps), d);
    if (total > 5e7) throw InvalidInput("enumerate_cells: grid would exceed the point budget");

    std::set<SignPattern> cells;
    std::vector<long> idx(static_cast<size_t>(d), 0);
    Vec x(d);
    while (true) {
        for (int i = 0; i < d; ++i) x[i] = std::min(idx[static_cast<size_t>(i)] * resolution, box_radius);
        cells.insert(collapse_zeros(cell_signature(layer, x, tol)));
        int k = 0;
        while (k < d) {
            if (++idx[static_cast<size_t>(k)] < steps) break;
            idx[static_cast<size_t>(k)] = 0;
            ++k;
        }
        if (k == d) break;
    }
    return cells;
}

}  // namespace relucone
