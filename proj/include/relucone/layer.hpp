#pragma once

#include "relucone/geometry.hpp"

#include <set>

namespace relucone {

/// One ReLU layer  x -> max(0, W x + b)  with square weights.
struct LayerMap {
    Mat weights;  // d x d
    Vec bias;     // d

    LayerMap(Mat W, Vec b);

    int dim() const { return static_cast<int>(bias.size()); }
    /// Row i as the hyperplane  w_i . x + b_i = 0.
    Hyperplane hyperplane(int i, const Tolerances& tols = default_tolerances()) const;
};

/// A layer output split into its support and its zero set.
struct OutputPattern {
    Vec values;
    std::vector<int> positive_idx;
    std::vector<int> zero_idx;
};

Vec forward(const LayerMap& layer, const Vec& x);

/// Pattern of y = forward(layer, x); entries with y_i > tol are positive.
OutputPattern make_output_pattern(const Vec& y, double tol = default_tolerances().signature);

/// Per-row side of x relative to the layer's hyperplanes.
SignPattern cell_signature(const LayerMap& layer, const Vec& x,
                           double tol = default_tolerances().signature);

/// Distinct open cells touched by a regular grid over [0, box_radius]^d.
/// Zero entries collapse into Minus, so the result counts open cells only.
std::set<SignPattern> enumerate_cells(const LayerMap& layer, double box_radius, double resolution,
                                      double tol = default_tolerances().signature);

}  // namespace relucone
