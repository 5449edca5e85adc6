#pragma once

#include "relucone/circulant.hpp"
#include "relucone/dual_basis.hpp"
#include "relucone/layer.hpp"

#include <Eigen/SVD>

#include <random>

namespace relucone::testing {

/// Uniform matrix entries in [-1, 1], redrawn until the smallest singular
/// value clears `sigma_min` so every test layer is comfortably invertible.
inline LayerMap random_invertible_layer(int d, std::mt19937_64& rng, double sigma_min = 0.15,
                                        double bias_range = 1.0) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (;;) {
        Mat W(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) W(i, j) = unif(rng);
        Eigen::JacobiSVD<Mat> svd(W);
        if (svd.singularValues()(d - 1) < sigma_min) continue;
        Vec b(d);
        for (int i = 0; i < d; ++i) b[i] = bias_range * unif(rng);
        return LayerMap(std::move(W), std::move(b));
    }
}

inline Vec random_nonneg_point(int d, std::mt19937_64& rng, double radius = 1.5) {
    std::uniform_real_distribution<double> unif(0.0, radius);
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = unif(rng);
    return x;
}

/// An output guaranteed reachable: the image of a random nonnegative point.
inline Vec random_reachable_output(const LayerMap& layer, std::mt19937_64& rng,
                                   double radius = 1.5) {
    return forward(layer, random_nonneg_point(layer.dim(), rng, radius));
}

/// Circulant layer with taps near the identity kernel; such layers keep the
/// cone narrow, which makes most of them fully nested.
inline LayerMap random_near_identity_circulant(int d, std::mt19937_64& rng,
                                               double spread = 0.12) {
    std::uniform_real_distribution<double> unif(0.0, spread);
    std::uniform_real_distribution<double> bias_unif(-0.6, -0.1);
    std::vector<double> taps(static_cast<size_t>(d), 0.0);
    double rest = 0.0;
    for (int j = 1; j < d; ++j) {
        taps[static_cast<size_t>(j)] = unif(rng);
        rest += taps[static_cast<size_t>(j)];
    }
    taps[0] = 1.0 - rest;  // row sum 1, dominant first tap
    return circulant_layer(Kernel{taps, bias_unif(rng)}, d);
}

}  // namespace relucone::testing
