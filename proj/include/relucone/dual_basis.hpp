#pragma once

#include "relucone/layer.hpp"

#include <cstdint>

namespace relucone {

/// Dual generators of an invertible arrangement. Column i of `vectors` is the
/// unit direction of the line shared by every hyperplane except plane i,
/// oriented toward the negative side of plane i. The apex is the mutual
/// intersection of all d hyperplanes.
struct DualBasis {
    Vec apex;
    Mat vectors;  // d x d, unit columns
};

/// Preimage of one output: base point plus the cone over the tagged
/// generators, clipped to the nonnegative orthant (the clip stays implicit).
struct PreimageSet {
    Vec base;
    Mat generators;              // d x p, unit columns
    std::vector<int> zero_idx;   // generator i corresponds to output zero_idx[i]
    std::vector<int> positive_idx;

    int dim() const { return static_cast<int>(base.size()); }
    int generator_count() const { return static_cast<int>(generators.cols()); }
};

/// Builds the dual basis from the arrangement; each direction comes from the
/// nullspace of the remaining d-1 normals rather than a matrix inverse.
/// Throws SingularArrangement when the weights are rank deficient.
DualBasis build_dual_basis(const LayerMap& layer,
                           const Tolerances& tols = default_tolerances());

/// Exact preimage of y under the layer. Throws NoSolution when the linear
/// system for the base point is inconsistent and EmptyPreimage when the cone
/// misses the nonnegative orthant entirely.
PreimageSet preimage(const LayerMap& layer, const Vec& y,
                     const Tolerances& tols = default_tolerances());

/// True iff x lies in the preimage set within tol; boundary ties count as
/// members. Decided by a bounded-iteration nonnegative least-squares solve.
bool preimage_contains(const PreimageSet& set, const Vec& x, double tol);

/// Deterministic samples from the set: cone coefficients uniform on
/// [0, radius], rejected against the orthant. Throws SamplingExhausted when
/// the rejection rate exceeds 99.9% over a million draws.
std::vector<Vec> sample_preimage(const PreimageSet& set, int count, std::uint64_t seed,
                                 double radius, double tol = default_tolerances().membership);

}  // namespace relucone
