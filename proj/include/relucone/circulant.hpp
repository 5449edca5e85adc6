#pragma once

#include "relucone/dual_basis.hpp"

namespace relucone {

/// Convolution kernel with a shared bias; taps wrap cyclically when the
/// kernel is shorter than the signal.
struct Kernel {
    std::vector<double> taps;
    double bias = 0.0;
};

/// Regular polyhedral cone carved out by a circulant arrangement. All
/// hyperplanes touch the identity line, so the cone is fixed by its apex on
/// that line, the common angle between the plane normals and the axis, and a
/// residual twist of the normal fan around the axis.
struct ConeDescriptor {
    Vec apex;           // (-bias / row_sum) * ones
    Vec axis;           // ones / sqrt(d)
    double half_angle;  // angle between each plane normal and the axis
    double row_sum;     // shared sum of each weight row
    double twist;       // rotation of the normal fan against the coordinate fan
};

struct NestingViolation {
    std::vector<int> subset;  // plane indices, sorted
    Vec witness;              // offending point: on the subset's intersection
                              // for span violations, on (or deepest into) the
                              // facet crossing for grip violations
    int crossed_facet;        // coordinate facet reached illegally, -1 if the
                              // span missed its own coordinate subset instead
};

struct NestingReport {
    bool fully_nested = true;
    std::vector<NestingViolation> violated_subsets;
    int checked_subsets = 0;
    int vacuous_subsets = 0;  // subsets whose intersection misses the sample box
};

struct ContractionViolation {
    SignPattern pattern;
    int source_dim;  // intrinsic dimension of the sample's coordinate face
    int image_dim;   // dimension of the output's coordinate face
    Vec witness;
};

struct ContractionReport {
    std::vector<ContractionViolation> violations;
    int patterns_checked = 0;
};

/// d x d circulant layer for the kernel: row i carries the taps cyclically
/// starting at column i, and every bias entry equals the kernel bias.
LayerMap circulant_layer(const Kernel& kernel, int d);

bool is_circulant(const LayerMap& layer, double tol = 1e-9);

/// Cone summary of a circulant layer. Throws NotCirculant for non-circulant
/// weights and ApexAtInfinity when the row sum vanishes.
ConeDescriptor cone_of(const LayerMap& layer, const Tolerances& tols = default_tolerances());

/// Max over trials of ||forward(P x) - P forward(x)|| for the cyclic shift P.
double check_shift_equivariance(const LayerMap& layer, int trials = 100,
                                std::uint64_t seed = 0);

struct NestingOptions {
    int samples_per_subset = 64;
    double box_radius = 2.0;  // witnesses are drawn from [0, box_radius]^d
    double feas_tol = 1e-9;
};

/// Checks that the layer's arrangement cone is nested inside the coordinate
/// cone over the witness box. Two families of tests: (a) exact, per plane —
/// each plane must keep its matching coordinate facet {x_i = 0} on the
/// nonpositive side within the box (a crossing is where the face dimension
/// can grow under the layer and is reported against subset {i}); (b) sampled,
/// per plane-subset intersection — the positive span of the subset's dual
/// vectors from each witness must reach the matching coordinate subset while
/// avoiding every other coordinate facet.
NestingReport check_nesting(const LayerMap& layer, int samples_per_subset = 64,
                            std::uint64_t seed = 0, const NestingOptions& opts = {});

struct ContractionOptions {
    double box_radius = 2.0;
    double resolution = 0.25;
    int jitter_per_face = 32;  // extra random samples on each coordinate face
};

/// Grid sweep comparing the coordinate-face dimension of each sample with the
/// dimension of its image's coordinate face; reports every sign pattern where
/// the dimension increases.
ContractionReport check_contraction(const LayerMap& layer, std::uint64_t seed = 0,
                                    const ContractionOptions& opts = {});

}  // namespace relucone
