#include "relucone/circulant.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace relucone;
using relucone::testing::random_near_identity_circulant;

TEST_CASE("circulant rows are cyclic shifts of the taps") {
    LayerMap layer = circulant_layer(Kernel{{1.0, 2.0, 3.0}, -0.5}, 3);
    Mat expect(3, 3);
    expect << 1, 2, 3, 3, 1, 2, 2, 3, 1;
    CHECK((layer.weights - expect).cwiseAbs().maxCoeff() == 0.0);
    CHECK((layer.bias.array() == -0.5).all());
}

TEST_CASE("short kernels pad with zeros and the trivial kernel is the identity") {
    LayerMap two_tap = circulant_layer(Kernel{{4.0, 5.0}, 0.0}, 4);
    Mat expect(4, 4);
    expect << 4, 5, 0, 0, 0, 4, 5, 0, 0, 0, 4, 5, 5, 0, 0, 4;
    CHECK((two_tap.weights - expect).cwiseAbs().maxCoeff() == 0.0);

    LayerMap ident = circulant_layer(Kernel{{1.0}, 0.0}, 5);
    CHECK((ident.weights - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() == 0.0);

    LayerMap pair = circulant_layer(Kernel{{0.7, 0.3}, -0.2}, 2);
    Mat expect2(2, 2);
    expect2 << 0.7, 0.3, 0.3, 0.7;
    CHECK((pair.weights - expect2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel validation") {
    CHECK_THROWS_AS(circulant_layer(Kernel{{1.0, 2.0, 3.0}, 0.0}, 2), DimensionMismatch);
    CHECK_THROWS_AS(circulant_layer(Kernel{{}, 0.0}, 3), InvalidInput);
}

TEST_CASE("is_circulant distinguishes structure") {
    CHECK(is_circulant(circulant_layer(Kernel{{0.5, 0.25, 0.25}, -1.0}, 3)));
    Mat W = Mat::Identity(3, 3);
    W(0, 1) = 0.01;
    CHECK_FALSE(is_circulant(LayerMap(W, Vec::Zero(3))));
    // Circulant weights with a non-constant bias are not a circulant layer.
    Vec b = Vec::Zero(3);
    b[2] = 0.3;
    CHECK_FALSE(is_circulant(LayerMap(Mat::Identity(3, 3), b)));
}

TEST_CASE("cone apex sits at the shared root of all rows") {
    ConeDescriptor cone = cone_of(circulant_layer(Kernel{{1.0, 0.0, 0.0}, -0.5}, 3));
    CHECK(cone.row_sum == doctest::Approx(1.0));
    for (int i = 0; i < 3; ++i) CHECK(cone.apex[i] == doctest::Approx(0.5).epsilon(1e-12));

    ConeDescriptor origin = cone_of(circulant_layer(Kernel{{1.0, 0.0, 0.0}, 0.0}, 3));
    CHECK(origin.apex.norm() == doctest::Approx(0.0));

    ConeDescriptor wide = cone_of(circulant_layer(Kernel{{0.6, 0.2, 0.2}, -1.0}, 3));
    for (int i = 0; i < 3; ++i) CHECK(wide.apex[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all plane normals make the same angle with the identity axis") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);
        LayerMap layer = random_near_identity_circulant(d, rng);
        ConeDescriptor cone = cone_of(layer);
        Vec axis = Vec::Ones(d) / std::sqrt(static_cast<double>(d));
        CHECK((cone.axis - axis).norm() < 1e-12);
        for (int i = 0; i < d; ++i) {
            Vec n = layer.weights.row(i).transpose().normalized();
            double angle = std::acos(std::clamp(n.dot(axis), -1.0, 1.0));
            CHECK(std::abs(angle - cone.half_angle) < 1e-12);
        }
    }
}

TEST_CASE("identity kernel cone geometry is exact") {
    ConeDescriptor cone = cone_of(circulant_layer(Kernel{{1.0, 0.0, 0.0}, -0.5}, 3));
    CHECK(cone.half_angle == doctest::Approx(std::acos(1.0 / std::sqrt(3.0))).epsilon(1e-12));
    CHECK(std::abs(cone.twist) < 1e-6);  // coordinate fan; only acos dust remains
}

TEST_CASE("cone_of rejects the wrong inputs") {
    Mat W = Mat::Identity(3, 3);
    W(0, 1) = 0.2;
    CHECK_THROWS_AS(cone_of(LayerMap(W, Vec::Zero(3))), NotCirculant);
    CHECK_THROWS_AS(cone_of(circulant_layer(Kernel{{1.0, -1.0}, -0.5}, 2)), ApexAtInfinity);
}

TEST_CASE("apex maps forward to zero when it is reachable") {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 40; ++trial) {
        int d = 2 + static_cast<int>(rng() % 5);
        LayerMap layer = random_near_identity_circulant(d, rng);
        ConeDescriptor cone = cone_of(layer);
        if (!in_nonneg_orthant(cone.apex, 0.0)) continue;
        CHECK(forward(layer, cone.apex).norm() < 1e-9);
    }
}

TEST_CASE("cyclic shift equivariance is exact for circulant layers") {
    CHECK(check_shift_equivariance(circulant_layer(Kernel{{1.0}, -0.3}, 4)) == 0.0);
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> taps{unif(rng), unif(rng), unif(rng)};
        LayerMap layer = circulant_layer(Kernel{taps, unif(rng)}, 5);
        CHECK(check_shift_equivariance(layer, 100, 99) < 1e-12);
    }
}

TEST_CASE("equivariance breaks once the structure is perturbed") {
    LayerMap layer = circulant_layer(Kernel{{0.8, 0.1, 0.1}, -0.4}, 3);
    LayerMap perturbed = layer;
    perturbed.weights(0, 1) += 0.05;
    CHECK(check_shift_equivariance(perturbed, 100, 5) > 1e-3);
}

TEST_CASE("identity kernel layers are fully nested") {
    NestingReport report = check_nesting(circulant_layer(Kernel{{1.0, 0.0, 0.0}, -0.5}, 3));
    CHECK(report.fully_nested);
    CHECK(report.violated_subsets.empty());
    CHECK(report.checked_subsets > 0);
}

TEST_CASE("bias-only two-node layers are fully nested for every bias") {
    for (double beta : {-0.5, -0.4, -0.3, -0.2, -0.1}) {
        NestingReport report = check_nesting(circulant_layer(Kernel{{1.0, 0.0}, beta}, 2));
        CHECK(report.fully_nested);
    }
}

TEST_CASE("a wide-angle cone violates nesting") {
    LayerMap layer = circulant_layer(Kernel{{0.34, 0.33, 0.33}, -0.1}, 3);
    NestingReport report = check_nesting(layer, 64, 0);
    CHECK_FALSE(report.fully_nested);
    CHECK_FALSE(report.violated_subsets.empty());
    // Witnesses really sit on their subset's plane intersection.
    for (const NestingViolation& v : report.violated_subsets) {
        for (int i : v.subset)
            CHECK(std::abs(layer.hyperplane(i).eval(v.witness)) < 1e-7);
    }
}

TEST_CASE("contraction sweep is clean for nested layers") {
    ContractionReport identity_report =
        check_contraction(circulant_layer(Kernel{{1.0, 0.0, 0.0}, -0.5}, 3));
    CHECK(identity_report.violations.empty());
    CHECK(identity_report.patterns_checked > 0);

    std::mt19937_64 rng(34);
    int nested_seen = 0;
    while (nested_seen < 10) {
        LayerMap layer = random_near_identity_circulant(4, rng);
        if (!check_nesting(layer, 48, 17).fully_nested) continue;
        ++nested_seen;
        CHECK(check_contraction(layer, 17).violations.empty());
    }
}

TEST_CASE("the wide-angle counterexample loses the contraction property") {
    LayerMap layer = circulant_layer(Kernel{{0.34, 0.33, 0.33}, -0.1}, 3);
    ContractionReport report = check_contraction(layer, 0);
    CHECK_FALSE(report.violations.empty());
    for (const ContractionViolation& v : report.violations) {
        CHECK(v.image_dim > v.source_dim);
        // Re-derive the dimensions from scratch for the recorded witness.
        int source_zeros = 0;
        for (int i = 0; i < 3; ++i)
            if (std::abs(v.witness[i]) <= 1e-9) ++source_zeros;
        Vec image = forward(layer, v.witness);
        int image_zeros = 0;
        for (int i = 0; i < 3; ++i)
            if (image[i] <= 1e-9) ++image_zeros;
        CHECK(v.source_dim == 3 - source_zeros);
        CHECK(v.image_dim == 3 - image_zeros);
    }
}
