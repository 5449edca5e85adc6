#include "relucone/network.hpp"

#include "relucone/circulant.hpp"
#include "relucone/dual_basis.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace relucone;
using relucone::testing::random_invertible_layer;
using relucone::testing::random_nonneg_point;

namespace {

Network bias_ladder_2d() {
    // Two-dimensional identity-kernel stack; only the bias differs per layer.
    return Network({circulant_layer(Kernel{{1.0, 0.0}, -0.5}, 2),
                    circulant_layer(Kernel{{1.0, 0.0}, -0.4}, 2),
                    circulant_layer(Kernel{{1.0, 0.0}, -0.3}, 2)});
}

}  // namespace

TEST_CASE("network construction validates the stack") {
    CHECK_THROWS_AS(Network({}), InvalidInput);
    CHECK_THROWS_AS(Network({circulant_layer(Kernel{{1.0}, 0.0}, 2),
                             circulant_layer(Kernel{{1.0}, 0.0}, 3)}),
                    DimensionMismatch);
    Network net = bias_ladder_2d();
    CHECK(net.dim() == 2);
    CHECK(net.depth() == 3);
}

TEST_CASE("a single-layer network forward reduces to the layer forward") {
    std::mt19937_64 rng(61);
    LayerMap layer = random_invertible_layer(3, rng);
    Network net({layer});
    Vec x = random_nonneg_point(3, rng);
    CHECK((net_forward(net, x) - forward(layer, x)).norm() == 0.0);
}

TEST_CASE("identity stacks accumulate their biases") {
    Network net({circulant_layer(Kernel{{1.0}, -0.2}, 4), circulant_layer(Kernel{{1.0}, -0.2}, 4),
                 circulant_layer(Kernel{{1.0}, -0.2}, 4)});
    Vec y = net_forward(net, Vec::Ones(4));
    CHECK((y - Vec::Constant(4, 0.4)).norm() < 1e-15);
}

TEST_CASE("net_forward equals the manual layer loop") {
    std::mt19937_64 rng(62);
    for (int trial = 0; trial < 30; ++trial) {
        Network net({random_invertible_layer(3, rng), random_invertible_layer(3, rng),
                     random_invertible_layer(3, rng)});
        Vec x = random_nonneg_point(3, rng);
        Vec manual = x;
        for (const LayerMap& layer : net.layers) manual = forward(layer, manual);
        CHECK((net_forward(net, x) - manual).norm() == 0.0);
    }
}

TEST_CASE("net_activations records every stage") {
    Network net = bias_ladder_2d();
    Vec x = make_vec({1.2, 0.1});
    auto acts = net_activations(net, x);
    REQUIRE(acts.size() == 4);
    CHECK((acts[0] - x).norm() == 0.0);
    for (size_t l = 0; l < 3; ++l)
        CHECK((acts[l + 1] - forward(net.layers[l], acts[l])).norm() == 0.0);
    CHECK((acts[3] - net_forward(net, x)).norm() == 0.0);
}

TEST_CASE("single-layer preimage matches the direct preimage set") {
    LayerMap layer = circulant_layer(Kernel{{1.0, 0.0}, -0.5}, 2);
    Network net({layer});
    Vec y = make_vec({0.0, 0.3});
    LayeredPreimage pre = net_preimage(net, y);
    REQUIRE(pre.stages.size() == 2);
    PreimageSet direct = preimage(layer, y);

    // Every sampled point of every input piece belongs to the direct set and
    // vice versa along the segment.
    for (const AffinePiece& piece : pre.input_pieces())
        for (const Vec& x : sample_piece(piece, 30, 3, 2.0, 1e-9))
            CHECK(preimage_contains(direct, x, 1e-7));
    for (const Vec& x : sample_preimage(direct, 50, 4, 1.0)) {
        bool covered = false;
        for (const AffinePiece& piece : pre.input_pieces())
            covered = covered || piece_contains(piece, x, 1e-7);
        CHECK(covered);
    }
}

TEST_CASE("the bias ladder maps most of the box to the zero output") {
    // Monte-Carlo measure of the preimage of (0,0) over [0, 1.5]^2.
    Network net = bias_ladder_2d();
    LayeredPreimage pre = net_preimage(net, Vec::Zero(2));
    std::mt19937_64 rng(63);
    std::uniform_real_distribution<double> unif(0.0, 1.5);
    int hits = 0;
    int covered = 0;
    const int n = 4000;
    for (int i = 0; i < n; ++i) {
        Vec x = make_vec({unif(rng), unif(rng)});
        bool maps = net_forward(net, x).lpNorm<Eigen::Infinity>() <= 1e-9;
        bool in_piece = false;
        for (const AffinePiece& piece : pre.input_pieces())
            in_piece = in_piece || piece_contains(piece, x, 1e-9);
        hits += maps ? 1 : 0;
        if (maps) covered += in_piece ? 1 : 0;
        CHECK(maps == in_piece);  // exactness, both directions
    }
    CHECK(hits > n / 2);  // the preimage covers the major part of the box
    CHECK(covered == hits);
}

TEST_CASE("strictly positive outputs pin a unique input point") {
    std::mt19937_64 rng(64);
    int done = 0;
    while (done < 20) {
        Network net({random_invertible_layer(2, rng), random_invertible_layer(2, rng)});
        Vec x0 = random_nonneg_point(2, rng);
        Vec y = net_forward(net, x0);
        auto acts = net_activations(net, x0);
        bool all_positive = true;
        for (const Vec& a : acts) all_positive = all_positive && a.minCoeff() > 1e-3;
        if (!all_positive || y.minCoeff() <= 1e-3) continue;
        ++done;
        LayeredPreimage pre = net_preimage(net, y);
        // All input pieces collapse to the same single point x0.
        REQUIRE(!pre.input_pieces().empty());
        for (const AffinePiece& piece : pre.input_pieces()) {
            CHECK(piece_dim(piece) == 0);
            CHECK((piece.base - x0).norm() < 1e-8);
        }
    }
}

TEST_CASE("sampled preimage points are sound under the network") {
    std::mt19937_64 rng(65);
    int done = 0;
    while (done < 10) {
        Network net({random_invertible_layer(2, rng, 0.3), random_invertible_layer(2, rng, 0.3)});
        Vec y = net_forward(net, random_nonneg_point(2, rng));
        LayeredPreimage pre;
        try {
            pre = net_preimage(net, y);
        } catch (const EmptyPreimage&) {
            continue;  // output reachable only outside the piece margin; skip
        }
        ++done;
        int samples_checked = 0;
        for (const AffinePiece& piece : pre.input_pieces()) {
            for (const Vec& x : sample_piece(piece, 100, 11, 4.0, 1e-9)) {
                ++samples_checked;
                CHECK((net_forward(net, x) - y).lpNorm<Eigen::Infinity>() < 1e-8);
            }
        }
        CHECK(samples_checked > 0);
    }
}

TEST_CASE("completeness on a dense plane grid") {
    // Every grid point that maps to the target must lie in some input piece.
    Network net = bias_ladder_2d();
    for (const Vec& y : {make_vec({0.0, 0.3}), make_vec({0.2, 0.0}), Vec(Vec::Zero(2))}) {
        LayeredPreimage pre = net_preimage(net, y);
        const double step = 0.01;
        for (double a = 0.0; a <= 2.0 + 1e-12; a += step) {
            for (double b = 0.0; b <= 2.0 + 1e-12; b += step) {
                Vec x = make_vec({a, b});
                if ((net_forward(net, x) - y).lpNorm<Eigen::Infinity>() > 1e-6) continue;
                bool covered = false;
                for (const AffinePiece& piece : pre.input_pieces())
                    covered = covered || piece_contains(piece, x, 1e-6);
                CHECK(covered);
            }
        }
    }
}

TEST_CASE("parent links point at the containing upstream piece") {
    Network net = bias_ladder_2d();
    LayeredPreimage pre = net_preimage(net, Vec::Zero(2));
    REQUIRE(pre.stages.size() == net.depth() + 1);
    for (size_t l = 0; l + 1 < pre.stages.size(); ++l) {
        for (const AffinePiece& piece : pre.stages[l]) {
            REQUIRE(piece.parent >= 0);
            REQUIRE(piece.parent < static_cast<int>(pre.stages[l + 1].size()));
            const AffinePiece& parent = pre.stages[l + 1][static_cast<size_t>(piece.parent)];
            for (const Vec& x : sample_piece(piece, 20, 21, 2.0, 1e-9)) {
                Vec up = forward(net.layers[l], x);
                CHECK(piece_contains(parent, up, 1e-8));
            }
        }
    }
}

TEST_CASE("zero counts never decrease along nested-stack trajectories") {
    Network net = bias_ladder_2d();
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> unif(0.0, 1.5);
    for (int trial = 0; trial < 500; ++trial) {
        Vec x = make_vec({unif(rng), unif(rng)});
        auto acts = net_activations(net, x);
        int prev_zeros = 0;
        for (size_t l = 1; l < acts.size(); ++l) {
            int zeros = 0;
            for (int i = 0; i < acts[l].size(); ++i)
                if (acts[l][i] <= 1e-12) ++zeros;
            if (l > 1) CHECK(zeros >= prev_zeros);
            prev_zeros = zeros;
        }
    }
}

TEST_CASE("unreachable outputs raise EmptyPreimage") {
    // Identity layer with positive bias: output zero would need x <= -0.5.
    Network net({LayerMap(Mat::Identity(2, 2), Vec::Constant(2, 0.5))});
    CHECK_THROWS_AS(net_preimage(net, Vec::Zero(2)), EmptyPreimage);
}

TEST_CASE("negative targets are rejected") {
    Network net = bias_ladder_2d();
    CHECK_THROWS_AS(net_preimage(net, make_vec({-0.5, 0.0})), InvalidInput);
    CHECK_THROWS_AS(net_preimage(net, Vec::Zero(3)), DimensionMismatch);
}

TEST_CASE("an absurdly small piece budget trips the guard") {
    Network net = bias_ladder_2d();
    PullbackOptions opts;
    opts.piece_budget = 2;
    CHECK_THROWS_AS(net_preimage(net, Vec::Zero(2), opts), PieceBudgetExceeded);
}
