#include "relucone/piece.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace relucone;

namespace {

/// Axis-aligned square patch [lo, hi]^2: base at (lo, lo), identity span,
/// unit rows  c <= hi - lo  and  -c <= 0.
AffinePiece square_piece(double lo, double hi) {
    AffinePiece piece = make_point_piece(make_vec({lo, lo}));
    piece.span = Mat::Identity(2, 2);
    piece.coeff_a = Mat(4, 2);
    piece.coeff_a << 1, 0, 0, 1, -1, 0, 0, -1;
    piece.coeff_b = Vec(4);
    piece.coeff_b << hi - lo, hi - lo, 0, 0;
    return piece;
}

std::vector<int> sorted_tag(const AffinePiece& piece) {
    std::vector<int> tag = piece.zero_tag;
    std::sort(tag.begin(), tag.end());
    return tag;
}

}  // namespace

TEST_CASE("point pieces contain exactly their point") {
    AffinePiece piece = make_point_piece(make_vec({0.5, 0.25}));
    CHECK(piece_dim(piece) == 0);
    CHECK(piece_contains(piece, make_vec({0.5, 0.25}), 1e-9));
    CHECK_FALSE(piece_contains(piece, make_vec({0.5, 0.26}), 1e-9));
}

TEST_CASE("subspace pieces take their hull from the subspace") {
    AffineSubspace line(make_vec({0.0, 0.3}), (Mat(2, 1) << 1.0, 0.0).finished());
    AffinePiece piece = make_subspace_piece(line);
    CHECK(piece_dim(piece) == 1);
    CHECK(piece.coeff_a.rows() == 0);
    CHECK(same_subspace(piece_hull(piece), line, 1e-12));
    CHECK(piece_contains(piece, make_vec({1.7, 0.3}), 1e-9));
    // The implicit orthant clip still applies.
    CHECK_FALSE(piece_contains(piece, make_vec({-0.5, 0.3}), 1e-9));
}

TEST_CASE("normalize_constraints rescales rows and prunes vacuous ones") {
    AffinePiece piece = square_piece(0.0, 1.0);
    piece.coeff_a.row(0) << 10, 0;  // same constraint, unnormalized
    piece.coeff_b[0] = 10.0;
    Mat extra(1, 2);
    extra << 0, 0;  // vacuous, satisfiable (0 <= 1)
    piece.coeff_a.conservativeResize(5, 2);
    piece.coeff_a.row(4) = extra;
    piece.coeff_b.conservativeResize(5);
    piece.coeff_b[4] = 1.0;
    REQUIRE(normalize_constraints(piece, 1e-9));
    CHECK(piece.coeff_a.rows() == 4);
    for (Eigen::Index r = 0; r < piece.coeff_a.rows(); ++r)
        CHECK(piece.coeff_a.row(r).norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(piece_contains(piece, make_vec({1.0, 0.5}), 1e-9));
    CHECK_FALSE(piece_contains(piece, make_vec({1.1, 0.5}), 1e-9));

    AffinePiece dead = square_piece(0.0, 1.0);
    dead.coeff_a.row(0) << 0, 0;  // vacuous and contradictory: 0 <= -1
    dead.coeff_b[0] = -1.0;
    CHECK_FALSE(normalize_constraints(dead, 1e-9));
}

TEST_CASE("piece_feasible respects the orthant and the margin") {
    CHECK(piece_feasible(square_piece(0.5, 1.5), 0.0, 1e-9));
    // Entirely on the negative side of the orthant.
    CHECK_FALSE(piece_feasible(square_piece(-3.0, -2.0), 0.0, 1e-9));
    // Feasible region thinner than the requested margin.
    AffinePiece sliver = square_piece(0.0, 1e-12);
    CHECK(piece_feasible(sliver, 0.0, 1e-9));
    CHECK_FALSE(piece_feasible(sliver, 1e-6, 1e-9));
}

TEST_CASE("sample_piece is deterministic, in-box, and in-piece") {
    AffinePiece piece = square_piece(0.0, 1.5);
    auto a = sample_piece(piece, 30, 17, 2.0, 1e-9);
    auto b = sample_piece(piece, 30, 17, 2.0, 1e-9);
    REQUIRE(a.size() == 30);
    bool same = true;
    for (size_t i = 0; i < a.size(); ++i) same = same && a[i] == b[i];
    CHECK(same);
    for (const Vec& x : a) {
        CHECK(piece_contains(piece, x, 1e-7));
        CHECK(x.minCoeff() >= -1e-9);
        CHECK(x.maxCoeff() <= 2.0 + 1e-9);
    }

    AffinePiece point = make_point_piece(make_vec({0.25, 0.75}));
    auto c = sample_piece(point, 4, 1, 2.0, 1e-9);
    REQUIRE(c.size() == 4);
    for (const Vec& x : c) CHECK((x - point.base).norm() == 0.0);

    AffinePiece outside = make_point_piece(make_vec({-1.0, 0.5}));
    CHECK(sample_piece(outside, 4, 1, 2.0, 1e-9).empty());
}

TEST_CASE("slice_by_face cuts a piece down to a coordinate face") {
    AffinePiece piece = square_piece(0.0, 1.0);
    auto edge = slice_by_face(piece, {0});
    REQUIRE(edge.has_value());
    CHECK(piece_dim(*edge) == 1);
    CHECK(sorted_tag(*edge) == std::vector<int>{0});
    CHECK(piece_contains(*edge, make_vec({0.0, 0.5}), 1e-9));
    CHECK_FALSE(piece_contains(*edge, make_vec({0.0, 1.5}), 1e-9));
    CHECK_FALSE(piece_contains(*edge, make_vec({0.2, 0.5}), 1e-9));

    auto vertex = slice_by_face(piece, {0, 1});
    REQUIRE(vertex.has_value());
    CHECK(piece_dim(*vertex) == 0);
    CHECK(vertex->base.norm() < 1e-12);

    // The empty face is the piece itself with a cleared tag.
    AffinePiece tagged = piece;
    tagged.zero_tag = {1};
    auto whole = slice_by_face(tagged, {});
    REQUIRE(whole.has_value());
    CHECK(whole->zero_tag.empty());
    CHECK(piece_dim(*whole) == 2);
}

TEST_CASE("slice_by_face reports a miss for parallel hulls") {
    AffineSubspace line(make_vec({0.5, 0.3}), (Mat(2, 1) << 0.0, 1.0).finished());
    AffinePiece piece = make_subspace_piece(line);  // vertical line at x0 = 0.5
    CHECK_FALSE(slice_by_face(piece, {0}).has_value());
}

TEST_CASE("face_slices of a square touching the axes emits all four faces") {
    AffinePiece piece = square_piece(0.0, 1.0);
    auto slices = face_slices(piece, 1e-9);
    REQUIRE(slices.size() == 4);
    std::vector<std::vector<int>> tags;
    for (const auto& s : slices) tags.push_back(sorted_tag(s));
    CHECK(std::count(tags.begin(), tags.end(), std::vector<int>{}) == 1);
    CHECK(std::count(tags.begin(), tags.end(), std::vector<int>{0}) == 1);
    CHECK(std::count(tags.begin(), tags.end(), std::vector<int>{1}) == 1);
    CHECK(std::count(tags.begin(), tags.end(), std::vector<int>{0, 1}) == 1);
}

TEST_CASE("face_slices prunes faces an interior square cannot reach") {
    AffinePiece piece = square_piece(0.5, 1.5);
    auto slices = face_slices(piece, 1e-9);
    REQUIRE(slices.size() == 1);
    CHECK(slices.front().zero_tag.empty());
}

TEST_CASE("face_slices defers structural zeros to the larger tag") {
    // A segment lying inside the plane x0 = 0: every slice inherits the
    // structural zero, so only tags containing coordinate 0 may be emitted.
    AffineSubspace line(make_vec({0.0, 0.3}), (Mat(2, 1) << 0.0, 1.0).finished());
    AffinePiece piece = make_subspace_piece(line);
    auto slices = face_slices(piece, 1e-9);
    REQUIRE(slices.size() == 2);
    for (const auto& s : slices) {
        auto tag = sorted_tag(s);
        CHECK(std::find(tag.begin(), tag.end(), 0) != tag.end());
    }
}

TEST_CASE("pull_back inverts an untagged slice through the layer") {
    // Invertible non-normal layer; no rectifier activity on the slice.
    Mat W(2, 2);
    W << 1, 0, -1, 1;
    LayerMap layer(W, Vec::Zero(2));
    LayerPullback pullback(layer);

    AffinePiece out_slice = square_piece(0.5, 1.0);
    auto pulled = pull_back(pullback, out_slice);
    REQUIRE(pulled.has_value());
    CHECK(piece_dim(*pulled) == 2);
    // Sampled points must map forward into the source square.
    auto samples = sample_piece(*pulled, 40, 5, 4.0, 1e-9);
    REQUIRE(!samples.empty());
    for (const Vec& x : samples) {
        Vec q = forward(layer, x);
        CHECK(piece_contains(out_slice, q, 1e-7));
    }
}

TEST_CASE("pull_back attaches cone directions for tagged coordinates") {
    Mat W(2, 2);
    W << 1, 0, 1, -1;
    LayerMap layer(W, Vec::Zero(2));
    LayerPullback pullback(layer);

    // Output face { (t, 0) : 0 <= t <= 2 } tagged with coordinate 1.
    AffinePiece out_slice = make_point_piece(Vec::Zero(2));
    out_slice.span = (Mat(2, 1) << 1.0, 0.0).finished();
    out_slice.coeff_a = (Mat(2, 1) << 1.0, -1.0).finished();
    out_slice.coeff_b = make_vec({2.0, 0.0});
    out_slice.zero_tag = {1};

    auto pulled = pull_back(pullback, out_slice);
    REQUIRE(pulled.has_value());
    CHECK(piece_dim(*pulled) == 2);  // 1 slice direction + 1 cone direction
    // x = (t, t + alpha): the second activity x0 - x1 = -alpha stays zero
    // only after rectification, and alpha >= 0 is enforced.
    CHECK(piece_contains(*pulled, make_vec({1.0, 1.5}), 1e-9));
    CHECK_FALSE(piece_contains(*pulled, make_vec({1.0, 0.5}), 1e-9));
    for (const Vec& x : sample_piece(*pulled, 40, 9, 4.0, 1e-9)) {
        Vec q = forward(layer, x);
        CHECK(q[1] == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(q[0] >= -1e-9);
        CHECK(q[0] <= 2.0 + 1e-7);
    }
}

TEST_CASE("pull_back transports the output-space orthant clip") {
    // The slice hull extends into negative output coordinates; the pulled
    // piece must exclude inputs whose claimed source activity is negative,
    // even when those inputs are perfectly valid orthant points.
    Mat W(2, 2);
    W << 1, -1, 0, 1;
    LayerMap layer(W, Vec::Zero(2));
    LayerPullback pullback(layer);

    AffineSubspace line(make_vec({0.0, 0.5}), (Mat(2, 1) << 1.0, 0.0).finished());
    AffinePiece out_slice = make_subspace_piece(line);  // q = (t, 0.5), t unbounded
    auto pulled = pull_back(pullback, out_slice);
    REQUIRE(pulled.has_value());
    // x*(t) = (t + 0.5, 0.5); t >= 0 must be enforced by the transported clip.
    CHECK(piece_contains(*pulled, make_vec({0.7, 0.5}), 1e-9));   // t = 0.2
    CHECK_FALSE(piece_contains(*pulled, make_vec({0.2, 0.5}), 1e-9));  // t = -0.3
}

TEST_CASE("pull_back reports an empty transported piece as nullopt") {
    LayerMap layer(Mat::Identity(2, 2), Vec::Zero(2));
    LayerPullback pullback(layer);
    AffinePiece out_slice = square_piece(0.5, 1.0);
    out_slice.coeff_a.conservativeResize(5, 2);
    out_slice.coeff_a.row(4) << 0, 0;  // vacuous contradiction: 0 <= -1
    out_slice.coeff_b.conservativeResize(5);
    out_slice.coeff_b[4] = -1.0;
    CHECK_FALSE(pull_back(pullback, out_slice).has_value());
}

TEST_CASE("piece_intersection finds the shared edge of adjacent squares") {
    AffinePiece left = square_piece(0.0, 1.0);
    AffinePiece right = square_piece(0.0, 1.0);
    right.base = make_vec({1.0, 0.0});
    auto shared = piece_intersection(left, right);
    REQUIRE(shared.has_value());
    CHECK(piece_dim(*shared) == 1);
    CHECK(piece_contains(*shared, make_vec({1.0, 0.5}), 1e-9));
    CHECK_FALSE(piece_contains(*shared, make_vec({0.9, 0.5}), 1e-9));

    AffinePiece far = square_piece(0.0, 1.0);
    far.base = make_vec({5.0, 5.0});
    CHECK_FALSE(piece_intersection(left, far).has_value());
}

TEST_CASE("layer pullback inverts the affine part") {
    std::mt19937_64 rng(55);
    LayerMap layer = relucone::testing::random_invertible_layer(3, rng);
    LayerPullback pullback(layer);
    Vec x = relucone::testing::random_nonneg_point(3, rng);
    Vec q = layer.weights * x + layer.bias;
    CHECK((pullback.invert(q) - x).norm() < 1e-10);
}
