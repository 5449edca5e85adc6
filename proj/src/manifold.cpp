#include "relucone/manifold.hpp"

#include "relucone/dual_basis.hpp"
#include "relucone/subsets.hpp"

#include <algorithm>
#include <optional>
#include <utility>

namespace relucone {

std::vector<AffinePiece> intersect_manifold(const AffineSubspace& M, const LayerMap& layer,
                                            const Tolerances& tols) {
    const int d = static_cast<int>(layer.weights.rows());
    if (static_cast<int>(M.base.size()) != d)
        throw DimensionMismatch("intersect_manifold: manifold dimension mismatch");
    if (d > 16) throw InvalidInput("intersect_manifold: subset walk limited to dimension 16");

    std::vector<Hyperplane> planes;
    planes.reserve(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) planes.push_back(layer.hyperplane(i));

    std::vector<AffinePiece> out;
    std::vector<std::vector<int>> dead;
    for (const auto& subset : subsets_by_cardinality(d, /*include_empty=*/true)) {
        if (subset.empty()) {
            AffinePiece whole = make_subspace_piece(M);
            out.push_back(std::move(whole));
            continue;
        }
        bool doomed = false;
        for (const auto& dz : dead) {
            if (subset_contains(subset, dz)) {
                doomed = true;
                break;
            }
        }
        if (doomed) continue;

        std::vector<Hyperplane> chosen;
        chosen.reserve(subset.size());
        for (int i : subset) chosen.push_back(planes[static_cast<size_t>(i)]);
        std::optional<AffineSubspace> cut;
        try {
            cut = intersect_planes(chosen, tols);
        } catch (const EmptyIntersection&) {
            dead.push_back(subset);
            continue;
        }
        auto met = affine_intersect(M, *cut, tols);
        if (!met) {
            dead.push_back(subset);
            continue;
        }
        AffinePiece piece = make_subspace_piece(*met);
        piece.zero_tag = subset;
        out.push_back(std::move(piece));
    }
    return out;
}

std::vector<AffinePiece> backtrace_layer(const std::vector<AffinePiece>& tagged,
                                         const LayerMap& layer, const Tolerances& tols) {
    const int d = static_cast<int>(layer.weights.rows());
    DualBasis basis = build_dual_basis(layer, tols);

    std::vector<AffinePiece> out;
    for (const AffinePiece& src : tagged) {
        if (static_cast<int>(src.base.size()) != d)
            throw DimensionMismatch("backtrace_layer: piece dimension mismatch");
        const Eigen::Index q = src.span.cols();

        // Hull directions plus the cone directions for the tag. A dual that
        // already lies inside the hull widens nothing the hull does not
        // contain, so it is absorbed — which is exact only while the source
        // carries no coefficient constraints.
        Mat columns(d, q + static_cast<Eigen::Index>(src.zero_tag.size()));
        if (q > 0) columns.leftCols(q) = src.span;
        Eigen::Index used = q;
        std::vector<int> kept_tag;
        for (int i : src.zero_tag) {
            Vec dir = basis.vectors.col(i);
            Vec resid = dir;
            if (used > 0) resid -= columns.leftCols(used) * (columns.leftCols(used).transpose() * dir);
            if (resid.norm() <= 1e-8) {
                if (src.coeff_a.rows() > 0)
                    throw NoSolution(
                        "backtrace_layer: cone direction degenerates into a constrained hull");
                continue;
            }
            columns.col(used++) = dir;
            kept_tag.push_back(i);
        }
        columns.conservativeResize(Eigen::NoChange, used);
        const Eigen::Index p = static_cast<Eigen::Index>(kept_tag.size());

        AffinePiece piece;
        piece.base = src.base;
        piece.zero_tag = src.zero_tag;
        piece.layer = src.layer;
        piece.parent = src.parent;
        piece.signature.assign(static_cast<size_t>(d), Sign::Plus);
        for (int i : src.zero_tag) piece.signature[static_cast<size_t>(i)] = Sign::Minus;

        const Eigen::Index m = src.coeff_a.rows();
        if (used == 0) {
            piece.span = Mat::Zero(d, 0);
            piece.coeff_a = Mat::Zero(0, 0);
            piece.coeff_b = Vec::Zero(0);
        } else {
            Mat span = orthonormalize_columns(columns, tols.eps_rank);
            if (span.cols() != columns.cols())
                throw NoSolution("backtrace_layer: spanning directions collapsed");
            Mat mix_inv = (span.transpose() * columns).fullPivLu().inverse();

            Mat G = Mat::Zero(m + p, q + p);
            Vec h = Vec::Zero(m + p);
            if (m > 0) {
                G.block(0, 0, m, q) = src.coeff_a;
                h.head(m) = src.coeff_b;
            }
            G.block(m, q, p, p) = -Mat::Identity(p, p);
            piece.span = std::move(span);
            piece.coeff_a = G * mix_inv;
            piece.coeff_b = std::move(h);
        }

        // Clip to the closure of the cell the piece feeds: the untagged
        // activities of the layer stay nonnegative on the piece.
        {
            const Eigen::Index k = piece.span.cols();
            std::vector<int> open;
            for (int mrow = 0; mrow < d; ++mrow)
                if (std::find(piece.zero_tag.begin(), piece.zero_tag.end(), mrow) ==
                    piece.zero_tag.end())
                    open.push_back(mrow);
            const Eigen::Index extra = static_cast<Eigen::Index>(open.size());
            Mat A(piece.coeff_a.rows() + extra, k);
            Vec b(piece.coeff_b.size() + extra);
            A.topRows(piece.coeff_a.rows()) = piece.coeff_a;
            b.head(piece.coeff_b.size()) = piece.coeff_b;
            for (Eigen::Index r = 0; r < extra; ++r) {
                const auto w = layer.weights.row(open[static_cast<size_t>(r)]);
                A.row(piece.coeff_a.rows() + r) = -(w * piece.span);
                b[piece.coeff_b.size() + r] =
                    w.dot(piece.base) + layer.bias[open[static_cast<size_t>(r)]];
            }
            piece.coeff_a = std::move(A);
            piece.coeff_b = std::move(b);
        }

        if (!normalize_constraints(piece, tols.membership)) continue;
        if (!piece_feasible(piece, /*margin=*/0.0, tols.membership)) continue;
        out.push_back(std::move(piece));
    }
    return out;
}

TraceResult trace_manifold_detailed(const Network& net, const AffineSubspace& M,
                                    const PullbackOptions& opts, const Tolerances& tols) {
    TraceResult result;
    result.stages = propagate_pullback(net, make_subspace_piece(M), opts, tols);
    result.manifold.pieces = result.stages.front();
    const auto& pieces = result.manifold.pieces;
    for (size_t i = 0; i < pieces.size(); ++i) {
        for (size_t j = i + 1; j < pieces.size(); ++j) {
            auto shared = piece_intersection(pieces[i], pieces[j], tols);
            if (!shared) continue;
            PieceAdjacency adj;
            adj.a = static_cast<int>(i);
            adj.b = static_cast<int>(j);
            adj.shared = std::move(*shared);
            result.manifold.adjacency.push_back(std::move(adj));
        }
    }
    return result;
}

PiecewiseManifold trace_manifold(const Network& net, const AffineSubspace& M,
                                 const PullbackOptions& opts, const Tolerances& tols) {
    return trace_manifold_detailed(net, M, opts, tols).manifold;
}

}  // namespace relucone
