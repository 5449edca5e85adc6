#include "relucone/piece.hpp"

#include "relucone/nnls.hpp"
#include "relucone/subsets.hpp"

#include <algorithm>
#include <cmath>

namespace relucone {
namespace {

// Stacked inequalities in coefficient space: the piece's own rows, the
// orthant rows, and optionally the scene-box rows.
void stacked_constraints(const AffinePiece& piece, double box_radius, Mat& A, Vec& b) {
    const Eigen::Index k = piece.span.cols();
    const Eigen::Index d = piece.base.size();
    const Eigen::Index m = piece.coeff_a.rows();
    const bool with_box = box_radius > 0.0;
    const Eigen::Index rows = m + d + (with_box ? d : 0);
    A.resize(rows, k);
    b.resize(rows);
    if (m > 0) {
        A.topRows(m) = piece.coeff_a;
        b.head(m) = piece.coeff_b;
    }
    A.middleRows(m, d) = -piece.span;
    b.segment(m, d) = piece.base;
    if (with_box) {
        A.bottomRows(d) = piece.span;
        b.tail(d) = Vec::Constant(d, box_radius) - piece.base;
    }
}

bool hull_inside_coordinate_plane(const AffinePiece& piece, int axis, double tol) {
    if (std::abs(piece.base[axis]) > tol) return false;
    if (piece.span.cols() == 0) return true;
    return piece.span.row(axis).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

AffinePiece make_point_piece(Vec point) {
    AffinePiece piece;
    piece.span = Mat::Zero(point.size(), 0);
    piece.coeff_a = Mat::Zero(0, 0);
    piece.coeff_b = Vec::Zero(0);
    piece.base = std::move(point);
    return piece;
}

AffinePiece make_subspace_piece(const AffineSubspace& subspace) {
    AffinePiece piece;
    piece.base = subspace.base;
    piece.span = subspace.directions;
    piece.coeff_a = Mat::Zero(0, subspace.directions.cols());
    piece.coeff_b = Vec::Zero(0);
    return piece;
}

AffineSubspace piece_hull(const AffinePiece& piece) { return AffineSubspace(piece.base, piece.span); }

bool normalize_constraints(AffinePiece& piece, double tol) {
    const Eigen::Index m = piece.coeff_a.rows();
    if (m == 0) return true;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index r = 0; r < m; ++r) {
        double nrm = piece.coeff_a.row(r).norm();
        if (nrm <= 1e-13) {
            if (piece.coeff_b[r] < -tol) return false;  // 0 <= negative: empty
            continue;                                   // vacuous row
        }
        kept.push_back(r);
    }
    Mat A(static_cast<Eigen::Index>(kept.size()), piece.coeff_a.cols());
    Vec b(static_cast<Eigen::Index>(kept.size()));
    for (size_t i = 0; i < kept.size(); ++i) {
        double nrm = piece.coeff_a.row(kept[i]).norm();
        A.row(static_cast<Eigen::Index>(i)) = piece.coeff_a.row(kept[i]) / nrm;
        b[static_cast<Eigen::Index>(i)] = piece.coeff_b[kept[i]] / nrm;
    }
    piece.coeff_a = std::move(A);
    piece.coeff_b = std::move(b);
    return true;
}

bool piece_contains(const AffinePiece& piece, const Vec& x, double tol) {
    require_same_dim(x, piece.base, "piece_contains");
    if (!in_nonneg_orthant(x, tol)) return false;
    Vec delta = x - piece.base;
    Vec c;
    if (piece.span.cols() > 0) {
        c = piece.span.transpose() * delta;
        delta -= piece.span * c;
    } else {
        c = Vec::Zero(0);
    }
    if (delta.norm() > tol) return false;
    for (Eigen::Index r = 0; r < piece.coeff_a.rows(); ++r)
        if (piece.coeff_a.row(r).dot(c) > piece.coeff_b[r] + tol) return false;
    return true;
}

bool piece_feasible(const AffinePiece& piece, double margin, double feas_tol) {
    Mat A;
    Vec b;
    stacked_constraints(piece, /*box_radius=*/0.0, A, b);
    if (margin > 0.0 && piece.coeff_a.rows() > 0) b.head(piece.coeff_a.rows()).array() -= margin;
    return polyhedron_feasible(A, b, feas_tol);
}

std::vector<Vec> sample_piece(const AffinePiece& piece, int count, std::uint64_t seed,
                              double box_radius, double feas_tol) {
    Mat A;
    Vec b;
    stacked_constraints(piece, box_radius, A, b);
    const Eigen::Index k = piece.span.cols();
    if (k == 0) {
        std::vector<Vec> out;
        if ((b.array() >= -feas_tol).all())
            out.assign(static_cast<size_t>(count), piece.base);
        return out;
    }
    auto start = polyhedron_point(A, b, feas_tol);
    if (!start) return {};
    std::vector<Vec> coeffs = polyhedron_walk(A, b, *start, count, seed);
    std::vector<Vec> out;
    out.reserve(coeffs.size());
    for (const Vec& c : coeffs) out.push_back(piece.base + piece.span * c);
    return out;
}

std::optional<AffinePiece> slice_by_face(const AffinePiece& piece,
                                         const std::vector<int>& zero_set,
                                         const Tolerances& tols) {
    const int d = static_cast<int>(piece.base.size());
    if (zero_set.empty()) {
        AffinePiece copy = piece;
        copy.zero_tag.clear();
        return copy;
    }
    std::vector<bool> zeroed(static_cast<size_t>(d), false);
    for (int i : zero_set) {
        if (i < 0 || i >= d) throw InvalidInput("slice_by_face: index out of range");
        zeroed[static_cast<size_t>(i)] = true;
    }
    Mat face_dirs(d, d - static_cast<int>(zero_set.size()));
    int col = 0;
    for (int i = 0; i < d; ++i) {
        if (!zeroed[static_cast<size_t>(i)]) {
            face_dirs.col(col).setZero();
            face_dirs(i, col) = 1.0;
            ++col;
        }
    }
    AffineSubspace face(Vec::Zero(d), std::move(face_dirs));
    auto met = affine_intersect(piece_hull(piece), face, tols);
    if (!met) return std::nullopt;

    AffinePiece out;
    out.base = met->base;
    out.span = met->directions;
    // Transport the inherited constraints into the slice's coordinates.
    Mat carry = piece.span.transpose() * out.span;              // k_old x k_new
    Vec shift = piece.span.transpose() * (out.base - piece.base);
    out.coeff_a = piece.coeff_a * carry;
    out.coeff_b = piece.coeff_b - piece.coeff_a * shift;
    out.zero_tag = zero_set;
    out.layer = piece.layer;
    out.parent = piece.parent;
    if (!normalize_constraints(out, tols.membership)) return std::nullopt;
    return out;
}

std::vector<AffinePiece> face_slices(const AffinePiece& piece, double margin,
                                     const Tolerances& tols) {
    const int d = static_cast<int>(piece.base.size());
    std::vector<AffinePiece> out;
    std::vector<std::vector<int>> dead;
    for (const auto& zero_set : subsets_by_cardinality(d, /*include_empty=*/true)) {
        bool doomed = false;
        for (const auto& dz : dead) {
            if (subset_contains(zero_set, dz)) {
                doomed = true;
                break;
            }
        }
        if (doomed) continue;
        auto slice = slice_by_face(piece, zero_set, tols);
        if (!slice) {
            dead.push_back(zero_set);
            continue;
        }
        // Points with further structural zeros belong to the superset tag.
        bool deferred = false;
        for (int m = 0; m < d && !deferred; ++m) {
            if (std::find(zero_set.begin(), zero_set.end(), m) != zero_set.end()) continue;
            if (hull_inside_coordinate_plane(*slice, m, tols.membership)) deferred = true;
        }
        if (deferred) continue;
        if (!piece_feasible(*slice, margin, tols.membership)) continue;
        out.push_back(std::move(*slice));
    }
    return out;
}

LayerPullback::LayerPullback(const LayerMap& layer_map, const Tolerances& tols)
    : layer(layer_map), lu(layer_map.weights), basis(build_dual_basis(layer_map, tols)) {}

std::optional<AffinePiece> pull_back(const LayerPullback& pullback, const AffinePiece& out_slice,
                                     const Tolerances& tols) {
    const int d = static_cast<int>(out_slice.base.size());
    const Eigen::Index k_out = out_slice.span.cols();
    const Eigen::Index p = static_cast<Eigen::Index>(out_slice.zero_tag.size());

    AffinePiece in_piece;
    in_piece.base = pullback.invert(out_slice.base);
    in_piece.zero_tag = out_slice.zero_tag;

    // Span of the pulled-back hull plus the cone directions for the zero tag.
    Mat columns(d, k_out + p);
    if (k_out > 0) columns.leftCols(k_out) = pullback.lu.solve(out_slice.span);
    for (Eigen::Index j = 0; j < p; ++j)
        columns.col(k_out + j) = pullback.basis.vectors.col(out_slice.zero_tag[static_cast<size_t>(j)]);

    if (k_out + p == 0) {
        in_piece.span = Mat::Zero(d, 0);
        in_piece.coeff_a = out_slice.coeff_a;
        in_piece.coeff_b = out_slice.coeff_b;
    } else {
        Mat span = orthonormalize_columns(columns, tols.eps_rank);
        if (span.cols() != columns.cols())
            throw NoSolution("pull_back: pulled-back directions collapsed; arrangement is degenerate");
        Mat mix = span.transpose() * columns;  // square, invertible by construction
        Mat mix_inv = mix.fullPivLu().inverse();

        // Inherited rows, cone nonnegativity, and the output-space orthant:
        // the source activities q = slice(c) must stay nonnegative, which the
        // input-space clip of the new piece does not imply on its own.
        const Eigen::Index m = out_slice.coeff_a.rows();
        Mat G = Mat::Zero(m + p + d, k_out + p);
        Vec h = Vec::Zero(m + p + d);
        if (m > 0) {
            G.block(0, 0, m, k_out) = out_slice.coeff_a;
            h.head(m) = out_slice.coeff_b;
        }
        G.block(m, k_out, p, p) = -Mat::Identity(p, p);
        if (k_out > 0) G.block(m + p, 0, d, k_out) = -out_slice.span;
        h.tail(d) = out_slice.base;

        in_piece.span = std::move(span);
        in_piece.coeff_a = G * mix_inv;
        in_piece.coeff_b = std::move(h);
    }

    // Cell signature of the layer this piece feeds: the cone walks to the
    // negative side of each tagged plane, every other activity stays positive.
    in_piece.signature.assign(static_cast<size_t>(d), Sign::Plus);
    for (int i : out_slice.zero_tag) in_piece.signature[static_cast<size_t>(i)] = Sign::Minus;

    if (!normalize_constraints(in_piece, tols.membership)) return std::nullopt;
    return in_piece;
}

std::optional<AffinePiece> piece_intersection(const AffinePiece& a, const AffinePiece& b,
                                              const Tolerances& tols) {
    auto met = affine_intersect(piece_hull(a), piece_hull(b), tols);
    if (!met) return std::nullopt;

    AffinePiece out;
    out.base = met->base;
    out.span = met->directions;
    const Eigen::Index k = out.span.cols();

    auto carry_into = [&](const AffinePiece& src, Mat& A, Vec& bv) {
        Mat carry = src.span.transpose() * out.span;
        Vec shift = src.span.transpose() * (out.base - src.base);
        A = src.coeff_a * carry;
        bv = src.coeff_b - src.coeff_a * shift;
    };
    Mat Aa, Ab;
    Vec ba, bb;
    carry_into(a, Aa, ba);
    carry_into(b, Ab, bb);
    out.coeff_a = Mat(Aa.rows() + Ab.rows(), k);
    out.coeff_b = Vec(Aa.rows() + Ab.rows());
    if (Aa.rows() > 0) {
        out.coeff_a.topRows(Aa.rows()) = Aa;
        out.coeff_b.head(Aa.rows()) = ba;
    }
    if (Ab.rows() > 0) {
        out.coeff_a.bottomRows(Ab.rows()) = Ab;
        out.coeff_b.tail(Ab.rows()) = bb;
    }
    if (!normalize_constraints(out, tols.membership)) return std::nullopt;

    // Opposing unit rows (n.c <= t alongside -n.c <= -t) pin the shared set
    // onto the face n.c = t; collapse every such pair so the span reports the
    // affine hull of the common points, not the hull intersection it started
    // from. Adjacent pieces cut from one hyperplane meet exactly this way.
    std::vector<Eigen::Index> eq_rows;
    {
        const Eigen::Index m = out.coeff_a.rows();
        std::vector<bool> used(static_cast<size_t>(m), false);
        for (Eigen::Index i = 0; i < m; ++i) {
            if (used[static_cast<size_t>(i)]) continue;
            for (Eigen::Index j = i + 1; j < m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                if ((out.coeff_a.row(i) + out.coeff_a.row(j)).norm() <= 1e-9 &&
                    std::abs(out.coeff_b[i] + out.coeff_b[j]) <= tols.membership) {
                    eq_rows.push_back(i);
                    used[static_cast<size_t>(i)] = used[static_cast<size_t>(j)] = true;
                    break;
                }
            }
        }
    }
    if (!eq_rows.empty()) {
        Mat eq(static_cast<Eigen::Index>(eq_rows.size()), k);
        Vec rhs(static_cast<Eigen::Index>(eq_rows.size()));
        for (size_t r = 0; r < eq_rows.size(); ++r) {
            eq.row(static_cast<Eigen::Index>(r)) = out.coeff_a.row(eq_rows[r]);
            rhs[static_cast<Eigen::Index>(r)] = out.coeff_b[eq_rows[r]];
        }
        Eigen::JacobiSVD<Mat> svd(eq, Eigen::ComputeThinU | Eigen::ComputeFullV);
        Vec c0 = svd.solve(rhs);
        if ((eq * c0 - rhs).norm() > tols.eps_solve) return std::nullopt;
        Eigen::Index rank = 0;
        const double cutoff = tols.eps_rank * std::max(1.0, svd.singularValues()[0]);
        for (Eigen::Index s = 0; s < svd.singularValues().size(); ++s)
            if (svd.singularValues()[s] > cutoff) ++rank;
        Mat nullspace = svd.matrixV().rightCols(k - rank);
        Mat carried = out.coeff_a;
        out.base += out.span * c0;
        out.span = out.span * nullspace;
        out.coeff_a = carried * nullspace;
        out.coeff_b -= carried * c0;
        if (!normalize_constraints(out, tols.membership)) return std::nullopt;
    }

    if (!piece_feasible(out, /*margin=*/0.0, tols.membership)) return std::nullopt;
    return out;
}

}  // namespace relucone
