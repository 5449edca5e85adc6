#include "relucone/circulant.hpp"

#include "relucone/nnls.hpp"
#include "relucone/subsets.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace relucone {
namespace {

Vec cyclic_shift_up(const Vec& x) {
    const int d = static_cast<int>(x.size());
    Vec out(d);
    for (int i = 0; i < d; ++i) out[i] = x[(i + 1) % d];
    return out;
}

// Nonnegative feasibility of: (E a)_i = -x_i on `eq_rows`, and
// (E a)_r - t_r = -x_r with slack t_r >= 0 on every other row.
bool span_reaches(const Mat& duals, const Vec& x, const std::vector<bool>& is_eq_row,
                  double feas_tol) {
    const int d = static_cast<int>(x.size());
    const Eigen::Index p = duals.cols();
    int slack_count = 0;
    for (int r = 0; r < d; ++r)
        if (!is_eq_row[static_cast<size_t>(r)]) ++slack_count;
    Mat A(d, p + slack_count);
    if (p > 0) A.leftCols(p) = duals;
    int col = static_cast<int>(p);
    for (int r = 0; r < d; ++r) {
        if (!is_eq_row[static_cast<size_t>(r)]) {
            A.col(col).setZero();
            A(r, col) = -1.0;
            ++col;
        }
    }
    return cone_feasible(A, -x, feas_tol);
}

}  // namespace

LayerMap circulant_layer(const Kernel& kernel, int d) {
    if (d < kMinDim || d > kMaxDim)
        throw InvalidInput("circulant_layer: dimension must lie in [2, 32]");
    const int k = static_cast<int>(kernel.taps.size());
    if (k < 1) throw InvalidInput("circulant_layer: kernel needs at least one tap");
    if (k > d)
        throw DimensionMismatch("circulant_layer: kernel support exceeds the dimension");
    for (double t : kernel.taps)
        if (!std::isfinite(t)) throw InvalidInput("circulant_layer: taps must be finite");
    if (!std::isfinite(kernel.bias)) throw InvalidInput("circulant_layer: bias must be finite");

    Mat W = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < k; ++j) W(i, (i + j) % d) = kernel.taps[static_cast<size_t>(j)];
    Vec b = Vec::Constant(d, kernel.bias);
    return LayerMap(std::move(W), std::move(b));
}

bool is_circulant(const LayerMap& layer, double tol) {
    const int d = layer.dim();
    for (int i = 0; i < d; ++i) {
        if (std::abs(layer.bias[i] - layer.bias[0]) > tol) return false;
        for (int j = 0; j < d; ++j)
            if (std::abs(layer.weights(i, j) - layer.weights((i + 1) % d, (j + 1) % d)) > tol)
                return false;
    }
    return true;
}

ConeDescriptor cone_of(const LayerMap& layer, const Tolerances& tols) {
    if (!is_circulant(layer, 1e-9))
        throw NotCirculant("cone_of: layer weights are not circulant");
    const int d = layer.dim();
    const double row_sum = layer.weights.row(0).sum();
    if (std::abs(row_sum) < tols.eps_rank)
        throw ApexAtInfinity("cone_of: zero row sum pushes the apex to infinity");

    ConeDescriptor cone;
    cone.row_sum = row_sum;
    cone.apex = Vec::Constant(d, -layer.bias[0] / row_sum);
    cone.axis = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));

    double angle0 = 0.0;
    for (int i = 0; i < d; ++i) {
        Vec w = layer.weights.row(i).transpose();
        double c = w.dot(cone.axis) / w.norm();
        double angle = std::acos(std::clamp(c, -1.0, 1.0));
        if (i == 0)
            angle0 = angle;
        else if (std::abs(angle - angle0) > 1e-9)
            throw NotCirculant("cone_of: plane-to-axis angles are not identical");
    }
    cone.half_angle = angle0;

    // Twist: angle of the first normal against the first coordinate direction
    // once both are projected into the axis-orthogonal subspace.
    Vec w0 = layer.weights.row(0).transpose();
    Vec pw = w0 - cone.axis * cone.axis.dot(w0);
    Vec e0 = Vec::Zero(d);
    e0[0] = 1.0;
    Vec pe = e0 - cone.axis * cone.axis.dot(e0);
    if (pw.norm() <= tols.eps_rank || pe.norm() <= tols.eps_rank) {
        cone.twist = 0.0;
    } else {
        double c = pw.dot(pe) / (pw.norm() * pe.norm());
        cone.twist = std::acos(std::clamp(c, -1.0, 1.0));
    }
    return cone;
}

double check_shift_equivariance(const LayerMap& layer, int trials, std::uint64_t seed) {
    const int d = layer.dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    double worst = 0.0;
    Vec x(d);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < d; ++i) x[i] = unif(rng);
        Vec lhs = forward(layer, cyclic_shift_up(x));
        Vec rhs = cyclic_shift_up(forward(layer, x));
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

NestingReport check_nesting(const LayerMap& layer, int samples_per_subset, std::uint64_t seed,
                            const NestingOptions& opts) {
    const int d = layer.dim();
    if (d > 12) throw InvalidInput("check_nesting: dimension capped at 12");
    if (samples_per_subset < 1) throw InvalidInput("check_nesting: need at least one sample");

    DualBasis basis = build_dual_basis(layer);
    std::vector<Hyperplane> planes;
    for (int i = 0; i < d; ++i) planes.push_back(layer.hyperplane(i));

    const double R = opts.box_radius;
    NestingReport report;

    // Exact range-bounded grip check, one per plane: within the witness box
    // the plane must keep its matching coordinate facet {x_m = 0} on the
    // nonpositive side. A crossing means facet points map off their
    // coordinate subset (the face dimension can grow under the layer), which
    // is precisely where nesting ceases. The extrema of a linear functional
    // over a box face are closed-form, so no sampling is involved.
    for (int m = 0; m < d; ++m) {
        double hi = layer.bias[m];
        double lo = layer.bias[m];
        for (int j = 0; j < d; ++j) {
            if (j == m) continue;
            hi += R * std::max(0.0, layer.weights(m, j));
            lo += R * std::min(0.0, layer.weights(m, j));
        }
        if (hi <= opts.feas_tol) continue;
        Vec top = Vec::Zero(d);
        Vec bottom = Vec::Zero(d);
        for (int j = 0; j < d; ++j) {
            if (j == m) continue;
            if (layer.weights(m, j) > 0.0)
                top[j] = R;
            else if (layer.weights(m, j) < 0.0)
                bottom[j] = R;
        }
        // Witness on the crossing itself when the facet straddles the plane;
        // otherwise the whole facet sits on the positive side and its least
        // positive corner stands in.
        Vec witness = bottom;
        if (lo <= 0.0 && hi > lo) witness += (-lo / (hi - lo)) * (top - bottom);
        report.violated_subsets.push_back({{m}, witness, m});
        report.fully_nested = false;
    }

    auto subsets = subsets_by_cardinality(d, /*include_empty=*/false);
    std::uint64_t subset_counter = 0;
    for (const auto& subset : subsets) {
        ++subset_counter;
        ++report.checked_subsets;
        const int p = static_cast<int>(subset.size());

        std::vector<Hyperplane> chosen;
        for (int i : subset) chosen.push_back(planes[static_cast<size_t>(i)]);
        AffineSubspace meet = [&]() -> AffineSubspace {
            return intersect_planes(chosen);
        }();

        // Witnesses live on the intersection inside [0, R]^d.
        const Eigen::Index k = meet.directions.cols();
        Mat box_a(2 * d, k);
        Vec box_b(2 * d);
        box_a.topRows(d) = -meet.directions;
        box_b.head(d) = meet.base;
        box_a.bottomRows(d) = meet.directions;
        box_b.tail(d) = Vec::Constant(d, R) - meet.base;
        auto start = polyhedron_point(box_a, box_b, opts.feas_tol);
        if (!start) {
            ++report.vacuous_subsets;
            continue;
        }
        std::vector<Vec> coeffs =
            polyhedron_walk(box_a, box_b, *start, samples_per_subset, seed ^ (subset_counter * 0x9e3779b97f4a7c15ULL));

        Mat duals(d, p);
        for (int i = 0; i < p; ++i) duals.col(i) = basis.vectors.col(subset[static_cast<size_t>(i)]);

        std::vector<bool> in_subset(static_cast<size_t>(d), false);
        for (int i : subset) in_subset[static_cast<size_t>(i)] = true;

        bool violated = false;
        for (const Vec& c : coeffs) {
            Vec x = meet.base;
            if (k > 0) x += meet.directions * c;
            const double ftol = opts.feas_tol * std::max(1.0, x.norm());

            // The span must reach the coordinate subset with matching indices.
            if (!span_reaches(duals, x, in_subset, ftol)) {
                report.violated_subsets.push_back({subset, x, -1});
                violated = true;
                break;
            }
            // ... and must stay clear of every other coordinate facet.
            for (int m = 0; m < d && !violated; ++m) {
                if (in_subset[static_cast<size_t>(m)]) continue;
                std::vector<bool> facet_eq(static_cast<size_t>(d), false);
                facet_eq[static_cast<size_t>(m)] = true;
                if (span_reaches(duals, x, facet_eq, ftol)) {
                    report.violated_subsets.push_back({subset, x, m});
                    violated = true;
                }
            }
            if (violated) break;
        }
        if (violated) report.fully_nested = false;
    }
    return report;
}

ContractionReport check_contraction(const LayerMap& layer, std::uint64_t seed,
                                    const ContractionOptions& opts) {
    const int d = layer.dim();
    if (d > 8) throw InvalidInput("check_contraction: dimension capped at 8");
    const double R = opts.box_radius;

    double resolution = opts.resolution;
    while (std::pow(std::floor(R / resolution) + 1.0, d) > 2e6) resolution *= 2.0;

    ContractionReport report;
    std::set<SignPattern> seen;
    std::set<SignPattern> flagged;

    auto inspect = [&](const Vec& x) {
        int zeros_in = 0;
        for (int i = 0; i < d; ++i)
            if (x[i] <= 1e-12) ++zeros_in;
        SignPattern sig = collapse_zeros(cell_signature(layer, x));
        int zeros_out = 0;
        for (Sign s : sig)
            if (s != Sign::Plus) ++zeros_out;
        seen.insert(sig);
        const int source_dim = d - zeros_in;
        const int image_dim = d - zeros_out;
        if (image_dim > source_dim && !flagged.count(sig)) {
            flagged.insert(sig);
            report.violations.push_back({sig, source_dim, image_dim, x});
        }
    };

    // Regular grid including every coordinate face of the box.
    const long steps = static_cast<long>(std::floor(R / resolution + 1e-12)) + 1;
    std::vector<long> idx(static_cast<size_t>(d), 0);
    Vec x(d);
    while (true) {
        for (int i = 0; i < d; ++i)
            x[i] = std::min(idx[static_cast<size_t>(i)] * resolution, R);
        inspect(x);
        int k = 0;
        while (k < d) {
            if (++idx[static_cast<size_t>(k)] < steps) break;
            idx[static_cast<size_t>(k)] = 0;
            ++k;
        }
        if (k == d) break;
    }

    // Random samples pinned to each coordinate-face subset catch regions the
    // grid skips over.
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, R);
    for (const auto& subset : subsets_by_cardinality(d, /*include_empty=*/false)) {
        for (int s = 0; s < opts.jitter_per_face; ++s) {
            for (int i = 0; i < d; ++i) x[i] = unif(rng);
            for (int i : subset) x[i] = 0.0;
            inspect(x);
        }
    }

    report.patterns_checked = static_cast<int>(seen.size());
    return report;
}

}  // namespace relucone
