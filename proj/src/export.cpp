#include "relucone/export.hpp"

#include "relucone/nnls.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <utility>

namespace relucone {
namespace {

using nlohmann::json;

constexpr double kClipTol = 1e-7;

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), pattern, value);
    return buf;
}

/// Inequality rows A c <= b over the piece's span coefficients: the piece's
/// own rows, the orthant clip, and (optionally) the scene-box ceiling.
void clip_rows(const AffinePiece& piece, double box_radius, bool with_box, Mat& A, Vec& b) {
    const Eigen::Index k = piece.span.cols();
    const Eigen::Index d = piece.base.size();
    const Eigen::Index m = piece.coeff_a.rows();
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

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool empty = false;
};

Interval interval_of(const Mat& A, const Vec& b) {
    Interval iv;
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        const double a = A(r, 0);
        if (a > kClipTol) {
            iv.hi = std::min(iv.hi, b[r] / a);
        } else if (a < -kClipTol) {
            iv.lo = std::max(iv.lo, b[r] / a);
        } else if (b[r] < -1e-9) {
            iv.empty = true;
            return iv;
        }
    }
    if (iv.lo > iv.hi + kClipTol) iv.empty = true;
    return iv;
}

std::vector<Vec> polygon_vertices(const Mat& A, const Vec& b) {
    std::vector<Vec> verts;
    const Eigen::Index n = A.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Eigen::Matrix2d S;
            S << A(i, 0), A(i, 1), A(j, 0), A(j, 1);
            const double det = S.determinant();
            if (std::abs(det) < 1e-12) continue;
            Eigen::Vector2d rhs(b[i], b[j]);
            Eigen::Vector2d c = S.inverse() * rhs;
            if (!c.allFinite()) continue;
            if (((A * c).array() > b.array() + kClipTol).any()) continue;
            bool dup = false;
            for (const Vec& v : verts) {
                if ((v - Vec(c)).norm() < 1e-7) {
                    dup = true;
                    break;
                }
            }
            if (!dup) verts.emplace_back(c);
        }
    }
    if (verts.size() < 3) return verts;
    Vec center = Vec::Zero(2);
    for (const Vec& v : verts) center += v;
    center /= static_cast<double>(verts.size());
    std::sort(verts.begin(), verts.end(), [&](const Vec& p, const Vec& q) {
        const double ap = std::atan2(p[1] - center[1], p[0] - center[0]);
        const double aq = std::atan2(q[1] - center[1], q[0] - center[0]);
        if (ap != aq) return ap < aq;
        return (p - center).norm() < (q - center).norm();
    });
    return verts;
}

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vec vec_from_json(const json& arr) {
    Vec v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    return v;
}

void write_text(const std::string& path, const std::string& text, const char* who) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(std::string(who) + ": cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error(std::string(who) + ": write to '" + path + "' failed");
}

}  // namespace

std::string kind_name(ElementKind kind) {
    switch (kind) {
        case ElementKind::Point: return "point";
        case ElementKind::Segment: return "segment";
        case ElementKind::Polygon: return "polygon";
        case ElementKind::Ray: return "ray";
    }
    throw InvalidInput("kind_name: unknown element kind");
}

std::string role_name(ElementRole role) {
    switch (role) {
        case ElementRole::Plane: return "plane";
        case ElementRole::Preimage: return "preimage";
        case ElementRole::ManifoldPiece: return "manifold-piece";
        case ElementRole::FlowLine: return "flow-line";
    }
    throw InvalidInput("role_name: unknown element role");
}

ElementKind kind_from_name(const std::string& name) {
    if (name == "point") return ElementKind::Point;
    if (name == "segment") return ElementKind::Segment;
    if (name == "polygon") return ElementKind::Polygon;
    if (name == "ray") return ElementKind::Ray;
    throw ConfigError("unknown element kind '" + name + "'");
}

ElementRole role_from_name(const std::string& name) {
    if (name == "plane") return ElementRole::Plane;
    if (name == "preimage") return ElementRole::Preimage;
    if (name == "manifold-piece") return ElementRole::ManifoldPiece;
    if (name == "flow-line") return ElementRole::FlowLine;
    throw ConfigError("unknown element role '" + name + "'");
}

std::vector<ExportElement> piece_elements(const AffinePiece& piece, ElementRole role,
                                          double box_radius, const Tolerances& tols) {
    if (box_radius <= 0.0) throw InvalidInput("piece_elements: box radius must be positive");
    const Eigen::Index k = piece.span.cols();

    ExportElement elem;
    elem.role = role;
    elem.layer = piece.layer;
    elem.piece = piece.id;

    auto inside_box = [&](const Vec& x) {
        return x.minCoeff() >= -kClipTol && x.maxCoeff() <= box_radius + kClipTol;
    };

    if (k == 0) {
        Mat A;
        Vec b;
        clip_rows(piece, box_radius, true, A, b);
        if ((b.array() < -1e-9).any() || !inside_box(piece.base)) return {};
        elem.kind = ElementKind::Point;
        elem.vertices.push_back(piece.base);
        return {std::move(elem)};
    }

    if (k == 1) {
        Mat A_free, A_box;
        Vec b_free, b_box;
        clip_rows(piece, box_radius, false, A_free, b_free);
        clip_rows(piece, box_radius, true, A_box, b_box);
        Interval free_iv = interval_of(A_free, b_free);
        Interval box_iv = interval_of(A_box, b_box);
        if (free_iv.empty || box_iv.empty) return {};
        const bool open_hi = !std::isfinite(free_iv.hi);
        const bool open_lo = !std::isfinite(free_iv.lo);
        Vec p0 = piece.base + piece.span * Vec::Constant(1, box_iv.lo);
        Vec p1 = piece.base + piece.span * Vec::Constant(1, box_iv.hi);
        if ((p1 - p0).norm() < 1e-9) {
            elem.kind = ElementKind::Point;
            elem.vertices.push_back(std::move(p0));
            return {std::move(elem)};
        }
        if (open_hi != open_lo) {
            elem.kind = ElementKind::Ray;
            elem.direction = (open_hi ? 1.0 : -1.0) * piece.span.col(0);
            if (open_lo) std::swap(p0, p1);  // vertices[0] is the bounded end
        } else {
            elem.kind = ElementKind::Segment;
        }
        elem.vertices.push_back(std::move(p0));
        elem.vertices.push_back(std::move(p1));
        return {std::move(elem)};
    }

    if (k == 2) {
        Mat A;
        Vec b;
        clip_rows(piece, box_radius, true, A, b);
        std::vector<Vec> coeffs = polygon_vertices(A, b);
        if (coeffs.empty()) return {};
        std::vector<Vec> verts;
        verts.reserve(coeffs.size());
        for (const Vec& c : coeffs) verts.push_back(piece.base + piece.span * c);
        if (verts.size() == 1) {
            elem.kind = ElementKind::Point;
        } else if (verts.size() == 2) {
            elem.kind = ElementKind::Segment;
        } else {
            elem.kind = ElementKind::Polygon;
            // Deterministic start: rotate the cycle to the lexicographically
            // smallest vertex.
            size_t first = 0;
            for (size_t i = 1; i < verts.size(); ++i) {
                for (Eigen::Index c = 0; c < verts[i].size(); ++c) {
                    const double diff = verts[i][c] - verts[first][c];
                    if (diff < -1e-12) {
                        first = i;
                        break;
                    }
                    if (diff > 1e-12) break;
                }
            }
            std::rotate(verts.begin(), verts.begin() + static_cast<std::ptrdiff_t>(first),
                        verts.end());
        }
        elem.vertices = std::move(verts);
        return {std::move(elem)};
    }

    // Higher-dimensional piece: represent by one interior point of its
    // box-truncated body.
    Mat A;
    Vec b;
    clip_rows(piece, box_radius, true, A, b);
    auto c = polyhedron_point(A, b, tols.membership);
    if (!c) return {};
    elem.kind = ElementKind::Point;
    elem.vertices.push_back(piece.base + piece.span * *c);
    return {std::move(elem)};
}

std::optional<ExportElement> plane_element(const Hyperplane& plane, int layer, double box_radius,
                                           const Tolerances& tols) {
    const Eigen::Index d = plane.normal.size();
    const double nn = plane.normal.squaredNorm();
    AffinePiece piece;
    piece.base = -(plane.offset / nn) * plane.normal;
    Mat proj = Mat::Identity(d, d) - plane.normal * plane.normal.transpose() / nn;
    piece.span = orthonormalize_columns(proj, tols.eps_rank);
    piece.coeff_a = Mat::Zero(0, piece.span.cols());
    piece.coeff_b = Vec::Zero(0);
    piece.layer = layer;
    auto elems = piece_elements(piece, ElementRole::Plane, box_radius, tols);
    if (elems.empty()) return std::nullopt;
    ExportElement elem = std::move(elems.front());
    // The exported plane is its box-clipped body: a line that leaves the box
    // on one side only is still the finite segment inside the box, and both
    // clipped endpoints are already in the vertex list.
    if (elem.kind == ElementKind::Ray) {
        elem.kind = ElementKind::Segment;
        elem.direction = Vec();
    }
    return elem;
}

std::string to_json_text(const GeometryExport& g) {
    json root;
    root["schema"] = 1;
    root["dimension"] = g.dimension;
    root["box_radius"] = g.box_radius;
    json elems = json::array();
    for (const ExportElement& e : g.elements) {
        json je;
        je["kind"] = kind_name(e.kind);
        je["role"] = role_name(e.role);
        je["layer"] = e.layer;
        je["piece"] = e.piece;
        je["group"] = e.group;
        json verts = json::array();
        for (const Vec& v : e.vertices) verts.push_back(vec_to_json(v));
        je["vertices"] = verts;
        if (e.direction.size() > 0) je["direction"] = vec_to_json(e.direction);
        elems.push_back(std::move(je));
    }
    root["elements"] = std::move(elems);
    return root.dump(2) + "\n";
}

GeometryExport from_json_text(const std::string& text) {
    try {
        json root = json::parse(text);
        if (!root.contains("schema") || root["schema"].get<int>() != 1)
            throw ConfigError("geometry import: unsupported or missing schema version");
        GeometryExport g;
        g.dimension = root.at("dimension").get<int>();
        g.box_radius = root.at("box_radius").get<double>();
        for (const json& je : root.at("elements")) {
            ExportElement e;
            e.kind = kind_from_name(je.at("kind").get<std::string>());
            e.role = role_from_name(je.at("role").get<std::string>());
            e.layer = je.at("layer").get<int>();
            e.piece = je.at("piece").get<int>();
            e.group = je.at("group").get<int>();
            for (const json& jv : je.at("vertices")) e.vertices.push_back(vec_from_json(jv));
            if (je.contains("direction")) e.direction = vec_from_json(je["direction"]);
            g.elements.push_back(std::move(e));
        }
        return g;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("geometry import: malformed JSON: ") + ex.what());
    }
}

void export_json(const GeometryExport& g, const std::string& path) {
    write_text(path, to_json_text(g), "export_json");
}

GeometryExport import_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("import_json: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string to_obj_text(const GeometryExport& g) {
    if (g.dimension != 3)
        throw UnsupportedProjection("to_obj_text: OBJ output requires a 3-D scene");
    std::ostringstream out;
    out << "# geometry export, " << g.elements.size() << " elements\n";
    int base_index = 1;
    for (size_t idx = 0; idx < g.elements.size(); ++idx) {
        const ExportElement& e = g.elements[idx];
        out << "o " << role_name(e.role) << "_" << idx << "\n";
        for (const Vec& v : e.vertices)
            out << "v " << fmt("%.9g", v[0]) << " " << fmt("%.9g", v[1]) << " "
                << fmt("%.9g", v[2]) << "\n";
        const int n = static_cast<int>(e.vertices.size());
        switch (e.kind) {
            case ElementKind::Point:
                out << "p " << base_index << "\n";
                break;
            case ElementKind::Segment:
            case ElementKind::Ray:
                out << "l " << base_index << " " << base_index + 1 << "\n";
                break;
            case ElementKind::Polygon: {
                out << "f";
                for (int i = 0; i < n; ++i) out << " " << base_index + i;
                out << "\n";
                break;
            }
        }
        base_index += n;
    }
    return out.str();
}

void export_obj(const GeometryExport& g, const std::string& path) {
    write_text(path, to_obj_text(g), "export_obj");
}

std::string to_svg_text(const GeometryExport& g, const std::string& projection) {
    Mat P;  // 2 x d projector
    if (projection == "xy" || projection == "xz" || projection == "yz") {
        const int a = projection == "yz" ? 1 : 0;
        const int b = projection == "xy" ? 1 : 2;
        if (g.dimension <= std::max(a, b))
            throw UnsupportedProjection("to_svg_text: projection '" + projection +
                                        "' needs more scene dimensions");
        P = Mat::Zero(2, g.dimension);
        P(0, a) = 1.0;
        P(1, b) = 1.0;
    } else if (projection == "iso") {
        if (g.dimension != 3)
            throw UnsupportedProjection("to_svg_text: 'iso' projection requires a 3-D scene");
        P = Mat::Zero(2, 3);
        P.row(0) << 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0;
        P.row(1) << 1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0);
    } else {
        throw UnsupportedProjection("to_svg_text: unknown projection '" + projection + "'");
    }

    // Projected bounds of the scene box corners.
    double minx = 0, maxx = 0, miny = 0, maxy = 0;
    bool first = true;
    const int d = g.dimension;
    for (long corner = 0; corner < (1L << d); ++corner) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = (corner >> i) & 1 ? g.box_radius : 0.0;
        Vec p = P * x;
        if (first || p[0] < minx) minx = p[0];
        if (first || p[0] > maxx) maxx = p[0];
        if (first || p[1] < miny) miny = p[1];
        if (first || p[1] > maxy) maxy = p[1];
        first = false;
    }
    const double canvas = 640.0, margin = 24.0;
    const double sx = (canvas - 2 * margin) / std::max(maxx - minx, 1e-12);
    const double sy = (canvas - 2 * margin) / std::max(maxy - miny, 1e-12);
    const double scale = std::min(sx, sy);
    auto to_px = [&](const Vec& v) {
        Vec p = P * v;
        double px = margin + (p[0] - minx) * scale;
        double py = canvas - (margin + (p[1] - miny) * scale);
        return std::pair<double, double>(px, py);
    };
    auto px_str = [&](double x) { return fmt("%.2f", x); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << canvas << "\" height=\""
        << canvas << "\" viewBox=\"0 0 " << canvas << " " << canvas << "\">\n";
    out << "<style>\n"
        << ".plane{stroke:#888888;fill:#88888818;stroke-width:1;stroke-dasharray:4 3;}\n"
        << ".preimage{stroke:#1f77b4;fill:#1f77b428;stroke-width:1.2;}\n"
        << ".manifold-piece{stroke:#2ca02c;fill:#2ca02c33;stroke-width:1.2;}\n"
        << ".flow-line{stroke:#d62728;fill:none;stroke-width:1.4;}\n"
        << ".g1{stroke:#9467bd;fill:#9467bd33;}\n"
        << "</style>\n";
    for (const ExportElement& e : g.elements) {
        std::string cls = role_name(e.role);
        if (e.group > 0) cls += " g1";
        switch (e.kind) {
            case ElementKind::Point: {
                auto [x, y] = to_px(e.vertices.front());
                out << "<circle class=\"" << cls << "\" cx=\"" << px_str(x) << "\" cy=\""
                    << px_str(y) << "\" r=\"3\"/>\n";
                break;
            }
            case ElementKind::Segment:
            case ElementKind::Ray: {
                auto [x1, y1] = to_px(e.vertices[0]);
                auto [x2, y2] = to_px(e.vertices[1]);
                out << "<line class=\"" << cls << "\" x1=\"" << px_str(x1) << "\" y1=\""
                    << px_str(y1) << "\" x2=\"" << px_str(x2) << "\" y2=\"" << px_str(y2)
                    << "\"/>\n";
                break;
            }
            case ElementKind::Polygon: {
                out << "<polygon class=\"" << cls << "\" points=\"";
                for (size_t i = 0; i < e.vertices.size(); ++i) {
                    auto [x, y] = to_px(e.vertices[i]);
                    if (i) out << " ";
                    out << px_str(x) << "," << px_str(y);
                }
                out << "\"/>\n";
                break;
            }
        }
    }
    out << "</svg>\n";
    return out.str();
}

void export_svg(const GeometryExport& g, const std::string& path, const std::string& projection) {
    write_text(path, to_svg_text(g, projection), "export_svg");
}

}  // namespace relucone
