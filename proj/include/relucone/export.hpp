#pragma once

#include "relucone/common.hpp"
#include "relucone/geometry.hpp"
#include "relucone/piece.hpp"

#include <optional>
#include <string>
#include <vector>

namespace relucone {

enum class ElementKind { Point, Segment, Polygon, Ray };
enum class ElementRole { Plane, Preimage, ManifoldPiece, FlowLine };

std::string kind_name(ElementKind kind);
std::string role_name(ElementRole role);
ElementKind kind_from_name(const std::string& name);
ElementRole role_from_name(const std::string& name);

/// One drawable element. Rays store their clipped endpoints in `vertices`
/// (so every stored coordinate lies inside the scene box) and keep the unit
/// direction of the unbounded side in `direction`.
struct ExportElement {
    ElementKind kind = ElementKind::Point;
    ElementRole role = ElementRole::Preimage;
    int layer = -1;
    int piece = -1;
    int group = 0;
    std::vector<Vec> vertices;
    Vec direction = Vec::Zero(0);
};

/// A scene: typed elements clipped to the box [0, box_radius]^dimension.
/// JSON is the canonical lossless serialization; OBJ and SVG are views.
struct GeometryExport {
    int dimension = 0;
    double box_radius = 2.0;
    std::vector<ExportElement> elements;
};

/// Truncate a piece to the scene box and convert it to drawable elements:
/// 0-dim pieces become points, 1-dim pieces segments or rays (rays when the
/// piece is unbounded before box clipping), 2-dim pieces convex polygons via
/// constraint-pair vertex enumeration. Higher-dimensional pieces are
/// represented by an interior point. Returns nothing if the piece misses the
/// box.
std::vector<ExportElement> piece_elements(const AffinePiece& piece, ElementRole role,
                                          double box_radius,
                                          const Tolerances& tols = default_tolerances());

/// The part of a hyperplane inside the scene box (a segment in 2-D, a convex
/// polygon in 3-D), or nothing when the plane misses the box.
std::optional<ExportElement> plane_element(const Hyperplane& plane, int layer, double box_radius,
                                           const Tolerances& tols = default_tolerances());

std::string to_json_text(const GeometryExport& g);
GeometryExport from_json_text(const std::string& text);

void export_json(const GeometryExport& g, const std::string& path);
GeometryExport import_json(const std::string& path);

/// Wavefront-style OBJ (3-D scenes only, otherwise UnsupportedProjection).
std::string to_obj_text(const GeometryExport& g);
void export_obj(const GeometryExport& g, const std::string& path);

/// SVG under a named projection: "xy", "xz", "yz" (axis pairs) or "iso"
/// (projection onto the plane orthogonal to the identity line, 3-D only).
std::string to_svg_text(const GeometryExport& g, const std::string& projection);
void export_svg(const GeometryExport& g, const std::string& path, const std::string& projection);

}  // namespace relucone
