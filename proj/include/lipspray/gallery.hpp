#pragma once

#include "lipspray/finsler.hpp"

#include <map>

namespace lipspray {

enum class EntryKind { spray, christoffel, finsler_tensor };

std::string_view to_string(EntryKind k);

using Params = std::map<std::string, double>;

/// Example geometry on one chart with its default working ball.
struct Geometry {
    std::string name;
    EntryKind kind = EntryKind::spray;
    Params params;
    SprayField spray;
    std::optional<FundamentalTensor> tensor;
    std::optional<ChristoffelField> christoffel;
    Signature signature = Signature::riemannian;
    Vec center;
    double radius = 1.0;

    bool has_oracle = false;
    /// Closed-form (x(t), ẋ(t)) for entries with an oracle.
    std::function<std::pair<Vec, Vec>(const Vec& x0, const Vec& v0, double t)> oracle_geodesic;
    /// Closed-form signed squared distance for entries with an oracle.
    std::function<double(const Vec& p, const Vec& q)> oracle_squared_distance;

    int dim() const { return spray.dim; }
    ChartBox box() const { return ChartBox{center, radius}; }
};

/// euclidean(n), minkowski(n), sphere(radius), capped_cylinder(radius),
/// hartman_wintner(alpha), randers(b0, b1, curl), product_lorentz(radius).
Geometry build_gallery(const std::string& name, const Params& params = {});

std::vector<std::string> gallery_names();

/// Parses {"kind", "dimension", "gallery", "params"} JSON text.
Geometry geometry_from_json(const std::string& text);

/// A gallery name, or a path to a JSON geometry file.
Geometry load_geometry(const std::string& name_or_path);

/// Profile of the capped cylinder metric g = h I + k y yᵀ in Cartesian
/// coordinates around the cap pole, with ∂_m g_ij = a y_m δ_ij + b y_m y_i y_j
/// + k (δ_im y_j + y_i δ_jm).
struct CylinderProfile {
    double h, k, a, b;
};
CylinderProfile capped_cylinder_profile(double rho, double R);

}  // namespace lipspray
