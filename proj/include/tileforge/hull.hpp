#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace tileforge {

/// Simplicial convex hull in R^d. Coplanar facets stay triangulated; use
/// merged_normals() to get one normal per geometric facet.
struct ConvexHull {
    struct Facet {
        std::vector<std::size_t> vertices; // indices into the input columns
        Eigen::VectorXd normal;            // outward, unit length
        double offset = 0.0;               // normal . x <= offset inside
        double area = 0.0;                 // (d-1)-volume
    };

    std::size_t dim = 0;
    std::vector<Facet> facets;
    std::vector<std::size_t> vertices; // sorted, unique
    double volume = 0.0;

    /// Distinct outward facet normals with their total facet area, largest first.
    std::vector<std::pair<Eigen::VectorXd, double>> merged_normals(double angle_tol = 1e-7) const;
    /// Vertices whose incident facet normals span R^d: the corners, without
    /// points that only sit inside a triangulated flat face.
    std::vector<std::size_t> extreme_vertices(double angle_tol = 1e-7) const;
};

/// Incremental (beneath-beyond) hull of the columns of `points`. Throws
/// Error(degenerate) when the points do not span R^d.
ConvexHull convex_hull(const Eigen::MatrixXd& points);

} // namespace tileforge
