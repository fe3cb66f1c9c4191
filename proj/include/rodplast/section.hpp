#ifndef RODPLAST_SECTION_HPP
#define RODPLAST_SECTION_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "rodplast/errors.hpp"

namespace rodplast {

using Vec2 = Eigen::Vector2d;

/// Triangulated cross-section with a 3-point mid-edge quadrature rule per
/// triangle (exact for quadratics). Quadrature points are indexed globally
/// as 3*triangle + local.
struct SectionMesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<char> on_boundary; // per vertex

    // Derived quadrature/geometry data, filled by finalize().
    std::vector<double> tri_area;
    std::vector<std::array<Vec2, 3>> quad_points; // mid-edge points
    std::vector<std::array<Vec2, 3>> hat_grads;   // P1 basis gradients per triangle

    void finalize();

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_quad() const { return 3 * num_triangles(); }
    double quad_weight(int q) const { return tri_area[q / 3] / 3.0; }
    const Vec2& quad_point(int q) const { return quad_points[q / 3][q % 3]; }

    double area() const;
    double moment_x2() const;
    double moment_x3() const;
    double moment_x2x3() const;
    double moment_x2x2() const;
    double moment_x3x3() const;

    bool is_connected() const;
};

/// Symmetric triangulation of the disc of radius 1/sqrt(pi) (unit area in the
/// limit). Level 0 is a 16-triangle fan; each refinement splits every triangle
/// into four and projects new boundary vertices onto the circle.
SectionMesh generate_disc_mesh(int refinement);

/// Structured cross-diagonal triangulation of a rectangle, uniformly rescaled
/// to unit area and centered at the origin.
SectionMesh generate_rect_mesh(double width, double height, int nx, int ny);

/// Radius of the reference disc section.
inline double disc_radius() { return 0.5641895835477563; } // pi^(-1/2)

} // namespace rodplast

#endif
