#include "rodplast/section.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

namespace rodplast {

void SectionMesh::finalize() {
    const int nt = num_triangles();
    tri_area.resize(nt);
    quad_points.resize(nt);
    hat_grads.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = triangles[t];
        const Vec2& p0 = vertices[tri[0]];
        const Vec2& p1 = vertices[tri[1]];
        const Vec2& p2 = vertices[tri[2]];
        const Vec2 e1 = p1 - p0, e2 = p2 - p0;
        const double det = e1.x() * e2.y() - e1.y() * e2.x();
        if (det <= 0.0)
            throw InvalidInput("SectionMesh: non-positively oriented triangle");
        tri_area[t] = 0.5 * det;
        quad_points[t] = {0.5 * (p0 + p1), 0.5 * (p1 + p2), 0.5 * (p2 + p0)};
        // grad of hat_i: constant; hat_0 = 1 - xi - eta in reference coords.
        const double inv = 1.0 / det;
        const Vec2 g1(e2.y() * inv, -e2.x() * inv);
        const Vec2 g2(-e1.y() * inv, e1.x() * inv);
        hat_grads[t] = {-g1 - g2, g1, g2};
    }
}

double SectionMesh::area() const {
    double a = 0.0;
    for (double t : tri_area) a += t;
    return a;
}

namespace {

template <class F>
double integrate(const SectionMesh& m, F&& f) {
    double acc = 0.0;
    for (int q = 0; q < m.num_quad(); ++q) acc += m.quad_weight(q) * f(m.quad_point(q));
    return acc;
}

} // namespace

double SectionMesh::moment_x2() const {
    return integrate(*this, [](const Vec2& p) { return p.x(); });
}
double SectionMesh::moment_x3() const {
    return integrate(*this, [](const Vec2& p) { return p.y(); });
}
double SectionMesh::moment_x2x3() const {
    return integrate(*this, [](const Vec2& p) { return p.x() * p.y(); });
}
double SectionMesh::moment_x2x2() const {
    return integrate(*this, [](const Vec2& p) { return p.x() * p.x(); });
}
double SectionMesh::moment_x3x3() const {
    return integrate(*this, [](const Vec2& p) { return p.y() * p.y(); });
}

bool SectionMesh::is_connected() const {
    if (vertices.empty()) return false;
    std::vector<std::vector<int>> adj(vertices.size());
    for (const auto& tri : triangles)
        for (int a = 0; a < 3; ++a) {
            adj[tri[a]].push_back(tri[(a + 1) % 3]);
            adj[tri[(a + 1) % 3]].push_back(tri[a]);
        }
    std::vector<char> seen(vertices.size(), 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (int w : adj[v])
            if (!seen[w]) {
                seen[w] = 1;
                bfs.push(w);
            }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

namespace {

SectionMesh refine_once(const SectionMesh& coarse, double radius) {
    SectionMesh fine;
    fine.vertices = coarse.vertices;
    fine.on_boundary = coarse.on_boundary;

    // Edge -> triangle count, to recognize boundary edges.
    std::map<std::pair<int, int>, int> edge_count;
    auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    for (const auto& tri : coarse.triangles)
        for (int a = 0; a < 3; ++a) edge_count[key(tri[a], tri[(a + 1) % 3])]++;

    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto k = key(a, b);
        auto it = midpoint.find(k);
        if (it != midpoint.end()) return it->second;
        Vec2 p = 0.5 * (fine.vertices[a] + fine.vertices[b]);
        const bool bnd = edge_count[k] == 1;
        if (bnd) p *= radius / p.norm();
        fine.vertices.push_back(p);
        fine.on_boundary.push_back(bnd ? 1 : 0);
        int idx = static_cast<int>(fine.vertices.size()) - 1;
        midpoint[k] = idx;
        return idx;
    };

    for (const auto& tri : coarse.triangles) {
        const int m01 = mid(tri[0], tri[1]);
        const int m12 = mid(tri[1], tri[2]);
        const int m20 = mid(tri[2], tri[0]);
        fine.triangles.push_back({tri[0], m01, m20});
        fine.triangles.push_back({m01, tri[1], m12});
        fine.triangles.push_back({m20, m12, tri[2]});
        fine.triangles.push_back({m01, m12, m20});
    }
    return fine;
}

} // namespace

SectionMesh generate_disc_mesh(int refinement) {
    if (refinement < 0) throw InvalidInput("generate_disc_mesh: refinement must be >= 0");
    const double r = disc_radius();
    SectionMesh mesh;
    const int n = 16;
    mesh.vertices.push_back(Vec2::Zero());
    mesh.on_boundary.push_back(0);
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * M_PI * k / n;
        mesh.vertices.push_back(Vec2(r * std::cos(th), r * std::sin(th)));
        mesh.on_boundary.push_back(1);
    }
    for (int k = 0; k < n; ++k) mesh.triangles.push_back({0, 1 + k, 1 + (k + 1) % n});

    for (int level = 0; level < refinement; ++level) mesh = refine_once(mesh, r);
    mesh.finalize();
    return mesh;
}

SectionMesh generate_rect_mesh(double width, double height, int nx, int ny) {
    if (width <= 0.0 || height <= 0.0 || nx < 1 || ny < 1)
        throw InvalidInput("generate_rect_mesh: dimensions and cell counts must be positive");
    const double scale = 1.0 / std::sqrt(width * height); // unit area
    const double w = width * scale, h = height * scale;
    SectionMesh mesh;
    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            mesh.vertices.push_back(Vec2(-0.5 * w + w * i / nx, -0.5 * h + h * j / ny));
            mesh.on_boundary.push_back(i == 0 || i == nx || j == 0 || j == ny ? 1 : 0);
        }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({a, c, d});
        }
    mesh.finalize();
    return mesh;
}

} // namespace rodplast
