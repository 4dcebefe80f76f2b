#pragma once

// Procedural meshes used by tests, benchmarks and the `synth` CLI command.

#include <diffmsc/mesh.hpp>

#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace diffmsc::primitives {

/// Regular icosahedron inscribed in a sphere of the given radius.
inline TriangleMesh icosahedron(double radius = 1.0)
{
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> p = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : p) v = v.normalized() * radius;
    std::vector<Face> f = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    return TriangleMesh::from(std::move(p), std::move(f));
}

/// Loop-style midpoint subdivision of the icosahedron projected to the sphere.
/// `subdivisions` = 4 gives 2562 vertices.
inline TriangleMesh icosphere(int subdivisions, double radius = 1.0)
{
    TriangleMesh base = icosahedron(1.0);
    std::vector<Vec3> p = base.positions();
    std::vector<Face> faces = base.faces();
    for (int level = 0; level < subdivisions; ++level) {
        std::map<Edge, std::size_t> midpoint;
        auto mid = [&](std::size_t a, std::size_t b) {
            Edge key{std::min(a, b), std::max(a, b)};
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            p.push_back(((p[a] + p[b]) * 0.5).normalized());
            midpoint.emplace(key, p.size() - 1);
            return p.size() - 1;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const Face& t : faces) {
            const std::size_t ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    for (auto& v : p) v *= radius;
    return TriangleMesh::from(std::move(p), std::move(faces));
}

/// Planar nx-by-ny vertex grid in the z = 0 plane, two triangles per cell.
/// Vertex (i, j) has index j * nx + i.
inline TriangleMesh grid(std::size_t nx, std::size_t ny, double spacing = 1.0)
{
    std::vector<Vec3> p;
    p.reserve(nx * ny);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) p.emplace_back(i * spacing, j * spacing, 0.0);
    }
    std::vector<Face> f;
    for (std::size_t j = 0; j + 1 < ny; ++j) {
        for (std::size_t i = 0; i + 1 < nx; ++i) {
            const std::size_t a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
            f.push_back({a, b, d});
            f.push_back({a, d, c});
        }
    }
    return TriangleMesh::from(std::move(p), std::move(f));
}

/// Grid with jittered in-plane positions and random heights; a cheap source of
/// irregular, non-degenerate meshes with boundary for property tests.
inline TriangleMesh random_grid(std::size_t nx, std::size_t ny, std::uint64_t seed,
                                double jitter = 0.25, double height = 0.3)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TriangleMesh flat = grid(nx, ny, 1.0);
    std::vector<Vec3> p = flat.positions();
    for (auto& v : p) v += Vec3(jitter * u(rng), jitter * u(rng), height * u(rng));
    std::vector<Face> f = flat.faces();
    // random diagonal flips keep the triangulation varied
    for (std::size_t c = 0; c + 1 < f.size(); c += 2) {
        if (u(rng) > 0.0) {
            const std::size_t a = f[c][0], b = f[c][1], d = f[c][2], e = f[c + 1][2];
            f[c] = {a, b, e};
            f[c + 1] = {b, d, e};
        }
    }
    return TriangleMesh::from(std::move(p), std::move(f));
}

/// Geodesic sphere: every icosahedron face split into frequency^2 triangles, projected
/// to the sphere. Has 10 * frequency^2 + 2 vertices.
inline TriangleMesh geodesic_sphere(std::size_t frequency, double radius = 1.0)
{
    if (frequency < 1) throw InvalidInput("geodesic sphere frequency must be at least 1");
    const TriangleMesh ico = icosahedron(1.0);
    const std::size_t n = frequency;
    // a point is identified by its sorted (corner, weight) pairs, so shared edges merge
    std::map<std::array<std::size_t, 6>, std::size_t> index;
    std::vector<Vec3> p;
    auto vertex = [&](const Face& f, std::size_t i, std::size_t j) {
        const std::size_t k = n - i - j;
        std::array<std::pair<std::size_t, std::size_t>, 3> w{{{f[0], i}, {f[1], j}, {f[2], k}}};
        for (auto& c : w) {
            if (c.second == 0) c.first = std::numeric_limits<std::size_t>::max();
        }
        std::sort(w.begin(), w.end());
        const std::array<std::size_t, 6> key{w[0].first, w[0].second, w[1].first, w[1].second, w[2].first, w[2].second};
        auto [it, fresh] = index.emplace(key, p.size());
        if (fresh) {
            const Vec3 x = (static_cast<double>(i) * ico.positions()[f[0]] + static_cast<double>(j) * ico.positions()[f[1]] +
                            static_cast<double>(k) * ico.positions()[f[2]]) / static_cast<double>(n);
            p.push_back(radius * x.normalized());
        }
        return it->second;
    };
    std::vector<Face> faces;
    for (const Face& f : ico.faces()) {
        // (i, j) counts steps toward corners 0 and 1; rows of constant i
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; i + j < n; ++j) {
                faces.push_back({vertex(f, i, j), vertex(f, i + 1, j), vertex(f, i, j + 1)});
                if (i + j + 1 < n) faces.push_back({vertex(f, i + 1, j), vertex(f, i + 1, j + 1), vertex(f, i, j + 1)});
            }
        }
    }
    return TriangleMesh::from(std::move(p), std::move(faces));
}

/// Displaces a unit sphere mesh into a closed, asymmetric, organic-looking surface: an
/// ellipsoid with random Gaussian bumps. Used as a stand-in for scanned shapes.
inline TriangleMesh blobify(const TriangleMesh& sphere, std::uint64_t seed, double scale = 1.0, int bumps = 12)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> centers;
    std::vector<double> amplitude, width;
    for (int b = 0; b < bumps; ++b) {
        centers.push_back(Vec3(u(rng), u(rng), u(rng)).normalized());
        amplitude.push_back(0.25 + 0.35 * (0.5 * (u(rng) + 1.0)));
        width.push_back(0.25 + 0.15 * (0.5 * (u(rng) + 1.0)));
    }
    std::vector<Vec3> p = sphere.positions();
    const Vec3 axes(1.6, 1.0, 0.8);
    for (auto& v : p) {
        double r = 1.0;
        for (int b = 0; b < bumps; ++b) {
            const double d2 = (v - centers[b]).squaredNorm();
            r += amplitude[b] * std::exp(-d2 / (2.0 * width[b] * width[b]));
        }
        v = (v * r).cwiseProduct(axes) * scale;
    }
    std::vector<Face> f = sphere.faces();
    return TriangleMesh::from(std::move(p), std::move(f));
}

inline TriangleMesh bumpy_blob(int subdivisions, std::uint64_t seed, double scale = 1.0, int bumps = 12)
{
    return blobify(icosphere(subdivisions, 1.0), seed, scale, bumps);
}

/// Applies x -> R * (s * x) + t to every vertex.
inline TriangleMesh transformed(const TriangleMesh& mesh, const Eigen::Matrix3d& rotation,
                                const Vec3& translation, double scale = 1.0)
{
    std::vector<Vec3> p = mesh.positions();
    for (auto& v : p) v = rotation * (scale * v) + translation;
    return TriangleMesh::from(std::move(p), mesh.faces());
}

/// Result of re-indexing a mesh: `to_original[i]` is the source index of new vertex i.
struct PermutedMesh {
    TriangleMesh mesh;
    std::vector<std::size_t> to_original;
};

inline PermutedMesh permuted(const TriangleMesh& mesh, std::uint64_t seed)
{
    const std::size_t n = mesh.vertex_count();
    std::vector<std::size_t> to_original(n);
    std::iota(to_original.begin(), to_original.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(to_original.begin(), to_original.end(), rng);
    std::vector<std::size_t> to_new(n);
    for (std::size_t i = 0; i < n; ++i) to_new[to_original[i]] = i;

    std::vector<Vec3> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = mesh.positions()[to_original[i]];
    std::vector<Face> f = mesh.faces();
    for (auto& t : f) {
        for (auto& v : t) v = to_new[v];
    }
    std::shuffle(f.begin(), f.end(), rng);
    return {TriangleMesh::from(std::move(p), std::move(f)), std::move(to_original)};
}

inline Eigen::Matrix3d random_rotation(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
    return q.normalized().toRotationMatrix();
}

} // namespace diffmsc::primitives
