#pragma once

#include <diffmsc/mesh.hpp>

#include <Eigen/SparseCore>

#include <ostream>

namespace diffmsc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Cotangent stiffness matrix W: off-diagonal -(cot a + cot b)/2 per edge, diagonal the
/// negated off-diagonal row sum. Boundary edges receive only their single incident
/// triangle's cotangent. Obtuse angles keep their (negative) cotangent unclamped.
inline SparseMatrix cotangent_stiffness(const TriangleMesh& mesh)
{
    const auto& p = mesh.positions();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.face_count() * 12);
    for (const Face& t : mesh.faces()) {
        for (int c = 0; c < 3; ++c) {
            const std::size_t k = t[c], i = t[(c + 1) % 3], j = t[(c + 2) % 3];
            const Vec3 u = p[i] - p[k];
            const Vec3 v = p[j] - p[k];
            const double half_cot = 0.5 * u.dot(v) / u.cross(v).norm();
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            triplets.emplace_back(ii, jj, -half_cot);
            triplets.emplace_back(jj, ii, -half_cot);
            triplets.emplace_back(ii, ii, half_cot);
            triplets.emplace_back(jj, jj, half_cot);
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
    SparseMatrix W(n, n);
    W.setFromTriplets(triplets.begin(), triplets.end());
    W.makeCompressed();
    return W;
}

/// Diagonal lumped mass matrix. Throws if any vertex has a zero area element because the
/// generalized eigenproblem would be singular.
inline SparseMatrix mass_matrix(const VertexAreas& areas)
{
    const auto n = static_cast<Eigen::Index>(areas.size());
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(areas.size());
    for (Eigen::Index v = 0; v < n; ++v) {
        const double a = areas.da[static_cast<std::size_t>(v)];
        if (!(a > 0.0)) {
            throw MeshError("vertex " + std::to_string(v) +
                            " has zero area element (isolated vertex); mass matrix is singular");
        }
        triplets.emplace_back(v, v, a);
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();
    return A;
}

/// Coordinate dump, one "row col value" triple per stored entry, column-major order.
inline void write_coordinate(std::ostream& out, const SparseMatrix& m)
{
    for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            out << it.row() << ' ' << it.col() << ' ' << detail::format_double(it.value()) << '\n';
        }
    }
}

} // namespace diffmsc
