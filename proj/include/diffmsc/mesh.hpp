#pragma once

#include <diffmsc/error.hpp>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace diffmsc {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::size_t, 3>;
using Edge = std::array<std::size_t, 2>;

/// Immutable triangle mesh. Construction validates every index, rejects degenerate
/// faces and derives the undirected edge set, so a TriangleMesh is always well formed.
class TriangleMesh {
public:
    TriangleMesh() = default;

    static TriangleMesh from(std::vector<Vec3> positions,
                             std::vector<Face> faces,
                             Diagnostics* diag = nullptr)
    {
        TriangleMesh mesh;
        mesh.positions_ = std::move(positions);
        const std::size_t n = mesh.positions_.size();

        std::vector<std::string> degenerate;
        std::set<Face> seen;
        std::size_t duplicates = 0;
        mesh.faces_.reserve(faces.size());
        for (std::size_t f = 0; f < faces.size(); ++f) {
            const Face& face = faces[f];
            for (std::size_t c : face) {
                if (c >= n) {
                    throw MeshError("face " + std::to_string(f) + " references vertex " +
                                    std::to_string(c) + " but the mesh has " +
                                    std::to_string(n) + " vertices");
                }
            }
            if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2] ||
                is_zero_area(mesh.positions_, face)) {
                degenerate.push_back(std::to_string(f));
                continue;
            }
            Face key = face;
            std::sort(key.begin(), key.end());
            if (!seen.insert(key).second) {
                ++duplicates;
                continue;
            }
            mesh.faces_.push_back(face);
        }
        if (!degenerate.empty()) {
            std::string list;
            for (std::size_t i = 0; i < degenerate.size() && i < 20; ++i) {
                list += (i ? ", " : "") + degenerate[i];
            }
            if (degenerate.size() > 20) list += ", ...";
            throw MeshError(std::to_string(degenerate.size()) + " degenerate face(s): " + list);
        }
        if (duplicates > 0) {
            warn(diag, "dropped " + std::to_string(duplicates) + " duplicate face(s)");
        }

        mesh.edges_.reserve(mesh.faces_.size() * 3);
        for (const Face& face : mesh.faces_) {
            for (int c = 0; c < 3; ++c) {
                std::size_t a = face[c], b = face[(c + 1) % 3];
                if (a > b) std::swap(a, b);
                mesh.edges_.push_back({a, b});
            }
        }
        std::sort(mesh.edges_.begin(), mesh.edges_.end());
        mesh.edges_.erase(std::unique(mesh.edges_.begin(), mesh.edges_.end()), mesh.edges_.end());
        return mesh;
    }

    std::size_t vertex_count() const { return positions_.size(); }
    std::size_t face_count() const { return faces_.size(); }
    std::size_t edge_count() const { return edges_.size(); }

    const std::vector<Vec3>& positions() const { return positions_; }
    const std::vector<Face>& faces() const { return faces_; }
    /// Sorted, unique, each pair with first < second.
    const std::vector<Edge>& edges() const { return edges_; }

    double face_area(std::size_t f) const
    {
        const Face& t = faces_[f];
        return 0.5 * (positions_[t[1]] - positions_[t[0]])
                         .cross(positions_[t[2]] - positions_[t[0]])
                         .norm();
    }

    double total_area() const
    {
        double sum = 0.0;
        for (std::size_t f = 0; f < faces_.size(); ++f) sum += face_area(f);
        return sum;
    }

private:
    static bool is_zero_area(const std::vector<Vec3>& p, const Face& t)
    {
        const Vec3 e1 = p[t[1]] - p[t[0]];
        const Vec3 e2 = p[t[2]] - p[t[0]];
        const double longest = std::max({e1.squaredNorm(), e2.squaredNorm(),
                                         (p[t[2]] - p[t[1]]).squaredNorm()});
        return e1.cross(e2).norm() <= 1e-12 * longest;
    }

    std::vector<Vec3> positions_;
    std::vector<Face> faces_;
    std::vector<Edge> edges_;
};

/// Per-vertex area elements (barycentric lumping: one third of each incident triangle).
struct VertexAreas {
    std::vector<double> da;

    double total() const
    {
        double sum = 0.0;
        for (double a : da) sum += a;
        return sum;
    }
    std::size_t size() const { return da.size(); }
    double operator[](std::size_t v) const { return da[v]; }
};

inline VertexAreas vertex_areas(const TriangleMesh& mesh, Diagnostics* diag = nullptr)
{
    VertexAreas areas;
    areas.da.assign(mesh.vertex_count(), 0.0);
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
        const double third = mesh.face_area(f) / 3.0;
        for (std::size_t v : mesh.faces()[f]) areas.da[v] += third;
    }
    std::size_t isolated = 0;
    std::size_t first = 0;
    for (std::size_t v = 0; v < areas.da.size(); ++v) {
        if (areas.da[v] == 0.0) {
            if (isolated++ == 0) first = v;
        }
    }
    if (isolated > 0) {
        warn(diag, std::to_string(isolated) + " vertex(es) belong to no face (first: " +
                       std::to_string(first) + "); their area element is 0");
    }
    return areas;
}

/// Neighbor lists, each sorted by vertex index.
inline std::vector<std::vector<std::size_t>> adjacency(const TriangleMesh& mesh)
{
    std::vector<std::vector<std::size_t>> nbr(mesh.vertex_count());
    // edges are sorted lexicographically, so pushes arrive in order for the first endpoint
    for (const Edge& e : mesh.edges()) {
        nbr[e[0]].push_back(e[1]);
        nbr[e[1]].push_back(e[0]);
    }
    for (auto& list : nbr) std::sort(list.begin(), list.end());
    return nbr;
}

namespace detail {

class Fnv1a {
public:
    void bytes(const void* data, std::size_t size)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= p[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    void u64(std::uint64_t value)
    {
        unsigned char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
        bytes(buf, 8);
    }
    void f64(double value)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &value, sizeof bits);
        u64(bits);
    }
    std::uint64_t value() const { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string hex64(std::uint64_t value)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, value >>= 4) out[i] = digits[value & 0xf];
    return out;
}

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double(std::string_view tok, std::size_t line)
{
    double value = 0.0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw InvalidInput("line " + std::to_string(line) + ": expected a number, got '" +
                           std::string(tok) + "'");
    }
    return value;
}

inline long long parse_int(std::string_view tok, std::size_t line)
{
    long long value = 0;
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw InvalidInput("line " + std::to_string(line) + ": expected an integer, got '" +
                           std::string(tok) + "'");
    }
    return value;
}

inline std::string format_double(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

} // namespace detail

/// Content hash over vertex positions and faces (bit-exact).
inline std::string mesh_hash(const TriangleMesh& mesh)
{
    detail::Fnv1a h;
    h.u64(mesh.vertex_count());
    h.u64(mesh.face_count());
    for (const Vec3& p : mesh.positions()) {
        h.f64(p.x());
        h.f64(p.y());
        h.f64(p.z());
    }
    for (const Face& f : mesh.faces()) {
        for (std::size_t v : f) h.u64(v);
    }
    return detail::hex64(h.value());
}

enum class MeshFormat { OFF, OBJ };

inline TriangleMesh read_off(std::istream& in, Diagnostics* diag = nullptr)
{
    std::vector<std::string> lines;
    std::vector<std::size_t> line_numbers;
    {
        std::string raw;
        std::size_t number = 0;
        while (std::getline(in, raw)) {
            ++number;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::string t = detail::trim(raw);
            if (t.empty()) continue;
            lines.push_back(std::move(t));
            line_numbers.push_back(number);
        }
    }
    if (lines.empty()) throw InvalidInput("OFF: empty file");

    std::size_t cursor = 0;
    auto header = detail::split_ws(lines[0]);
    if (header.empty() || header[0] != "OFF") {
        throw InvalidInput("OFF: missing 'OFF' header on line " + std::to_string(line_numbers[0]));
    }
    std::vector<std::string_view> counts(header.begin() + 1, header.end());
    ++cursor;
    if (counts.empty()) {
        if (cursor >= lines.size()) throw InvalidInput("OFF: missing element counts");
        counts = detail::split_ws(lines[cursor]);
        ++cursor;
    }
    if (counts.size() < 2) {
        throw InvalidInput("OFF: malformed element count line " +
                           std::to_string(line_numbers[cursor - 1]));
    }
    const long long nv = detail::parse_int(counts[0], line_numbers[cursor - 1]);
    const long long nf = detail::parse_int(counts[1], line_numbers[cursor - 1]);
    if (nv < 0 || nf < 0) throw InvalidInput("OFF: negative element counts");
    if (lines.size() - cursor < static_cast<std::size_t>(nv + nf)) {
        throw InvalidInput("OFF: file truncated, expected " + std::to_string(nv) + " vertices and " +
                           std::to_string(nf) + " faces");
    }

    std::vector<Vec3> positions(static_cast<std::size_t>(nv));
    for (auto& p : positions) {
        const auto tok = detail::split_ws(lines[cursor]);
        const std::size_t ln = line_numbers[cursor++];
        if (tok.size() < 3) throw InvalidInput("line " + std::to_string(ln) + ": expected x y z");
        p = Vec3(detail::parse_double(tok[0], ln), detail::parse_double(tok[1], ln),
                 detail::parse_double(tok[2], ln));
    }
    std::vector<Face> faces(static_cast<std::size_t>(nf));
    for (auto& f : faces) {
        const auto tok = detail::split_ws(lines[cursor]);
        const std::size_t ln = line_numbers[cursor++];
        if (tok.empty()) throw InvalidInput("line " + std::to_string(ln) + ": empty face");
        const long long count = detail::parse_int(tok[0], ln);
        if (count != 3) {
            throw InvalidInput("line " + std::to_string(ln) + ": only triangles are supported, got a " +
                               std::to_string(count) + "-gon");
        }
        if (tok.size() < 4) throw InvalidInput("line " + std::to_string(ln) + ": truncated face");
        for (int c = 0; c < 3; ++c) {
            const long long idx = detail::parse_int(tok[1 + c], ln);
            if (idx < 0 || idx >= nv) {
                throw MeshError("line " + std::to_string(ln) + ": vertex index " +
                                std::to_string(idx) + " out of range [0, " + std::to_string(nv) + ")");
            }
            f[c] = static_cast<std::size_t>(idx);
        }
    }
    return TriangleMesh::from(std::move(positions), std::move(faces), diag);
}

inline TriangleMesh read_obj(std::istream& in, Diagnostics* diag = nullptr)
{
    std::vector<Vec3> positions;
    std::vector<std::array<long long, 3>> raw_faces;
    std::vector<std::size_t> face_lines;
    std::string raw;
    std::size_t ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const auto tok = detail::split_ws(raw);
        if (tok.empty()) continue;
        if (tok[0] == "v") {
            if (tok.size() < 4) throw InvalidInput("line " + std::to_string(ln) + ": expected v x y z");
            positions.emplace_back(detail::parse_double(tok[1], ln), detail::parse_double(tok[2], ln),
                                   detail::parse_double(tok[3], ln));
        } else if (tok[0] == "f") {
            if (tok.size() != 4) {
                throw InvalidInput("line " + std::to_string(ln) +
                                   ": only triangles are supported, got a face with " +
                                   std::to_string(tok.size() - 1) + " corners");
            }
            std::array<long long, 3> f{};
            for (int c = 0; c < 3; ++c) {
                std::string_view corner = tok[1 + c];
                corner = corner.substr(0, corner.find('/'));
                long long idx = detail::parse_int(corner, ln);
                if (idx == 0) throw InvalidInput("line " + std::to_string(ln) + ": OBJ indices are 1-based");
                // negative indices are relative to the vertices read so far
                idx = idx > 0 ? idx - 1 : static_cast<long long>(positions.size()) + idx;
                f[c] = idx;
            }
            raw_faces.push_back(f);
            face_lines.push_back(ln);
        }
        // vn, vt, usemtl, mtllib, o, g, s, l: ignored
    }
    std::vector<Face> faces;
    faces.reserve(raw_faces.size());
    const auto n = static_cast<long long>(positions.size());
    for (std::size_t i = 0; i < raw_faces.size(); ++i) {
        Face f{};
        for (int c = 0; c < 3; ++c) {
            const long long idx = raw_faces[i][c];
            if (idx < 0 || idx >= n) {
                throw MeshError("line " + std::to_string(face_lines[i]) + ": vertex index " +
                                std::to_string(idx + 1) + " out of range for " + std::to_string(n) +
                                " vertices");
            }
            f[c] = static_cast<std::size_t>(idx);
        }
        faces.push_back(f);
    }
    return TriangleMesh::from(std::move(positions), std::move(faces), diag);
}

inline MeshFormat format_from_path(const std::filesystem::path& path)
{
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".off") return MeshFormat::OFF;
    if (ext == ".obj") return MeshFormat::OBJ;
    throw InvalidInput("cannot infer mesh format from extension '" + ext + "' (expected .off or .obj)");
}

inline TriangleMesh load_mesh(const std::filesystem::path& path, MeshFormat format,
                              Diagnostics* diag = nullptr)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open mesh file " + path.string());
    try {
        return format == MeshFormat::OFF ? read_off(in, diag) : read_obj(in, diag);
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    } catch (const MeshError& e) {
        throw MeshError(path.string() + ": " + e.what());
    }
}

inline TriangleMesh load_mesh(const std::filesystem::path& path, Diagnostics* diag = nullptr)
{
    return load_mesh(path, format_from_path(path), diag);
}

/// Writes OFF with shortest round-trip number formatting.
inline void write_off(std::ostream& out, const TriangleMesh& mesh)
{
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << ' ' << mesh.edge_count()
        << '\n';
    for (const Vec3& p : mesh.positions()) {
        out << detail::format_double(p.x()) << ' ' << detail::format_double(p.y()) << ' '
            << detail::format_double(p.z()) << '\n';
    }
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

inline void write_off(const std::filesystem::path& path, const TriangleMesh& mesh)
{
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    write_off(out, mesh);
}

} // namespace diffmsc
