#pragma once

// Binary spectral cache.
//
//   bytes  field
//   8      magic "DMSCSPEC"
//   4      format version (little endian u32)
//   16     mesh content hash (lower-case hex)
//   8      N (u64), 8 k (u64)
//   8*k    eigenvalues (IEEE-754 binary64, little endian)
//   8*N*k  eigenvectors, column-major
//   8*N    area elements
//   8      FNV-1a 64 checksum of every preceding byte

#include <diffmsc/spectral.hpp>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

namespace diffmsc {

inline constexpr std::uint32_t kSpectralCacheVersion = 1;

struct SpectralCache {
    std::string mesh_hash;
    SpectralBasis basis;
};

namespace detail {

class ByteWriter {
public:
    void raw(const void* data, std::size_t n)
    {
        const auto* p = static_cast<const unsigned char*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }
    void u32(std::uint32_t v)
    {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void u64(std::uint64_t v)
    {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<unsigned char>(v >> (8 * i)));
    }
    void f64(double v)
    {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    const std::vector<unsigned char>& bytes() const { return bytes_; }

private:
    std::vector<unsigned char> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<unsigned char>& bytes, std::size_t end)
        : bytes_(bytes), end_(end)
    {}
    void raw(void* out, std::size_t n)
    {
        if (pos_ + n > end_) throw ConsistencyError("spectral cache is truncated");
        std::memcpy(out, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint64_t u(int width)
    {
        if (pos_ + static_cast<std::size_t>(width) > end_) {
            throw ConsistencyError("spectral cache is truncated");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
        return v;
    }
    double f64()
    {
        const std::uint64_t bits = u(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::size_t position() const { return pos_; }

private:
    const std::vector<unsigned char>& bytes_;
    std::size_t end_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline void save_spectral_cache(const std::filesystem::path& path, const SpectralCache& cache)
{
    if (cache.mesh_hash.size() != 16) throw InvalidInput("mesh hash must be 16 hex characters");
    const SpectralBasis& b = cache.basis;
    detail::ByteWriter w;
    w.raw("DMSCSPEC", 8);
    w.u32(kSpectralCacheVersion);
    w.raw(cache.mesh_hash.data(), 16);
    w.u64(static_cast<std::uint64_t>(b.vertex_count()));
    w.u64(static_cast<std::uint64_t>(b.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) w.f64(b.eigenvalues(i));
    for (Eigen::Index c = 0; c < b.eigenvectors.cols(); ++c) {
        for (Eigen::Index r = 0; r < b.eigenvectors.rows(); ++r) w.f64(b.eigenvectors(r, c));
    }
    for (Eigen::Index v = 0; v < b.areas.size(); ++v) w.f64(b.areas(v));
    detail::Fnv1a h;
    h.bytes(w.bytes().data(), w.bytes().size());
    w.u64(h.value());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write spectral cache " + path.string());
    out.write(reinterpret_cast<const char*>(w.bytes().data()),
              static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw InvalidInput("failed writing spectral cache " + path.string());
}

/// Reads and checksums a cache. Structural problems raise ConsistencyError.
inline SpectralCache load_spectral_cache(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open spectral cache " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8 + 4 + 16 + 16 + 8) throw ConsistencyError(path.string() + ": not a spectral cache");
    if (std::memcmp(bytes.data(), "DMSCSPEC", 8) != 0) {
        throw ConsistencyError(path.string() + ": bad magic, not a spectral cache");
    }
    const std::size_t payload = bytes.size() - 8;
    {
        detail::Fnv1a h;
        h.bytes(bytes.data(), payload);
        std::uint64_t stored = 0;
        for (int i = 0; i < 8; ++i) {
            stored |= static_cast<std::uint64_t>(bytes[payload + static_cast<std::size_t>(i)]) << (8 * i);
        }
        if (stored != h.value()) {
            throw ConsistencyError(path.string() + ": checksum mismatch (file corrupted)");
        }
    }
    detail::ByteReader r(bytes, payload);
    char magic[8];
    r.raw(magic, 8);
    const auto version = static_cast<std::uint32_t>(r.u(4));
    if (version != kSpectralCacheVersion) {
        throw ConsistencyError(path.string() + ": unsupported cache version " + std::to_string(version));
    }
    SpectralCache cache;
    cache.mesh_hash.resize(16);
    r.raw(cache.mesh_hash.data(), 16);
    const auto n = static_cast<Eigen::Index>(r.u(8));
    const auto k = static_cast<Eigen::Index>(r.u(8));
    const std::size_t expected = 8 + 4 + 16 + 16 + 8 * static_cast<std::size_t>(k + n * k + n);
    if (n < 0 || k < 0 || expected != payload) {
        throw ConsistencyError(path.string() + ": size does not match header");
    }
    SpectralBasis& b = cache.basis;
    b.eigenvalues.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) b.eigenvalues(i) = r.f64();
    b.eigenvectors.resize(n, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        for (Eigen::Index row = 0; row < n; ++row) b.eigenvectors(row, c) = r.f64();
    }
    b.areas.resize(n);
    for (Eigen::Index v = 0; v < n; ++v) b.areas(v) = r.f64();
    return cache;
}

} // namespace diffmsc
