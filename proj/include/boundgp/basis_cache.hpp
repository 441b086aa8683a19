#ifndef BOUNDGP_BASIS_CACHE_HPP
#define BOUNDGP_BASIS_CACHE_HPP

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/domain_grid.hpp"
#include "boundgp/eigenbasis.hpp"
#include "boundgp/errors.hpp"

namespace boundgp {

// Little-endian layout:
//   "BGP1" | u32 nx, ny, m | f64 h, x0, y0 | mask bits | f64 lambda_sq[m] | f64 phi[m][n_int]
// Mask bits are row-major (node k = j*nx + i), least significant bit first,
// padded to a whole byte. phi is stored mode by mode in interior order.

namespace detail {

class CacheWriter {
public:
    void u32(std::uint32_t v) {
        for (int b = 0; b < 4; ++b) {
            out_.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
        }
    }
    void f64(double v) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            out_.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFu));
        }
    }
    void raw(const std::string& s) { out_ += s; }
    void byte(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class CacheReader {
public:
    explicit CacheReader(const std::string& bytes) : bytes_(bytes) {}

    void need(std::size_t n, const char* what) const {
        if (bytes_.size() - pos_ < n) {
            throw ParseError(std::string("basis cache truncated while reading ") + what, pos_);
        }
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * b);
        }
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_++])) << (8 * b);
        }
        return std::bit_cast<double>(v);
    }
    std::uint8_t byte(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }
    [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
    [[nodiscard]] bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string serialize_basis(const HarmonicBasis& basis) {
    const DomainGrid& g = basis.grid();
    detail::CacheWriter w;
    w.raw("BGP1");
    w.u32(static_cast<std::uint32_t>(g.nx()));
    w.u32(static_cast<std::uint32_t>(g.ny()));
    w.u32(static_cast<std::uint32_t>(basis.size()));
    w.f64(g.h());
    w.f64(g.origin().x);
    w.f64(g.origin().y);
    const auto& mask = g.mask();
    for (std::size_t k = 0; k < mask.size(); k += 8) {
        std::uint8_t packed = 0;
        for (std::size_t b = 0; b < 8 && k + b < mask.size(); ++b) {
            if (mask[k + b]) {
                packed |= static_cast<std::uint8_t>(1u << b);
            }
        }
        w.byte(packed);
    }
    for (Eigen::Index j = 0; j < basis.lambda_sq().size(); ++j) {
        w.f64(basis.lambda_sq()[j]);
    }
    for (Eigen::Index j = 0; j < basis.phi().cols(); ++j) {
        for (Eigen::Index r = 0; r < basis.phi().rows(); ++r) {
            w.f64(basis.phi()(r, j));
        }
    }
    return w.take();
}

inline HarmonicBasis deserialize_basis(const std::string& bytes) {
    detail::CacheReader r(bytes);
    r.need(4, "magic");
    if (bytes.compare(0, 4, "BGP1") != 0) {
        throw ParseError("not a basis cache (bad magic)", 0);
    }
    for (int k = 0; k < 4; ++k) {
        r.byte("magic");
    }
    const std::size_t nx = r.u32("nx");
    const std::size_t ny = r.u32("ny");
    const std::size_t m = r.u32("m");
    const double h = r.f64("h");
    const double x0 = r.f64("x0");
    const double y0 = r.f64("y0");
    if (nx < 3 || ny < 3 || nx > (1u << 16) || ny > (1u << 16)) {
        throw ParseError("basis cache has implausible grid size", 4);
    }
    std::vector<std::uint8_t> mask(nx * ny, 0);
    r.need((mask.size() + 7) / 8, "mask");
    for (std::size_t k = 0; k < mask.size(); k += 8) {
        const std::uint8_t packed = r.byte("mask");
        for (std::size_t b = 0; b < 8 && k + b < mask.size(); ++b) {
            mask[k + b] = (packed >> b) & 1u;
        }
    }
    const std::size_t header_end = r.offset();
    DomainGrid grid = [&] {
        try {
            return DomainGrid(nx, ny, h, {x0, y0}, std::move(mask));
        } catch (const ArgumentError& e) {
            throw ParseError(std::string("basis cache describes an invalid grid: ") + e.what(), header_end);
        }
    }();
    const std::size_t n_int = grid.interior_count();
    if (m == 0 || m > n_int) {
        throw ParseError("basis cache mode count out of range", 16);
    }
    r.need(8 * m * (n_int + 1), "eigenpairs");
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
        lambda[j] = r.f64("lambda_sq");
    }
    Eigen::MatrixXd phi(static_cast<Eigen::Index>(n_int), static_cast<Eigen::Index>(m));
    for (Eigen::Index j = 0; j < phi.cols(); ++j) {
        for (Eigen::Index i = 0; i < phi.rows(); ++i) {
            phi(i, j) = r.f64("phi");
        }
    }
    if (!r.done()) {
        throw ParseError("trailing bytes after basis cache", r.offset());
    }
    try {
        return HarmonicBasis(std::move(grid), std::move(lambda), std::move(phi));
    } catch (const ArgumentError& e) {
        throw ParseError(std::string("basis cache holds invalid eigenpairs: ") + e.what(), header_end);
    }
}

inline void save_basis(const HarmonicBasis& basis, const std::string& path) {
    const std::string bytes = serialize_basis(basis);
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
        throw ArgumentError("cannot write basis cache: " + path);
    }
}

inline HarmonicBasis load_basis(const std::string& path) { return deserialize_basis(detail::read_file(path)); }

}  // namespace boundgp

#endif
