#ifndef BOUNDGP_DOMAIN_GRID_HPP
#define BOUNDGP_DOMAIN_GRID_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "boundgp/errors.hpp"

namespace boundgp {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Grid node coordinates (column i, row j).
struct Node {
    std::size_t i = 0;
    std::size_t j = 0;

    friend bool operator==(const Node&, const Node&) = default;
};

/// Four grid corners surrounding a point and their bilinear weights.
/// Corners that fall outside the domain carry index -1.
struct BilinearCell {
    std::array<std::int64_t, 4> interior{-1, -1, -1, -1};
    std::array<double, 4> weight{0.0, 0.0, 0.0, 0.0};
};

/// Masked raster representing the domain. Nodes (not cell centers) carry the
/// mask; every node outside the mask, and every node outside the raster,
/// is a Dirichlet node where functions vanish.
class DomainGrid {
public:
    DomainGrid(std::size_t nx, std::size_t ny, double h, Point2 origin, std::vector<std::uint8_t> mask)
        : nx_(nx), ny_(ny), h_(h), origin_(origin), mask_(std::move(mask)) {
        if (nx_ < 3 || ny_ < 3) {
            throw ArgumentError("domain grid needs at least 3x3 nodes");
        }
        if (!(h_ > 0.0) || !std::isfinite(h_)) {
            throw ArgumentError("grid spacing must be positive and finite");
        }
        if (mask_.size() != nx_ * ny_) {
            throw ArgumentError("mask size does not match nx*ny");
        }
        index_.assign(nx_ * ny_, -1);
        // row-major: j outer, i inner
        for (std::size_t j = 0; j < ny_; ++j) {
            for (std::size_t i = 0; i < nx_; ++i) {
                const std::size_t k = j * nx_ + i;
                mask_[k] = mask_[k] ? 1 : 0;
                if (mask_[k]) {
                    index_[k] = static_cast<std::int64_t>(nodes_.size());
                    nodes_.push_back({i, j});
                }
            }
        }
        if (nodes_.empty()) {
            throw ArgumentError("empty domain: mask has no interior nodes");
        }
    }

    /// Fully interior nx-by-ny node lattice that discretizes the rectangle
    /// [0,width]x[0,height] with Dirichlet edges: h = width/(nx+1) and node
    /// (i,j) sits at ((i+1)h, (j+1)h).
    static DomainGrid rectangle(std::size_t nx, std::size_t ny, double width, double height) {
        const double h = width / static_cast<double>(nx + 1);
        const double hy = height / static_cast<double>(ny + 1);
        if (std::abs(h - hy) > 1e-12 * h) {
            throw ArgumentError("rectangle grid needs square cells: width/(nx+1) != height/(ny+1)");
        }
        return DomainGrid(nx, ny, h, {h, h}, std::vector<std::uint8_t>(nx * ny, 1));
    }

    [[nodiscard]] std::size_t nx() const noexcept { return nx_; }
    [[nodiscard]] std::size_t ny() const noexcept { return ny_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] Point2 origin() const noexcept { return origin_; }
    [[nodiscard]] const std::vector<std::uint8_t>& mask() const noexcept { return mask_; }
    [[nodiscard]] std::size_t interior_count() const noexcept { return nodes_.size(); }

    [[nodiscard]] bool in_raster(std::int64_t i, std::int64_t j) const noexcept {
        return i >= 0 && j >= 0 && i < static_cast<std::int64_t>(nx_) && j < static_cast<std::int64_t>(ny_);
    }

    [[nodiscard]] bool interior(std::int64_t i, std::int64_t j) const noexcept {
        return in_raster(i, j) && mask_[static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i)] != 0;
    }

    /// Dense interior index of node (i,j), or -1 for Dirichlet nodes.
    [[nodiscard]] std::int64_t index_of(std::int64_t i, std::int64_t j) const noexcept {
        if (!in_raster(i, j)) {
            return -1;
        }
        return index_[static_cast<std::size_t>(j) * nx_ + static_cast<std::size_t>(i)];
    }

    [[nodiscard]] Node node_of(std::size_t interior_index) const { return nodes_.at(interior_index); }

    [[nodiscard]] Point2 position(std::size_t i, std::size_t j) const noexcept {
        return {origin_.x + static_cast<double>(i) * h_, origin_.y + static_cast<double>(j) * h_};
    }

    [[nodiscard]] Point2 interior_position(std::size_t interior_index) const {
        const Node n = node_of(interior_index);
        return position(n.i, n.j);
    }

    /// Bilinear interpolation corners for p. Coordinates within 1e-9 cells
    /// of a grid line snap onto it, so points placed on nodes interpolate
    /// exactly.
    [[nodiscard]] BilinearCell bilinear(Point2 p) const noexcept {
        BilinearCell cell;
        double fx = (p.x - origin_.x) / h_;
        double fy = (p.y - origin_.y) / h_;
        if (!std::isfinite(fx) || !std::isfinite(fy)) {
            return cell;
        }
        const auto snap = [](double f) {
            const double r = std::round(f);
            return std::abs(f - r) < 1e-9 ? r : f;
        };
        fx = snap(fx);
        fy = snap(fy);
        if (fx < -1.0 || fy < -1.0 || fx > static_cast<double>(nx_) || fy > static_cast<double>(ny_)) {
            return cell;
        }
        const double ix = std::floor(fx);
        const double jy = std::floor(fy);
        const double tx = fx - ix;
        const double ty = fy - jy;
        const auto i0 = static_cast<std::int64_t>(ix);
        const auto j0 = static_cast<std::int64_t>(jy);
        cell.interior = {index_of(i0, j0), index_of(i0 + 1, j0), index_of(i0, j0 + 1), index_of(i0 + 1, j0 + 1)};
        cell.weight = {(1.0 - tx) * (1.0 - ty), tx * (1.0 - ty), (1.0 - tx) * ty, tx * ty};
        return cell;
    }

    /// Interpolates per-interior-node values at p; Dirichlet nodes count as 0.
    template <class Values>
    [[nodiscard]] double interpolate(const Values& values, Point2 p) const {
        const BilinearCell cell = bilinear(p);
        double acc = 0.0;
        for (std::size_t c = 0; c < 4; ++c) {
            if (cell.interior[c] >= 0 && cell.weight[c] != 0.0) {
                acc += cell.weight[c] * values[static_cast<std::size_t>(cell.interior[c])];
            }
        }
        return acc;
    }

    friend bool operator==(const DomainGrid& a, const DomainGrid& b) {
        return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.h_ == b.h_ && a.origin_ == b.origin_ && a.mask_ == b.mask_;
    }

private:
    std::size_t nx_;
    std::size_t ny_;
    double h_;
    Point2 origin_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::int64_t> index_;
    std::vector<Node> nodes_;
};

/// True iff p lies inside the raster extent and the bilinear mask indicator
/// at p exceeds one half.
inline bool contains(const DomainGrid& grid, Point2 p) {
    const Point2 o = grid.origin();
    const double x1 = o.x + static_cast<double>(grid.nx() - 1) * grid.h();
    const double y1 = o.y + static_cast<double>(grid.ny() - 1) * grid.h();
    if (!(p.x >= o.x && p.x <= x1 && p.y >= o.y && p.y <= y1)) {
        return false;
    }
    const BilinearCell cell = grid.bilinear(p);
    double indicator = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
        if (cell.interior[c] >= 0) {
            indicator += cell.weight[c];
        }
    }
    return indicator > 0.5;
}

namespace detail {

class RasterReader {
public:
    explicit RasterReader(std::string bytes) : bytes_(std::move(bytes)) {}

    [[nodiscard]] std::size_t offset() const noexcept { return pos_; }
    [[nodiscard]] bool done() const noexcept { return pos_ >= bytes_.size(); }
    [[nodiscard]] const std::string& bytes() const noexcept { return bytes_; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        const std::size_t start = pos_;
        std::size_t value = 0;
        while (pos_ < bytes_.size() && bytes_[pos_] >= '0' && bytes_[pos_] <= '9') {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (std::size_t{1} << 40)) {
                throw ParseError(std::string("value too large for ") + what, start);
            }
            ++pos_;
        }
        if (pos_ == start) {
            throw ParseError(std::string("expected unsigned integer for ") + what, start);
        }
        return value;
    }

    unsigned char read_byte() {
        if (pos_ >= bytes_.size()) {
            throw ParseError("unexpected end of pixel data", pos_);
        }
        return static_cast<unsigned char>(bytes_[pos_++]);
    }

    void advance(std::size_t n) { pos_ += n; }

private:
    std::string bytes_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ArgumentError("cannot open file: " + path);
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Raster rows are stored top-down; grid row j = ny-1-row keeps y pointing up.
inline std::vector<std::uint8_t> flip_rows(const std::vector<std::uint8_t>& rows, std::size_t nx, std::size_t ny) {
    std::vector<std::uint8_t> mask(nx * ny, 0);
    for (std::size_t row = 0; row < ny; ++row) {
        for (std::size_t i = 0; i < nx; ++i) {
            mask[(ny - 1 - row) * nx + i] = rows[row * nx + i];
        }
    }
    return mask;
}

inline std::vector<std::uint8_t> parse_pgm(RasterReader& in, std::size_t& nx, std::size_t& ny) {
    const bool binary = in.bytes()[1] == '5';
    in.advance(2);
    nx = in.read_uint("width");
    ny = in.read_uint("height");
    const std::size_t maxval = in.read_uint("maxval");
    if (maxval == 0 || maxval > 65535) {
        throw ParseError("maxval must be in 1..65535", in.offset());
    }
    if (nx == 0 || ny == 0) {
        throw ParseError("raster dimensions must be positive", in.offset());
    }
    std::vector<std::uint8_t> rows(nx * ny, 0);
    // interior iff pixel > maxval/2, compared as 2*pixel > maxval
    if (binary) {
        if (in.done()) {
            throw ParseError("missing whitespace before pixel data", in.offset());
        }
        in.advance(1);
        for (std::size_t k = 0; k < nx * ny; ++k) {
            std::size_t px = in.read_byte();
            if (maxval > 255) {
                px = (px << 8) | in.read_byte();
            }
            if (px > maxval) {
                throw ParseError("pixel exceeds maxval", in.offset() - 1);
            }
            rows[k] = 2 * px > maxval ? 1 : 0;
        }
    } else {
        for (std::size_t k = 0; k < nx * ny; ++k) {
            const std::size_t px = in.read_uint("pixel");
            if (px > maxval) {
                throw ParseError("pixel exceeds maxval", in.offset());
            }
            rows[k] = 2 * px > maxval ? 1 : 0;
        }
    }
    return rows;
}

inline std::vector<std::uint8_t> parse_ascii_grid(RasterReader& in, std::size_t& nx, std::size_t& ny) {
    nx = in.read_uint("columns");
    ny = in.read_uint("rows");
    if (nx == 0 || ny == 0) {
        throw ParseError("raster dimensions must be positive", in.offset());
    }
    std::vector<std::uint8_t> rows(nx * ny, 0);
    for (std::size_t row = 0; row < ny; ++row) {
        in.skip_space_and_comments();
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t at = in.offset();
            if (in.done()) {
                throw ParseError("unexpected end of grid", at);
            }
            const unsigned char c = in.read_byte();
            if (c != '0' && c != '1') {
                throw ParseError("grid cells must be '0' or '1'", at);
            }
            rows[row * nx + i] = c == '1' ? 1 : 0;
        }
    }
    return rows;
}

}  // namespace detail

/// Parses a PGM (P2/P5) or ASCII 0/1 grid held in memory. `width` is the
/// physical extent of the nx columns; h = width/nx, origin (0,0).
inline DomainGrid parse_mask(const std::string& bytes, double width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw ArgumentError("domain width must be positive");
    }
    detail::RasterReader in(bytes);
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::uint8_t> rows;
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '2' || bytes[1] == '5')) {
        rows = detail::parse_pgm(in, nx, ny);
    } else {
        rows = detail::parse_ascii_grid(in, nx, ny);
    }
    if (nx < 3 || ny < 3) {
        throw ParseError("raster must be at least 3x3", 0);
    }
    const double h = width / static_cast<double>(nx);
    return DomainGrid(nx, ny, h, {0.0, 0.0}, detail::flip_rows(rows, nx, ny));
}

inline DomainGrid load_mask(const std::string& path, double width) {
    return parse_mask(detail::read_file(path), width);
}

/// Binary PGM (P5, maxval 255) of the mask, top row first.
inline std::string to_pgm(const DomainGrid& grid) {
    std::string out = "P5\n" + std::to_string(grid.nx()) + " " + std::to_string(grid.ny()) + "\n255\n";
    for (std::size_t row = 0; row < grid.ny(); ++row) {
        const std::size_t j = grid.ny() - 1 - row;
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            out.push_back(grid.mask()[j * grid.nx() + i] ? static_cast<char>(255) : static_cast<char>(0));
        }
    }
    return out;
}

}  // namespace boundgp

#endif
