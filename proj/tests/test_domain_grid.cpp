#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "boundgp/domain_grid.hpp"
#include "boundgp/synthetic.hpp"

using namespace boundgp;

namespace {

DomainGrid plus_shape() {
    // 5x5 raster with a plus sign of interior nodes
    std::vector<std::uint8_t> mask(25, 0);
    for (int k = 0; k < 5; ++k) {
        mask[2 * 5 + k] = 1;
        mask[k * 5 + 2] = 1;
    }
    return DomainGrid(5, 5, 0.5, {1.0, 2.0}, mask);
}

}  // namespace

TEST(DomainGrid, RectangleSpacingAndPositions) {
    const DomainGrid g = DomainGrid::rectangle(4, 9, 1.0, 2.0);
    EXPECT_DOUBLE_EQ(g.h(), 0.2);
    EXPECT_EQ(g.interior_count(), 36u);
    EXPECT_DOUBLE_EQ(g.position(0, 0).x, 0.2);
    EXPECT_DOUBLE_EQ(g.position(3, 8).y, 1.8);
    EXPECT_THROW(DomainGrid::rectangle(4, 4, 1.0, 2.0), ArgumentError);
}

TEST(DomainGrid, RowMajorEnumeration) {
    const DomainGrid g = plus_shape();
    ASSERT_EQ(g.interior_count(), 9u);
    EXPECT_EQ(g.node_of(0), (Node{2, 0}));
    EXPECT_EQ(g.node_of(1), (Node{2, 1}));
    EXPECT_EQ(g.node_of(2), (Node{0, 2}));
    EXPECT_EQ(g.node_of(6), (Node{4, 2}));
    EXPECT_EQ(g.node_of(8), (Node{2, 4}));
    for (std::size_t k = 0; k < g.interior_count(); ++k) {
        const Node n = g.node_of(k);
        EXPECT_EQ(g.index_of(static_cast<std::int64_t>(n.i), static_cast<std::int64_t>(n.j)),
                  static_cast<std::int64_t>(k));
    }
    EXPECT_EQ(g.index_of(0, 0), -1);
    EXPECT_EQ(g.index_of(-1, 2), -1);
    EXPECT_EQ(g.index_of(2, 5), -1);
}

TEST(DomainGrid, RejectsInvalidConstruction) {
    EXPECT_THROW(DomainGrid(3, 3, 1.0, {}, std::vector<std::uint8_t>(9, 0)), ArgumentError);
    EXPECT_THROW(DomainGrid(2, 3, 1.0, {}, std::vector<std::uint8_t>(6, 1)), ArgumentError);
    EXPECT_THROW(DomainGrid(3, 3, 0.0, {}, std::vector<std::uint8_t>(9, 1)), ArgumentError);
    EXPECT_THROW(DomainGrid(3, 3, 1.0, {}, std::vector<std::uint8_t>(8, 1)), ArgumentError);
}

TEST(DomainGrid, BilinearIsExactAtNodes) {
    const DomainGrid g = plus_shape();
    std::vector<double> values(g.interior_count());
    for (std::size_t k = 0; k < values.size(); ++k) {
        values[k] = 1.0 + static_cast<double>(k) * 0.37;
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        EXPECT_EQ(g.interpolate(values, g.interior_position(k)), values[k]);
    }
    // Dirichlet nodes and points outside the raster read as zero
    EXPECT_EQ(g.interpolate(values, g.position(0, 0)), 0.0);
    EXPECT_EQ(g.interpolate(values, g.position(4, 4)), 0.0);
    EXPECT_EQ(g.interpolate(values, {-5.0, 0.0}), 0.0);
    EXPECT_EQ(g.interpolate(values, {1.0 - 0.5, 3.0}), 0.0);
}

TEST(DomainGrid, BilinearBlendsNeighbours) {
    const DomainGrid g = plus_shape();
    std::vector<double> values(g.interior_count(), 0.0);
    const auto centre = static_cast<std::size_t>(g.index_of(2, 2));
    const auto right = static_cast<std::size_t>(g.index_of(3, 2));
    values[centre] = 2.0;
    values[right] = 4.0;
    const Point2 c = g.position(2, 2);
    EXPECT_DOUBLE_EQ(g.interpolate(values, {c.x + 0.25, c.y}), 3.0);
    // (2,3) is interior but (3,3) is not
    EXPECT_DOUBLE_EQ(g.interpolate(values, {c.x + 0.25, c.y + 0.25}), 0.25 * 2.0 + 0.25 * 4.0);
}

TEST(DomainGrid, ContainsUsesIndicator) {
    const DomainGrid g = plus_shape();
    EXPECT_TRUE(contains(g, g.position(2, 2)));
    EXPECT_TRUE(contains(g, g.position(0, 2)));
    EXPECT_FALSE(contains(g, g.position(0, 0)));
    EXPECT_FALSE(contains(g, {100.0, 100.0}));
}

TEST(MaskParsing, AsciiTopRowIsHighestY) {
    const std::string text = "3 4\n111\n000\n010\n000\n";
    const DomainGrid g = parse_mask(text, 3.0);
    EXPECT_EQ(g.nx(), 3u);
    EXPECT_EQ(g.ny(), 4u);
    EXPECT_DOUBLE_EQ(g.h(), 1.0);
    EXPECT_TRUE(g.interior(0, 3));
    EXPECT_TRUE(g.interior(2, 3));
    EXPECT_TRUE(g.interior(1, 1));
    EXPECT_FALSE(g.interior(1, 0));
    EXPECT_EQ(g.interior_count(), 4u);
}

TEST(MaskParsing, PlainAndBinaryPgmAgree) {
    const std::string p2 = "P2\n# comment\n3 3\n15\n0 15 0\n15 8 15\n0 7 0\n";
    std::string p5 = "P5 3 3 15\n";
    for (const int px : {0, 15, 0, 15, 8, 15, 0, 7, 0}) {
        p5.push_back(static_cast<char>(px));
    }
    const DomainGrid a = parse_mask(p2, 1.5);
    const DomainGrid b = parse_mask(p5, 1.5);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.interior_count(), 4u);
    EXPECT_TRUE(a.interior(1, 1));  // 8 > 15/2
    EXPECT_FALSE(a.interior(1, 0)); // 7 < 15/2
}

TEST(MaskParsing, SixteenBitPgm) {
    std::string p5 = "P5 3 3 1000\n";
    for (const int px : {0, 1000, 0, 1000, 501, 1000, 0, 500, 0}) {
        p5.push_back(static_cast<char>(px >> 8));
        p5.push_back(static_cast<char>(px & 0xFF));
    }
    const DomainGrid g = parse_mask(p5, 3.0);
    EXPECT_EQ(g.interior_count(), 4u);  // 500 is not above 1000/2
    EXPECT_FALSE(g.interior(1, 0));
}

TEST(MaskParsing, ErrorsCarryOffsets) {
    try {
        parse_mask("3 3\n111\n1x1\n111\n", 1.0);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 9u);
    }
    EXPECT_THROW(parse_mask("P2 3 3 0\n", 1.0), ParseError);
    EXPECT_THROW(parse_mask("P2 3 3 1\n0 1 0 1 2 1 0 1 0\n", 1.0), ParseError);
    EXPECT_THROW(parse_mask("P5 3 3 255\n\x01\x02", 1.0), ParseError);
    EXPECT_THROW(parse_mask("2 2\n11\n11\n", 1.0), ParseError);
    EXPECT_THROW(parse_mask("3 3\n000\n000\n000\n", 1.0), ArgumentError);
    EXPECT_THROW(parse_mask("3 3\n111\n111\n111\n", -1.0), ArgumentError);
    EXPECT_THROW(load_mask("/nonexistent/mask.pgm", 1.0), ArgumentError);
}

TEST(MaskParsing, PgmRoundTrip) {
    const DomainGrid star = star_mask(40);
    const DomainGrid back = parse_mask(to_pgm(star), 1.0);
    EXPECT_TRUE(star == back);
}

TEST(MaskParsing, ShippedStarMatchesGenerator) {
    const DomainGrid shipped = load_mask(std::string(BOUNDGP_DATA_DIR) + "/star.pgm", 1.0);
    EXPECT_TRUE(shipped == star_mask());
    EXPECT_EQ(shipped.interior_count(), 2645u);
}
