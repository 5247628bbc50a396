#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tileforge/attractor.hpp"
#include "tileforge/error.hpp"
#include "tileforge/oned.hpp"

using namespace tileforge;

TEST_CASE("set checks")
{
    CHECK_NOTHROW(check_set({0, 2, 5}));
    CHECK_THROWS_AS(check_set({}), Error);
    CHECK_THROWS_AS(check_set({1, 2}), Error);
    CHECK_THROWS_AS(check_set({0, 2, 2}), Error);
    CHECK(Progression{3, 4}.elements() == IntSet1D{0, 3, 6, 9});
}

TEST_CASE("direct sums and cancellation")
{
    CHECK(direct_sum({0, 1}, {0, 2}) == IntSet1D{0, 1, 2, 3});
    CHECK_THROWS_AS(direct_sum({0, 1}, {0, 1}), Error);
    CHECK(cancel({0, 3}, {0, 1, 3, 4}) == IntSet1D{0, 1});
    CHECK_THROWS_AS(cancel({0, 2}, {0, 1, 2}), Error);
}

TEST_CASE("cancel inverts direct_sum")
{
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> coin(0, 3);
    int checked_pairs = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        IntSet1D a{0}, b{0};
        for (std::int64_t i = 1; i < 12; ++i) {
            if (coin(rng) == 0)
                a.push_back(i);
            if (coin(rng) == 0)
                b.push_back(i);
        }
        IntSet1D s;
        try {
            s = direct_sum(a, b);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::collision);
            continue;
        }
        CHECK(cancel(a, s) == b);
        CHECK(cancel(b, s) == a);
        ++checked_pairs;
    }
    CHECK(checked_pairs > 100);
}

TEST_CASE("six-element 1-D example")
{
    const TilingResult t = tiling_oracle({0, 3, 6, 18, 21, 24});
    CHECK(t.tiles);
    CHECK(t.n == 36);
    CHECK(t.shifts == IntSet1D{0, 1, 2, 9, 10, 11});
    CHECK(is_l_set(t.shifts, 3));
    const Classification c = classify({0, 3, 6, 18, 21, 24});
    CHECK(c.simple);
    CHECK(c.progressions == std::vector<Progression>{{3, 3}, {18, 2}});
}

TEST_CASE("non-tiling sets")
{
    const TilingResult t = tiling_oracle({0, 1, 3});
    CHECK_FALSE(t.tiles);
    CHECK(t.proved);
    const TilingResult capped = tiling_oracle({0, 2, 4, 6, 8, 10}, 11);
    CHECK_FALSE(capped.tiles);
    CHECK_FALSE(capped.proved);
    CHECK_FALSE(classify({0, 1, 3}).simple);
    // {0,2} tiles Z but never a segment
    const TilingResult even = tiling_oracle({0, 2});
    CHECK(even.tiles);
    CHECK(even.n == 4);
}

TEST_CASE("l-sets")
{
    CHECK(is_l_set({0, 1, 2, 9, 10, 11}, 3));
    CHECK_FALSE(is_l_set({0, 1, 2, 9, 10, 11}, 2));
    CHECK(is_l_set({0, 1, 3}, 1));
    CHECK_THROWS_AS(is_l_set({0, 1}, 0), Error);
}

TEST_CASE("classification agrees with the tiling oracle on subsets of {0..17}")
{
    for (std::uint32_t mask = 0; mask < (1u << 17); ++mask) {
        IntSet1D y{0};
        for (std::int64_t i = 1; i <= 17; ++i)
            if (mask >> (i - 1) & 1)
                y.push_back(i);
        const bool simple = classify(y).simple;
        const TilingResult t = tiling_oracle(y);
        REQUIRE((t.tiles || t.proved));
        if (simple != t.tiles) {
            FAIL_CHECK("disagreement on mask " << mask);
            break;
        }
    }
}

TEST_CASE("tiling oracle agrees with exact cover on small sets")
{
    for (std::uint32_t mask = 0; mask < (1u << 9); ++mask) {
        IntSet1D y{0};
        for (std::int64_t i = 1; i <= 9; ++i)
            if (mask >> (i - 1) & 1)
                y.push_back(i);
        const TilingResult t = tiling_oracle(y);
        if (t.tiles) {
            CHECK(direct_sum(y, t.shifts).size() == static_cast<std::size_t>(t.n));
            CHECK(oracle::covers_segment(y, t.n));
        } else {
            // no segment up to a generous length can be covered
            for (std::int64_t n = static_cast<std::int64_t>(y.size()); n <= 40; n += static_cast<std::int64_t>(y.size()))
                CHECK_FALSE(oracle::covers_segment(y, n));
        }
    }
}

TEST_CASE("polynomials")
{
    CHECK(poly_of_set({0, 2}) == Poly{1, 0, 1});
    CHECK(poly_mul({1, 1}, {1, 0, 1}) == Poly{1, 1, 1, 1});
    CHECK(progression_poly(2, 3) == Poly{1, 0, 1, 0, 1});
    CHECK(poly_eq({1, 2, 0, 0}, {1, 2}));
    const auto q = poly_div({1, 1, 1, 1}, {1, 1});
    REQUIRE(q);
    CHECK(poly_eq(*q, {1, 0, 1}));
    CHECK_FALSE(poly_div({1, 0, 1}, {1, 1}));
}

TEST_CASE("progression products match representation counts")
{
    for (std::int64_t n = 2; n <= 64; ++n)
        for (const auto& f : ordered_factorizations(n)) {
            std::vector<std::pair<std::int64_t, std::int64_t>> ad;
            for (const auto& p : progression_family(f))
                ad.push_back({p.a, p.d});
            Poly prod{1};
            for (const auto& p : progression_family(f))
                prod = poly_mul(prod, progression_poly(p.a, p.d));
            CHECK(poly_eq(prod, oracle::progression_product(ad)));
            CHECK(poly_eq(prod, progression_poly(1, n)));
        }
}

TEST_CASE("ordered factorizations")
{
    CHECK(ordered_factorizations(1) == std::vector<std::vector<std::int64_t>>{{}});
    CHECK(ordered_factorizations(6) == std::vector<std::vector<std::int64_t>>{{2, 3}, {3, 2}, {6}});
    CHECK(ordered_factorizations(8).size() == 4);
    CHECK(progression_family({2, 3, 2}) == std::vector<Progression>{{1, 2}, {2, 3}, {6, 2}});
}

TEST_CASE("enumeration matches exact cover for small N")
{
    for (std::int64_t n = 1; n <= 12; ++n)
        CHECK(enumerate_simple(n) == oracle::segment_tilers(n));
}

TEST_CASE("segment conversions")
{
    const SegmentSet w = normalize_segments({{5, 2}, {0, 2}, {2, 1}});
    CHECK(w == SegmentSet{{0, 3}, {5, 2}});
    CHECK_THROWS_AS(normalize_segments({}), Error);
    CHECK_THROWS_AS(normalize_segments({{0, 0}}), Error);
    CHECK(segments_to_intset({{10, 2}, {14, 2}}) == IntSet1D{0, 1, 4, 5});
    CHECK_THROWS_AS(segments_to_intset({{0, 2}, {5, 3}}), Error);
    CHECK(intset_to_segments({0, 1, 3}) == SegmentSet{{0, 2}, {3, 1}});
    const auto [scaled, h] = rescale_segments({{0, 3}, {9, 3}});
    CHECK(h == 3);
    CHECK(scaled == SegmentSet{{0, 1}, {3, 1}});
}

TEST_CASE("1-D attractor systems cover Y + [0,1]")
{
    for (const IntSet1D& y : {IntSet1D{0, 3, 6, 18, 21, 24}, IntSet1D{0, 1}, IntSet1D{0, 2}, IntSet1D{0, 1, 4, 5}}) {
        const IntSystem s = to_attractor_system(y);
        CHECK(s.shifts.size() == static_cast<std::size_t>(s.matrix(0, 0)));
        const std::set<std::int64_t> members(y.begin(), y.end());
        const AttractorApprox a = approximate(s, 3);
        for (Eigen::Index j = 0; j < a.points().cols(); ++j) {
            const double x = a.points()(0, j);
            const auto cell = static_cast<std::int64_t>(std::floor(x));
            CHECK((members.count(cell) == 1 || (members.count(cell - 1) == 1 && x == static_cast<double>(cell))));
        }
        std::vector<std::int64_t> digits;
        for (const auto& v : s.shifts)
            digits.push_back(v[0]);
        CHECK(oracle::interval_measure(s.matrix(0, 0), digits, 2).to_double() >= static_cast<double>(y.size()));
        CHECK(self_similarity_residual(a) < 1e-9);
    }
    CHECK_THROWS_AS(to_attractor_system({0, 1, 3}), Error);
}
