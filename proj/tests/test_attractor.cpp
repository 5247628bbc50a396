#include <cstdlib>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "tileforge/attractor.hpp"
#include "tileforge/error.hpp"

using namespace tileforge;

namespace {

const IntMatrix kDragon{{1, 1}, {-1, 1}};
const DigitSet kDragonDigits{{0, 0}, {1, 0}};

IntMatrix scalar(std::int64_t b)
{
    return IntMatrix{{b}};
}

DigitSet digits1d(std::initializer_list<std::int64_t> ds)
{
    DigitSet out;
    for (auto d : ds)
        out.push_back({d});
    return out;
}

} // namespace

TEST_CASE("bounds contain every approximation point")
{
    const AttractorApprox a = approximate(kDragon, kDragonDigits, 12);
    const Box box = attractor_bounds(kDragon.to_eigen(), to_real(IntSystem{kDragon, kDragonDigits}).shifts);
    for (Eigen::Index j = 0; j < a.points().cols(); ++j)
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(a.points()(i, j) >= box.lo[i] - 1e-12);
            CHECK(a.points()(i, j) <= box.hi[i] + 1e-12);
        }
}

TEST_CASE("bounds of the unit interval")
{
    const RealSystem s = to_real(IntSystem{scalar(2), digits1d({0, 1})});
    const Box box = attractor_bounds(s.matrix, s.shifts);
    CHECK(box.lo[0] == doctest::Approx(0.0));
    CHECK(box.hi[0] >= 1.0);
    CHECK(box.hi[0] <= 1.0 + 1e-9);
}

TEST_CASE("residue digit approximations have m^K distinct cells")
{
    for (int k = 1; k <= 10; ++k) {
        const AttractorApprox a = approximate(kDragon, kDragonDigits, k);
        CHECK(a.size() == (std::size_t{1} << k));
        std::set<IntVec> cells;
        for (std::size_t i = 0; i < a.size(); ++i)
            cells.insert(a.cell_vec(i));
        CHECK(cells.size() == a.size());
        // cells are pairwise distinct modulo M^K, one per class
        IntMatrix mk = IntMatrix::identity(2);
        for (int t = 0; t < k; ++t)
            mk = mk * kDragon;
        std::set<IntVec> classes;
        for (const auto& c : cells)
            classes.insert(residue_of(mk, c));
        CHECK(classes.size() == cells.size());
    }
}

TEST_CASE("leading shift labels")
{
    const AttractorApprox a = approximate(scalar(2), digits1d({0, 1}), 4);
    // z = sum 2^{K-k} s_k, so the leading digit is the top bit
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a.leading_shift()[i] == static_cast<std::uint32_t>(a.cell(i)[0] >> 3));
}

TEST_CASE("real approximation matches the integer one")
{
    const IntSystem s{kDragon, kDragonDigits};
    const AttractorApprox ai = approximate(s, 8);
    const AttractorApprox ar = approximate(to_real(s), 8);
    REQUIRE(ar.size() == ai.size());
    CHECK_FALSE(ar.is_integer());
    std::set<std::pair<long long, long long>> a, b;
    for (std::size_t j = 0; j < ai.size(); ++j) {
        a.insert({std::llround(ai.points()(0, j) * 1e6), std::llround(ai.points()(1, j) * 1e6)});
        b.insert({std::llround(ar.points()(0, j) * 1e6), std::llround(ar.points()(1, j) * 1e6)});
    }
    CHECK(a == b);
}

TEST_CASE("approximation errors")
{
    CHECK_THROWS_AS(approximate(IntMatrix{{1, 0}, {0, 2}}, {{0, 0}, {0, 1}}, 3), Error);
    CHECK_THROWS_AS(approximate(kDragon, kDragonDigits, 0), Error);
    CHECK_THROWS_AS(approximate(kDragon, {{0, 0, 0}}, 3), Error);
    setenv("TILEFORGE_MAX_CELLS", "1000", 1);
    CHECK_THROWS_WITH_AS(approximate(kDragon, kDragonDigits, 12), doctest::Contains("budget"), Error);
    unsetenv("TILEFORGE_MAX_CELLS");
}

TEST_CASE("measure bound of the Dragon")
{
    const MeasureBound b = measure_upper(kDragon, kDragonDigits, 14);
    CHECK(b.integral);
    CHECK(b.value().to_double() >= 1.0);
    CHECK(b.value().to_double() <= 1.10);
    CHECK(b.union_bound.to_double() >= 1.0);
}

TEST_CASE("measure bound is monotone in depth")
{
    struct Case {
        IntMatrix m;
        DigitSet d;
    };
    const std::vector<Case> cases{{kDragon, kDragonDigits},
                                  {IntMatrix{{0, -2}, {1, 0}}, {{0, 0}, {1, 0}}},
                                  {scalar(2), digits1d({0, 3})},
                                  {scalar(3), digits1d({0, 1, 5})},
                                  {IntMatrix{{2, 1}, {0, 2}}, residue_system(IntMatrix{{2, 1}, {0, 2}})}};
    for (const auto& c : cases) {
        Fraction prev(1000000);
        for (int k = 0; k <= 10; ++k) {
            const MeasureBound b = measure_upper(c.m, c.d, k);
            CHECK(b.union_bound <= prev);
            CHECK(b.integral_bound >= 1);
            CHECK(Fraction(b.integral_bound) <= b.union_bound);
            prev = b.union_bound;
        }
    }
}

TEST_CASE("1-D measure bounds dominate the interval-union measure")
{
    struct Case {
        std::int64_t b;
        std::vector<std::int64_t> d;
        std::int64_t mu; // known measure, 0 if not asserted
    };
    const std::vector<Case> cases{{2, {0, 1}, 1}, {2, {0, 3}, 3},   {2, {0, 5}, 5},
                                  {3, {0, 1, 2}, 1}, {3, {0, 2, 4}, 2}, {3, {0, 1, 5}, 0},
                                  {4, {0, 1, 6, 7}, 0}};
    for (const auto& c : cases) {
        DigitSet ds;
        for (auto d : c.d)
            ds.push_back({d});
        for (int k = 1; k <= 8; ++k) {
            const Fraction iv = oracle::interval_measure(c.b, c.d, k);
            const MeasureBound mb = measure_upper(IntMatrix{{c.b}}, ds, k);
            CHECK(mb.union_bound >= iv);
        }
        const Fraction iv = oracle::interval_measure(c.b, c.d, 10);
        const MeasureBound mb = measure_upper(IntMatrix{{c.b}}, ds, 10);
        if (c.mu > 0) {
            CHECK(mb.integral_bound == c.mu);
            CHECK(iv.floor() == c.mu);
        }
    }
}

TEST_CASE("union bound for integer shifts without residue structure")
{
    const MeasureBound b = union_measure_bound(scalar(3), {{0}, {2}}, 8);
    CHECK_FALSE(b.integral);
    CHECK(b.union_bound.to_double() < 0.2); // Cantor set has measure zero
}

TEST_CASE("Dragon is a tile")
{
    const TileCheck t = tile_check_exact(kDragon, kDragonDigits);
    CHECK(t.verdict == TileVerdict::tile);
    CHECK(t.is_tile);
    CHECK(t.radius_upper < 2.0);
    REQUIRE(t.measure);
    CHECK(*t.measure == 1);
}

TEST_CASE("{0,3} contact matrix matches the hand-built one")
{
    const TileCheck t = tile_check_exact(scalar(2), digits1d({0, 3}));
    CHECK(t.verdict == TileVerdict::not_tile);
    CHECK_FALSE(t.is_tile);
    CHECK(t.spectral_radius == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(t.exact_certificate);

    // states +-1..+-3; k -> 2k (twice), 2k - 3, 2k + 3
    std::vector<std::int64_t> states{-3, -2, -1, 1, 2, 3};
    auto count = [](std::int64_t k, std::int64_t k2) {
        int c = 0;
        for (std::int64_t a : {0, 3})
            for (std::int64_t b : {0, 3})
                c += (k2 == 2 * k + b - a);
        return c;
    };
    Eigen::MatrixXd hand(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            hand(i, j) = count(states[i], states[j]);
    double rho = 0;
    for (auto ev : hand.eigenvalues())
        rho = std::max(rho, std::abs(ev));
    CHECK(rho == doctest::Approx(2.0).epsilon(1e-9));

    for (std::size_t i = 0; i < t.contact.size(); ++i)
        for (std::size_t j = 0; j < t.contact.size(); ++j)
            CHECK(t.contact.at(i, j) ==
                  static_cast<std::uint32_t>(count(t.contact.states[i][0], t.contact.states[j][0])));
    if (t.measure)
        CHECK(*t.measure == 3);
}

TEST_CASE("tile verdicts on small 1-D digit sets")
{
    CHECK(tile_check_exact(scalar(2), digits1d({0, 1})).is_tile);
    CHECK(tile_check_exact(scalar(3), digits1d({0, 1, 2})).is_tile);
    CHECK(tile_check_exact(scalar(3), digits1d({0, 4, 8})).verdict == TileVerdict::not_tile);
    CHECK(tile_check_exact(scalar(3), digits1d({0, 2, 4})).verdict == TileVerdict::not_tile);
    CHECK(tile_check_exact(scalar(4), digits1d({0, 1, 2, 3})).verdict == TileVerdict::tile);
    CHECK_THROWS_AS(tile_check_exact(scalar(2), digits1d({0, 2})), Error);
}

TEST_CASE("raster statistics")
{
    const AttractorApprox a = approximate(scalar(2), digits1d({0, 1}), 10);
    const double r = default_resolution(a);
    CHECK(r > 0);
    CHECK(std::exp2(std::round(std::log2(r))) == r);
    const Raster ras = rasterize(a, r);
    CHECK(ras.occupied_area() == doctest::Approx(1.0).epsilon(0.02));
    CHECK(ras.boundary_fraction() < 0.05);
    CHECK_THROWS_AS(rasterize(a, 0.0), Error);
}

TEST_CASE("layer histograms")
{
    const LayerHistogram dragon = shift_cover_layers(approximate(kDragon, kDragonDigits, 14), IntBox{{-3, -3}, {3, 3}});
    CHECK(dragon.dominant == 1);
    const LayerHistogram three = shift_cover_layers(approximate(scalar(2), digits1d({0, 3}), 12), IntBox{{-4}, {4}});
    CHECK(three.dominant == 3);
    CHECK_THROWS_AS(shift_cover_layers(approximate(scalar(2), digits1d({0, 3}), 8), IntBox{{0}, {0}}), Error);
}

TEST_CASE("self-similarity residual")
{
    CHECK(self_similarity_residual(approximate(scalar(2), digits1d({0, 1}), 12)) < 1e-9);
    CHECK(self_similarity_residual(approximate(scalar(2), digits1d({0, 3}), 12)) < 1e-9);
    CHECK(self_similarity_residual(approximate(kDragon, kDragonDigits, 16)) < 0.1);
    CHECK_THROWS_AS(self_similarity_residual(approximate(kDragon, kDragonDigits, 1)), Error);
}
