// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failures. An optional argument names the directory for rendered images.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "tileforge/attractor.hpp"
#include "tileforge/boxtile.hpp"
#include "tileforge/error.hpp"
#include "tileforge/haar.hpp"
#include "tileforge/oned.hpp"
#include "tileforge/render.hpp"

using namespace tileforge;

namespace {

struct Outcome {
    bool ok = true;
    std::ostringstream note;
    void require(bool cond, const std::string& what)
    {
        if (!cond) {
            if (!ok)
                note << "; ";
            else
                note.str("");
            ok = false;
            note << what;
        }
    }
};

const IntMatrix kDragon{{1, 1}, {-1, 1}};
const DigitSet kDragonDigits{{0, 0}, {1, 0}};
std::string g_image_dir = ".";

void dragon_tile(Outcome& out)
{
    const TileCheck t = tile_check_exact(kDragon, kDragonDigits);
    out.require(t.is_tile && t.verdict == TileVerdict::tile, "Dragon not certified as a tile");
    const double mu = measure_upper(kDragon, kDragonDigits, 14).value().to_double();
    out.require(mu >= 1.0 && mu <= 1.10, "measure_upper(K=14) = " + std::to_string(mu));
    out.note << "rho<=" << t.radius_upper << " measure_upper=" << mu;
}

void rectangle_tile(Outcome& out)
{
    const IntMatrix rect{{0, -2}, {1, 0}};
    const DigitSet d{{0, 0}, {1, 0}};
    out.require(tile_check_exact(rect, d).is_tile, "rectangle not a tile");
    const ParallelepipedReport r = is_parallelepiped(approximate(rect, d, 8), 0.05);
    out.require(r.is_box, "rectangle not detected as a parallelepiped");
    const ParallelepipedReport g = is_parallelepiped(approximate(kDragon, kDragonDigits, 8), 0.05);
    out.require(!g.is_box, "Dragon detected as a parallelepiped");
    out.note << "rect hull=" << r.hull_volume << " fit=" << r.fit_volume << "; dragon hull=" << g.hull_volume
             << " fit=" << g.fit_volume;
}

void for_each_form(std::size_t n, std::int64_t max_prod, const std::function<void(const BoxForm&)>& fn)
{
    std::vector<std::int64_t> p(n, 1);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t prod) {
        if (i == n) {
            if (prod == 1)
                return;
            for (int sign : {1, -1})
                fn(BoxForm{p, sign});
            return;
        }
        for (std::int64_t v = 1; prod * v <= max_prod; ++v) {
            p[i] = v;
            rec(i + 1, prod * v);
        }
    };
    rec(0, 1);
}

void box_round_trip(Outcome& out)
{
    int count = 0;
    bool saw_112 = false, saw_322 = false;
    for (std::size_t n = 1; n <= 4; ++n)
        for_each_form(n, 16, [&](const BoxForm& f) {
            ++count;
            std::ostringstream name;
            name << "(";
            for (auto v : f.p)
                name << v << ",";
            name << (f.sign > 0 ? "+" : "-") << ")";
            try {
                validate(f);
                const IntMatrix m = build_cyclic_matrix(f);
                const DigitSet d = box_digits(f);
                if (!validate_digits(m, d)) {
                    out.require(false, name.str() + " digits invalid");
                    return;
                }
                if (!tile_check_exact(m, d).is_tile) {
                    out.require(false, name.str() + " not a tile");
                    return;
                }
                const auto mm = static_cast<std::int64_t>(d.size());
                const int k = std::max(static_cast<int>(n), std::min(8, depth_for_budget(mm, std::size_t{1} << 16)));
                if (!is_parallelepiped(approximate(m, d, k), 0.05).is_box)
                    out.require(false, name.str() + " not a parallelepiped");
            } catch (const Error& e) {
                out.require(false, name.str() + " threw " + e.what());
            }
            if (f.sign > 0 && f.p == std::vector<std::int64_t>{1, 1, 2})
                saw_112 = box_digits(f).size() == 2;
            if (f.sign > 0 && f.p == std::vector<std::int64_t>{3, 2, 2})
                saw_322 = box_digits(f).size() == 12;
        });
    out.require(saw_112 && saw_322, "forms (1,1,2,+) and (3,2,2,+) missing from the sweep");
    if (out.ok)
        out.note << count << " forms";
}

void non_tile(Outcome& out)
{
    const IntMatrix m{{2}};
    const DigitSet d{{0}, {3}};
    const TileCheck t = tile_check_exact(m, d);
    out.require(!t.is_tile, "{0,3} reported as a tile");
    out.require(std::abs(t.spectral_radius - 2.0) <= 1e-6, "Perron root " + std::to_string(t.spectral_radius));
    const LayerHistogram h = shift_cover_layers(approximate(m, d, 12), IntBox{{-4}, {4}});
    out.require(h.dominant == 3, "dominant layer count " + std::to_string(h.dominant));
    // G = [0,3]: the interval oracle is exact here
    out.require(oracle::interval_measure(2, {0, 3}, 6) == Fraction(3), "interval oracle disagrees");
    char buf[96];
    std::snprintf(buf, sizeof buf, "rho=%.9f dominant=%lld", t.spectral_radius, static_cast<long long>(h.dominant));
    if (out.ok)
        out.note << buf;
}

void oned_example(Outcome& out)
{
    const IntSet1D y{0, 3, 6, 18, 21, 24};
    const TilingResult t = tiling_oracle(y);
    out.require(t.tiles && t.n == 36 && t.shifts == IntSet1D{0, 1, 2, 9, 10, 11}, "oracle result differs");
    out.require(is_l_set(t.shifts, 3), "L is not a 3-set");
    const Classification c = classify(y);
    out.require(c.simple && c.progressions == std::vector<Progression>{{3, 3}, {18, 2}}, "classification differs");
    if (out.ok)
        out.note << "N=36 L={0,1,2,9,10,11} progressions=(3,3),(18,2)";
}

void enumeration(Outcome& out)
{
    std::size_t total = 0;
    for (std::int64_t n = 1; n <= 18; ++n) {
        const auto mine = enumerate_simple(n);
        const auto brute = oracle::segment_tilers(n);
        out.require(mine == brute, "N=" + std::to_string(n) + ": " + std::to_string(mine.size()) + " vs " +
                                       std::to_string(brute.size()));
        total += brute.size();
    }
    if (out.ok)
        out.note << total << " sets over N<=18";
}

void polynomial_identity(Outcome& out)
{
    int tuples = 0;
    for (std::int64_t n = 2; n <= 64; ++n)
        for (const auto& f : ordered_factorizations(n)) {
            ++tuples;
            std::vector<std::pair<std::int64_t, std::int64_t>> ad;
            Poly prod{1};
            for (const auto& p : progression_family(f)) {
                ad.push_back({p.a, p.d});
                prod = poly_mul(prod, progression_poly(p.a, p.d));
            }
            if (!poly_eq(prod, progression_poly(1, n)) || !poly_eq(prod, oracle::progression_product(ad)))
                out.require(false, "identity fails for N=" + std::to_string(n));
        }
    if (out.ok)
        out.note << tuples << " factor tuples";
}

bool exact_identity(const HaarSystem& sys)
{
    const GramReport g = gram(sys, QuadratureParams{});
    if (!g.exact)
        return false;
    for (std::size_t i = 0; i < g.exact->size(); ++i)
        for (std::size_t j = 0; j < g.exact->size(); ++j)
            if (!((*g.exact)[i][j] == QuadraticSurd{Fraction(i == j ? 1 : 0), Fraction(1)}))
                return false;
    for (std::size_t s = 1; s < sys.basis.m; ++s) {
        const auto mean = exact_mean(sys, s);
        if (!mean || mean->to_double() != 0.0)
            return false;
    }
    return true;
}

void haar(Outcome& out)
{
    out.require(exact_identity(build_wavelets(IntMatrix{{2}}, {{0}, {1}})), "classic Haar Gram not exactly I");
    const BoxForm f{{3, 2, 2}, 1};
    out.require(exact_identity(build_wavelets(build_cyclic_matrix(f), box_digits(f))), "(3,2,2,+) Gram not exactly I");
    const HaarSystem dragon = build_wavelets(kDragon, kDragonDigits);
    out.require(exact_identity(dragon), "Dragon exact Gram not I");
    const GramReport r = gram(dragon, QuadratureParams{16, 128}, true);
    out.require(r.max_deviation < 0.05, "Dragon raster deviation " + std::to_string(r.max_deviation));
    if (out.ok)
        out.note << "dragon raster deviation=" << r.max_deviation;
}

using GlobalCounts = std::map<std::vector<std::int64_t>, std::uint32_t>;

GlobalCounts global_counts(const Raster& r, double res)
{
    GlobalCounts out;
    const std::size_t d = r.dim();
    for (std::size_t flat = 0; flat < r.occupancy.size(); ++flat) {
        if (r.occupancy[flat] == 0)
            continue;
        std::size_t rest = flat;
        std::vector<std::int64_t> g(d);
        for (std::size_t k = 0; k < d; ++k) {
            g[k] = static_cast<std::int64_t>(rest % static_cast<std::size_t>(r.extent[k])) +
                   std::llround(r.origin[static_cast<Eigen::Index>(k)] * res);
            rest /= static_cast<std::size_t>(r.extent[k]);
        }
        out[g] = r.occupancy[flat];
    }
    return out;
}

void tensor(Outcome& out)
{
    const std::vector<IntSystem> factors{{IntMatrix{{2}}, {{0}, {1}}},
                                         {IntMatrix{{2}}, {{0}, {3}}},
                                         {IntMatrix{{3}}, {{0}, {1}, {5}}},
                                         {IntMatrix{{3}}, {{0}, {2}}},
                                         {kDragon, kDragonDigits}};
    const double res = 16.0;
    int pairs = 0;
    for (const auto& a : factors)
        for (const auto& b : factors) {
            if (a.matrix.dim() + b.matrix.dim() > 3)
                continue;
            for (int k = 1; k <= 6; ++k) {
                const GlobalCounts ca = global_counts(rasterize(approximate(a, k), res), res);
                const GlobalCounts cb = global_counts(rasterize(approximate(b, k), res), res);
                const GlobalCounts cp = global_counts(rasterize(approximate(tensor_product(a, b), k), res), res);
                GlobalCounts expect;
                for (const auto& [ga, na] : ca)
                    for (const auto& [gb, nb] : cb) {
                        auto g = ga;
                        g.insert(g.end(), gb.begin(), gb.end());
                        expect[g] = na * nb;
                    }
                ++pairs;
                if (cp != expect)
                    out.require(false, "raster mismatch at K=" + std::to_string(k));
            }
        }
    const IntSystem unit{IntMatrix{{3}}, {{0}, {1}, {2}}};
    const IntSystem prod = tensor_product(IntSystem{kDragon, kDragonDigits}, unit);
    out.require(tile_check_exact(prod.matrix, prod.shifts).is_tile, "Dragon x [0,1] not a tile");

    // two disconnected 1-D attractors and their product
    const IntSet1D yx{0, 2, 4, 12, 14, 16}, yy{0, 2, 12, 14};
    const IntSystem sx = to_attractor_system(yx), sy = to_attractor_system(yy);
    const IntSystem plane = tensor_product(sx, sy);
    const AttractorApprox approx = approximate(plane, 2);
    RenderOptions opts{8, {}, 24};
    const Image single = render(approx, opts);
    const std::size_t cells = yx.size() * yy.size();
    out.require(covered_pixels(single) == cells * 64, "product attractor image has wrong area");
    for (auto lx : tiling_oracle(yx).shifts)
        for (auto ly : tiling_oracle(yy).shifts)
            opts.translates.push_back({lx, ly});
    const Image tiling = render(approx, opts);
    const auto side = static_cast<std::size_t>(sx.matrix(0, 0) * opts.resolution);
    out.require(opts.translates.size() == 24, "expected 24 translates");
    out.require(tiling.width * tiling.height == static_cast<int>(side * side) && covered_pixels(tiling) == side * side,
                "translates do not fill the square");
    write_ppm(single, g_image_dir + "/product_attractor.ppm");
    write_ppm(tiling, g_image_dir + "/product_tiling.ppm");
    if (out.ok)
        out.note << pairs << " raster pairs; images in " << g_image_dir;
}

void properties(Outcome& out)
{
    // measure_upper monotone in K
    const std::vector<std::pair<IntMatrix, DigitSet>> systems{{kDragon, kDragonDigits},
                                                              {IntMatrix{{2}}, {{0}, {3}}},
                                                              {IntMatrix{{3}}, {{0}, {1}, {5}}}};
    for (const auto& [m, d] : systems) {
        Fraction prev(1 << 30);
        for (int k = 0; k <= 12; ++k) {
            const Fraction v = measure_upper(m, d, k).union_bound;
            if (v > prev)
                out.require(false, "measure_upper increased at K=" + std::to_string(k));
            prev = v;
        }
    }
    // residue_of idempotent and translation invariant
    const IntMatrix m{{3, 1}, {-1, 2}};
    for (std::int64_t a = -15; a <= 15; ++a)
        for (std::int64_t b = -15; b <= 15; ++b) {
            const IntVec r = residue_of(m, {a, b});
            const IntVec shifted = residue_of(m, {a + 3 * 2 + 1 * (-5), b - 1 * 2 + 2 * (-5)});
            if (residue_of(m, r) != r || shifted != r || !oracle::congruent(m.rows(), {a, b}, r))
                out.require(false, "residue_of property fails");
        }
    // cancel(a, a + b) = b
    int sums = 0;
    for (std::uint32_t ma = 0; ma < 64; ++ma)
        for (std::uint32_t mb = 0; mb < 64; ++mb) {
            IntSet1D a{0}, b{0};
            for (int i = 1; i <= 6; ++i) {
                if (ma >> (i - 1) & 1)
                    a.push_back(i);
                if (mb >> (i - 1) & 1)
                    b.push_back(2 * i);
            }
            try {
                const IntSet1D s = direct_sum(a, b);
                ++sums;
                if (cancel(a, s) != b)
                    out.require(false, "cancel does not invert direct_sum");
            } catch (const Error&) {
            }
        }
    // classification and tiling oracle agree on all subsets of {0..17}
    std::size_t simple = 0;
    for (std::uint32_t mask = 0; mask < (1u << 17); ++mask) {
        IntSet1D y{0};
        for (std::int64_t i = 1; i <= 17; ++i)
            if (mask >> (i - 1) & 1)
                y.push_back(i);
        const bool c = classify(y).simple;
        const TilingResult t = tiling_oracle(y);
        if (c != t.tiles || (!t.tiles && !t.proved)) {
            out.require(false, "classify/oracle disagree on mask " + std::to_string(mask));
            break;
        }
        simple += c;
    }
    if (out.ok)
        out.note << sums << " direct sums; " << simple << " simple subsets of {0..17}";
}

} // namespace

int main(int argc, char** argv)
{
    if (argc > 1)
        g_image_dir = argv[1];
    struct Criterion {
        std::string name;
        std::function<void(Outcome&)> run;
        double time_limit; // seconds, 0 for none
    };
    const std::vector<Criterion> criteria{
        {"dragon tile", dragon_tile, 10},
        {"rectangle box tile", rectangle_tile, 0},
        {"box forms round trip", box_round_trip, 60},
        {"non-tile {0,3}", non_tile, 0},
        {"1-D example", oned_example, 1},
        {"enumeration completeness", enumeration, 120},
        {"polynomial identity", polynomial_identity, 0},
        {"Haar orthonormality", haar, 0},
        {"tensor products", tensor, 0},
        {"property suites", properties, 0},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].run(out);
        } catch (const std::exception& e) {
            out.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (criteria[i].time_limit > 0 && secs > criteria[i].time_limit)
            out.require(false, "over the " + std::to_string(static_cast<int>(criteria[i].time_limit)) + "s limit");
        failures += !out.ok;
        std::printf("%s %2zu %-26s %7.2fs  %s\n", out.ok ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(), secs,
                    out.note.str().c_str());
        std::fflush(stdout);
    }
    return failures;
}
