// tileforge: command-line front end for the tiling library.
//
// Exit codes: 0 success, 1 verified negative, 2 input error, 3 resource cap.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "tileforge/attractor.hpp"
#include "tileforge/boxtile.hpp"
#include "tileforge/error.hpp"
#include "tileforge/haar.hpp"
#include "tileforge/json_io.hpp"
#include "tileforge/oned.hpp"
#include "tileforge/render.hpp"

using namespace tileforge;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kInputError = 2;
constexpr int kResource = 3;

std::string read_source(const std::string& source)
{
    if (!source.empty() && source.front() == '{')
        return source;
    if (source == "-")
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    std::ifstream f(source);
    if (!f)
        throw Error(ErrorCode::invalid_input, "cannot read '" + source + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

ProblemSpec load(const std::string& source) { return parse_problem_text(read_source(source)); }

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

std::int64_t abs_det(const IntMatrix& m)
{
    const std::int64_t d = det(m);
    return d < 0 ? -d : d;
}

std::size_t shift_count(const ProblemSpec& spec)
{
    return spec.real_system ? spec.real_system->shifts.size() : spec.int_data().shifts.size();
}

int pick_depth(const ProblemSpec& spec, int flag, std::size_t budget)
{
    if (flag > 0)
        return flag;
    if (spec.params.depth)
        return *spec.params.depth;
    const auto n = static_cast<std::int64_t>(shift_count(spec));
    return std::max<int>(static_cast<int>(spec.dim()), depth_for_budget(std::max<std::int64_t>(n, 2), budget));
}

AttractorApprox approximate_spec(const ProblemSpec& spec, int depth)
{
    if (spec.real_system)
        return approximate(*spec.real_system, depth);
    return approximate(spec.int_data(), depth);
}

std::vector<std::int64_t> parse_list(const std::string& text)
{
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size())
            throw Error(ErrorCode::invalid_input, "not an integer: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int parse_sign(const std::string& s)
{
    if (s == "+" || s == "1" || s == "+1")
        return 1;
    if (s == "-" || s == "-1")
        return -1;
    throw Error(ErrorCode::invalid_input, "sign must be + or -");
}

IntBox window_around(const Box& b)
{
    IntBox w;
    for (Eigen::Index k = 0; k < b.lo.size(); ++k) {
        w.lo.push_back(static_cast<std::int64_t>(std::floor(-b.hi[k])) - 1);
        w.hi.push_back(static_cast<std::int64_t>(std::ceil(1.0 - b.lo[k])) + 1);
    }
    return w;
}

std::vector<IntVec> window_translates(const std::string& text, std::size_t d)
{
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::invalid_input, "tiling window must look like LO:HI");
    const auto lo = parse_list(text.substr(0, colon));
    const auto hi = parse_list(text.substr(colon + 1));
    if (lo.size() != 1 || hi.size() != 1 || lo[0] > hi[0])
        throw Error(ErrorCode::invalid_input, "tiling window must look like LO:HI with LO <= HI");
    std::vector<IntVec> out;
    IntVec k(d, lo[0]);
    while (true) {
        out.push_back(k);
        std::size_t j = 0;
        while (j < d && k[j] == hi[0]) {
            k[j] = lo[0];
            ++j;
        }
        if (j == d)
            break;
        ++k[j];
    }
    return out;
}

// Tiling shifts of a factor: the oracle's L for 1-D sets, else the listed
// translates (or just 0).
std::vector<IntVec> factor_translates(const ProblemSpec& spec)
{
    if (spec.kind == ProblemKind::oned) {
        std::vector<IntVec> out;
        for (auto l : tiling_oracle(*spec.set).shifts)
            out.push_back({l});
        return out;
    }
    if (!spec.translates.empty())
        return spec.translates;
    return {IntVec(spec.dim(), 0)};
}

struct Options {
    std::string spec;
    std::string spec_b;
    std::string out;
    std::string tiling;
    std::string list;
    std::string sign = "+";
    int depth = 0;
    int resolution = 0;
    double tol = kBoxTolerance;
    std::int64_t nmax = 0;
    std::int64_t block = 0;
    std::int64_t n = 0;
    bool raster = false;
    bool with_translates = false;
};

int tile_check(const Options& o)
{
    const ProblemSpec spec = load(o.spec);
    if (spec.kind == ProblemKind::attractor && !spec.residue_digits)
        throw Error(ErrorCode::invalid_input, "tile check needs a residue digit set (\"digits\")");
    if (spec.kind == ProblemKind::oned)
        throw Error(ErrorCode::invalid_input, "tile check needs a residue digit set; use oned oracle for 1-D sets");
    const IntSystem sys = spec.int_data();
    const TileCheck t = tile_check_exact(sys.matrix, sys.shifts);
    json j = to_json(t);

    const int depth = pick_depth(spec, o.depth, std::size_t{1} << 16);
    const MeasureBound mb = measure_upper(sys.matrix, sys.shifts, std::min(depth, depth_for_budget(abs_det(sys.matrix), std::size_t{1} << 14)));
    j["measure_upper"] = mb.value().to_double();
    j["measure_bound"] = to_json(mb);

    const AttractorApprox approx = approximate(sys, depth);
    const double res = o.resolution > 0 ? o.resolution : spec.params.resolution ? *spec.params.resolution : default_resolution(approx);
    const IntBox window = window_around(attractor_bounds(sys.matrix.to_eigen(), to_real(sys).shifts));
    j["layers_histogram"] = to_json(shift_cover_layers(approx, window, res));
    j["depth"] = depth;
    emit(j);
    return t.verdict == TileVerdict::not_tile ? kNegative : kOk;
}

int tile_measure(const Options& o)
{
    const ProblemSpec spec = load(o.spec);
    if (spec.real_system)
        throw Error(ErrorCode::invalid_input, "measure bounds need integer data");
    const IntSystem sys = spec.int_data();
    const int depth = o.depth > 0 ? o.depth : spec.params.depth ? *spec.params.depth : depth_for_budget(abs_det(sys.matrix), std::size_t{1} << 14);
    const bool residue = validate_digits(sys.matrix, sys.shifts);
    emit(to_json(residue ? measure_upper(sys.matrix, sys.shifts, depth) : union_measure_bound(sys.matrix, sys.shifts, depth)));
    return kOk;
}

int tile_render(const Options& o)
{
    const ProblemSpec spec = load(o.spec);
    if (o.out.empty())
        throw Error(ErrorCode::invalid_input, "--out is required");
    const int depth = pick_depth(spec, o.depth, std::size_t{1} << 18);
    const AttractorApprox approx = approximate_spec(spec, depth);
    RenderOptions ro;
    ro.resolution = o.resolution > 0 ? o.resolution : spec.params.resolution ? *spec.params.resolution : static_cast<int>(default_resolution(approx));
    ro.translates = spec.translates;
    if (!o.tiling.empty()) {
        auto more = window_translates(o.tiling, spec.dim());
        ro.translates.insert(ro.translates.end(), more.begin(), more.end());
    }
    const Image img = render(approx, ro);
    write_ppm(img, o.out);
    json j;
    j["path"] = o.out;
    j["width"] = img.width;
    j["height"] = img.height;
    j["depth"] = depth;
    j["resolution"] = ro.resolution;
    j["covered_pixels"] = covered_pixels(img);
    j["translates"] = ro.translates.empty() ? 1 : ro.translates.size();
    emit(j);
    return kOk;
}

BoxForm form_of(const Options& o)
{
    return BoxForm{parse_list(o.list), parse_sign(o.sign)};
}

json monomial_json(const IntMatrix& m)
{
    const auto ms = monomial_structure(m);
    if (!ms)
        return nullptr;
    json j;
    j["permutation"] = ms->permutation;
    j["multipliers"] = ms->multipliers;
    j["cycles"] = ms->cycles;
    j["single_cycle"] = ms->single_cycle();
    return j;
}

int box_build(const Options& o)
{
    const BoxForm f = form_of(o);
    const IntMatrix m = build_cyclic_matrix(f);
    const DigitSet d = box_digits(f);
    json j;
    j["matrix"] = to_json(m);
    j["digits"] = to_json(d);
    j["determinant"] = det(m);
    j["digit_count"] = d.size();
    j["monomial"] = monomial_json(m);
    emit(j);
    return kOk;
}

int box_digits_cmd(const Options& o)
{
    json j;
    j["digits"] = to_json(box_digits(form_of(o)));
    emit(j);
    return kOk;
}

int box_detect(const Options& o)
{
    const ProblemSpec spec = load(o.spec);
    const int depth = pick_depth(spec, o.depth, std::size_t{1} << 16);
    const double tol = o.tol != kBoxTolerance ? o.tol : spec.params.tolerance;
    const ParallelepipedReport r = is_parallelepiped(approximate_spec(spec, depth), tol);
    json j = to_json(r);
    j["depth"] = depth;
    if (!spec.real_system)
        j["monomial"] = monomial_json(spec.int_data().matrix);
    emit(j);
    return r.is_box ? kOk : kNegative;
}

HaarSystem haar_of(const ProblemSpec& spec)
{
    if (spec.kind == ProblemKind::oned || (spec.kind == ProblemKind::attractor && !spec.residue_digits))
        throw Error(ErrorCode::invalid_input, "Haar systems need a residue digit set");
    const IntSystem sys = spec.int_data();
    return build_wavelets(sys.matrix, sys.shifts);
}

int haar_build(const Options& o)
{
    emit(to_json(haar_of(load(o.spec))));
    return kOk;
}

int haar_gram(const Options& o)
{
    const ProblemSpec spec = load(o.spec);
    const HaarSystem h = haar_of(spec);
    QuadratureParams q;
    q.depth = pick_depth(spec, o.depth, std::size_t{1} << 16);
    q.resolution = o.resolution > 0 ? o.resolution : spec.params.resolution.value_or(64);
    const GramReport g = gram(h, q, o.raster);
    json j = to_json(g);
    double off = 0.0;
    for (Eigen::Index r = 0; r < g.gram.rows(); ++r)
        for (Eigen::Index c = 0; c < g.gram.cols(); ++c)
            if (r != c)
                off = std::max(off, std::abs(g.gram(r, c)));
    j["max_off_diagonal"] = off;
    if (g.raster) {
        j["depth"] = q.depth;
        j["resolution"] = q.resolution;
    }
    emit(j);
    return kOk;
}

// A comma list like 0,3,6 or a oned problem (file, "-" or inline JSON).
IntSet1D load_set(const std::string& text)
{
    if (text.find_first_not_of("0123456789, -") == std::string::npos && text != "-")
        return parse_list(text);
    const ProblemSpec spec = load(text);
    if (spec.kind != ProblemKind::oned)
        throw Error(ErrorCode::invalid_input, "expected a oned problem or a comma-separated set");
    return *spec.set;
}

int oned_oracle(const Options& o)
{
    const IntSet1D y = load_set(o.list);
    const TilingResult t = o.nmax > 0 ? tiling_oracle(y, o.nmax) : tiling_oracle(y);
    emit(to_json(t));
    return t.tiles ? kOk : kNegative;
}

int oned_classify(const Options& o)
{
    const Classification c = classify(load_set(o.list));
    emit(to_json(c));
    return c.simple ? kOk : kNegative;
}

int oned_enumerate(const Options& o)
{
    const auto sets = enumerate_simple(o.n);
    json j;
    j["n"] = o.n;
    j["count"] = sets.size();
    j["sets"] = sets;
    emit(j);
    return kOk;
}

int oned_lset(const Options& o)
{
    const bool ok = is_l_set(parse_list(o.list), o.block);
    json j;
    j["is_l_set"] = ok;
    j["block"] = o.block;
    emit(j);
    return ok ? kOk : kNegative;
}

int product(const Options& o)
{
    const ProblemSpec a = load(o.spec);
    const ProblemSpec b = load(o.spec_b);
    ProblemSpec out;
    out.kind = ProblemKind::attractor;
    if (a.real_system || b.real_system) {
        out.real_system = tensor_product(a.real_data(), b.real_data());
    } else {
        out.int_system = tensor_product(a.int_data(), b.int_data());
        out.residue_digits = validate_digits(out.int_system->matrix, out.int_system->shifts);
    }
    if (o.with_translates) {
        for (const auto& s : factor_translates(a))
            for (const auto& t : factor_translates(b)) {
                IntVec v = s;
                v.insert(v.end(), t.begin(), t.end());
                out.translates.push_back(std::move(v));
            }
    }
    emit(problem_to_json(out));
    return kOk;
}

int exit_code_for(ErrorCode c) { return c == ErrorCode::resource ? kResource : kInputError; }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Self-affine tiles: tile checks, box tiles, Haar systems and 1-D attractors"};
    app.require_subcommand(1);
    Options o;
    int (*action)(const Options&) = nullptr;

    auto spec_arg = [&](CLI::App* c) { c->add_option("spec", o.spec, "problem JSON file, '-' for stdin, or inline JSON")->required(); };
    auto depth_arg = [&](CLI::App* c) { c->add_option("--depth,-K", o.depth, "approximation depth"); };
    auto res_arg = [&](CLI::App* c) { c->add_option("--resolution,-r", o.resolution, "raster cells per unit length"); };

    auto* tile = app.add_subcommand("tile", "attractor checks and rendering")->require_subcommand(1);
    auto* check = tile->add_subcommand("check", "contact-matrix tile test, measure bound, layer histogram");
    spec_arg(check);
    depth_arg(check);
    res_arg(check);
    check->callback([&] { action = tile_check; });
    auto* measure = tile->add_subcommand("measure", "upper bound for the Lebesgue measure");
    spec_arg(measure);
    depth_arg(measure);
    measure->callback([&] { action = tile_measure; });
    auto* rend = tile->add_subcommand("render", "write a PPM image");
    spec_arg(rend);
    depth_arg(rend);
    res_arg(rend);
    rend->add_option("--out,-o", o.out, "output path")->required();
    rend->add_option("--tiling", o.tiling, "also draw the integer translates in [LO,HI]^d, e.g. -1:1");
    rend->callback([&] { action = tile_render; });

    auto* box = app.add_subcommand("box", "box tiles in cyclic normal form")->require_subcommand(1);
    for (auto [name, help, fn] : {std::tuple{"build", "matrix and digits of a cyclic form", &box_build},
                                  std::tuple{"digits", "digits of a cyclic form", &box_digits_cmd}}) {
        auto* c = box->add_subcommand(name, help);
        c->add_option("-p", o.list, "p_1,...,p_n")->required();
        c->add_option("--sign", o.sign, "+ or -");
        c->callback([&, fn = fn] { action = fn; });
    }
    auto* detect = box->add_subcommand("detect", "parallelepiped test");
    spec_arg(detect);
    depth_arg(detect);
    detect->add_option("--tol", o.tol, "relative tolerance");
    detect->callback([&] { action = box_detect; });

    auto* haar = app.add_subcommand("haar", "Haar wavelets of a tile")->require_subcommand(1);
    auto* hb = haar->add_subcommand("build", "wavelet pieces and coefficients");
    spec_arg(hb);
    hb->callback([&] { action = haar_build; });
    auto* hg = haar->add_subcommand("gram", "Gram matrix of chi_G and the wavelets");
    spec_arg(hg);
    depth_arg(hg);
    res_arg(hg);
    hg->add_flag("--raster", o.raster, "use raster quadrature even for certified tiles");
    hg->callback([&] { action = haar_gram; });

    auto* oned = app.add_subcommand("oned", "one-dimensional integer attractors")->require_subcommand(1);
    auto* oo = oned->add_subcommand("oracle", "segment tiling by translates");
    oo->add_option("set", o.list, "comma-separated set containing 0, or a oned problem")->required();
    oo->add_option("--nmax", o.nmax, "largest segment length to try");
    oo->callback([&] { action = oned_oracle; });
    auto* oc = oned->add_subcommand("classify", "decompose into progressions");
    oc->add_option("set", o.list, "comma-separated set containing 0, or a oned problem")->required();
    oc->callback([&] { action = oned_classify; });
    auto* oe = oned->add_subcommand("enumerate", "all simple attractors tiling {0..N-1}");
    oe->add_option("n", o.n, "segment length")->required()->check(CLI::Range(std::int64_t{1}, std::int64_t{1} << 20));
    oe->callback([&] { action = oned_enumerate; });
    auto* ol = oned->add_subcommand("lset", "union of aligned blocks test");
    ol->add_option("set", o.list, "comma-separated set")->required();
    ol->add_option("--block,-l", o.block, "block length")->required();
    ol->callback([&] { action = oned_lset; });

    auto* prod = app.add_subcommand("product", "tensor product of two problems");
    prod->add_option("a", o.spec, "first problem")->required();
    prod->add_option("b", o.spec_b, "second problem")->required();
    prod->add_flag("--with-translates", o.with_translates, "add products of the factors' tiling translates");
    prod->callback([&] { action = product; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        return action(o);
    } catch (const Error& e) {
        json j;
        j["error"] = to_string(e.code());
        j["message"] = e.what();
        std::cerr << j.dump() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        json j;
        j["error"] = "internal";
        j["message"] = e.what();
        std::cerr << j.dump() << '\n';
        return kInputError;
    }
}
