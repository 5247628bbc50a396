#include "tileforge/haar.hpp"

#include "tileforge/error.hpp"

#include <algorithm>
#include <cmath>

namespace tileforge {

HyperplaneBasis hyperplane_basis(std::int64_t m)
{
    if (m < 2)
        throw Error(ErrorCode::invalid_input, "hyperplane basis needs m >= 2");
    HyperplaneBasis b;
    b.m = m;
    for (std::int64_t s = 1; s < m; ++s) {
        std::vector<std::int64_t> a(static_cast<std::size_t>(m), 0);
        for (std::int64_t i = 0; i < s; ++i)
            a[static_cast<std::size_t>(i)] = 1;
        a[static_cast<std::size_t>(s)] = -s;
        const std::int64_t n2 = s * (s + 1);
        Eigen::VectorXd v(m);
        for (std::int64_t i = 0; i < m; ++i)
            v[i] = static_cast<double>(a[static_cast<std::size_t>(i)]) / std::sqrt(static_cast<double>(n2));
        b.numerators.push_back(std::move(a));
        b.norms2.push_back(n2);
        b.vectors.push_back(std::move(v));
    }
    return b;
}

HaarSystem build_wavelets(const IntMatrix& matrix, const DigitSet& digits)
{
    return build_wavelets(matrix, digits, hyperplane_basis(static_cast<std::int64_t>(digits.size())));
}

HaarSystem build_wavelets(const IntMatrix& matrix, const DigitSet& digits, const HyperplaneBasis& basis)
{
    for (const auto& d : digits)
        if (d.size() != matrix.dim())
            throw Error(ErrorCode::invalid_input, "digit dimension does not match matrix");
    if (!validate_digits(matrix, digits))
        throw Error(ErrorCode::invalid_input, "digits do not form a residue system containing 0");
    if (basis.m != static_cast<std::int64_t>(digits.size()))
        throw Error(ErrorCode::invalid_input, "basis size does not match digit count");

    HaarSystem sys{matrix, digits, basis, {}};
    const double root_m = std::sqrt(static_cast<double>(basis.m));
    for (const auto& e : basis.vectors) {
        std::vector<HaarPiece> list;
        for (std::size_t k = 0; k < digits.size(); ++k)
            list.push_back({k, root_m * e[static_cast<Eigen::Index>(k)]});
        sys.pieces.push_back(std::move(list));
    }
    try {
        sys.tile = tile_check_exact(matrix, digits).is_tile;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::resource)
            throw;
    }
    return sys;
}

double piece_value(const HaarSystem& sys, std::size_t index, std::size_t digit)
{
    if (index == 0)
        return 1.0;
    if (index > sys.pieces.size() || digit >= sys.digits.size())
        throw Error(ErrorCode::invalid_input, "function or digit index out of range");
    return sys.pieces[index - 1][digit].coefficient;
}

namespace {

void check_index(const HaarSystem& sys, std::size_t index)
{
    if (index > sys.wavelet_count())
        throw Error(ErrorCode::invalid_input, "function index out of range");
}

IntVec translate_of(const HaarSystem& sys, const HaarFunction& f)
{
    if (f.translate.empty())
        return IntVec(sys.matrix.dim(), 0);
    if (f.translate.size() != sys.matrix.dim())
        throw Error(ErrorCode::invalid_input, "translate dimension does not match system");
    return f.translate;
}

} // namespace

std::optional<QuadraticSurd> exact_mean(const HaarSystem& sys, std::size_t index)
{
    check_index(sys, index);
    if (!sys.tile)
        return std::nullopt;
    if (index == 0)
        return QuadraticSurd{Fraction(1), Fraction(1)};
    // sqrt(m) / sqrt(n_s) * sum(a) / m
    std::int64_t sum = 0;
    for (auto a : sys.basis.numerators[index - 1])
        sum += a;
    return QuadraticSurd{Fraction(sum), Fraction(1, checked::mul(sys.basis.m, sys.basis.norms2[index - 1]))}.normalized();
}

std::optional<QuadraticSurd> exact_inner_product(const HaarSystem& sys, const HaarFunction& f, const HaarFunction& g)
{
    check_index(sys, f.index);
    check_index(sys, g.index);
    if (!sys.tile)
        return std::nullopt;
    if (translate_of(sys, f) != translate_of(sys, g))
        return QuadraticSurd{Fraction(0), Fraction(1)};

    // <f, g> = sum_k c_f(k) c_g(k) / m with c = 1 for chi_G and
    // c = sqrt(m) a_k / sqrt(n_s) for psi_s.
    const std::int64_t m = sys.basis.m;
    auto numer = [&](std::size_t index, std::size_t k) -> std::int64_t {
        return index == 0 ? 1 : sys.basis.numerators[index - 1][k];
    };
    std::int64_t dot = 0;
    for (std::size_t k = 0; k < static_cast<std::size_t>(m); ++k)
        dot = checked::add(dot, checked::mul(numer(f.index, k), numer(g.index, k)));
    // Scale factor squared: (1/m)^2 * prod over the two functions of (m / n_s or 1).
    Fraction radicand(1, checked::mul(m, m));
    for (std::size_t index : {f.index, g.index})
        radicand = radicand * (index == 0 ? Fraction(1) : Fraction(m, sys.basis.norms2[index - 1]));
    return QuadraticSurd{Fraction(dot), radicand}.normalized();
}

HaarRaster::HaarRaster(const HaarSystem& sys, const QuadratureParams& params) : sys_(&sys), resolution_(params.resolution)
{
    if (params.resolution <= 0)
        throw Error(ErrorCode::invalid_input, "resolution must be positive");
    const AttractorApprox approx = approximate(sys.matrix, sys.digits, params.depth);
    raster_ = rasterize(approx, params.resolution);
    const std::size_t d = approx.dim();
    cell_volume_ = std::pow(raster_.cell_size, static_cast<double>(d));
    for (std::size_t k = 0; k < d; ++k)
        offset_.push_back(static_cast<std::int64_t>(std::llround(raster_.origin[static_cast<Eigen::Index>(k)] * params.resolution)));

    const std::size_t cells = raster_.occupancy.size();
    const std::size_t m = sys.digits.size();
    if (static_cast<double>(cells) * static_cast<double>(m) > 6.4e7)
        throw Error(ErrorCode::resource, "label raster too large");
    std::vector<std::uint32_t> votes(cells * m, 0);
    for (std::size_t i = 0; i < approx.size(); ++i) {
        const auto idx = raster_.cell_of(approx.points().col(static_cast<Eigen::Index>(i)));
        std::vector<std::int64_t> clamped(d);
        for (std::size_t k = 0; k < d; ++k)
            clamped[k] = std::clamp<std::int64_t>(idx[k], 0, raster_.extent[k] - 1);
        ++votes[raster_.flat_index(clamped) * m + approx.leading_shift()[i]];
    }

    std::vector<std::uint32_t> nz;
    for (auto c : raster_.occupancy)
        if (c > 0)
            nz.push_back(c);
    std::uint32_t median = 1;
    if (!nz.empty()) {
        auto mid = nz.begin() + static_cast<std::ptrdiff_t>(nz.size() / 2);
        std::nth_element(nz.begin(), mid, nz.end());
        median = *mid;
    }
    const std::uint32_t th = raster_.threshold();
    label_.assign(cells, -1);
    clean_.assign(cells, false);
    for (std::size_t c = 0; c < cells; ++c) {
        if (raster_.occupancy[c] < th)
            continue;
        const auto* v = votes.data() + c * m;
        const auto best = std::max_element(v, v + m);
        label_[c] = static_cast<int>(best - v);
        clean_[c] = raster_.occupancy[c] >= median && *best == raster_.occupancy[c];
    }
}

int HaarRaster::label_global(const std::vector<std::int64_t>& cell) const
{
    std::vector<std::int64_t> local(cell.size());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        local[k] = cell[k] - offset_[k];
        if (local[k] < 0 || local[k] >= raster_.extent[k])
            return -1;
    }
    return label_[raster_.flat_index(local)];
}

bool HaarRaster::clean_global(const std::vector<std::int64_t>& cell) const
{
    std::vector<std::int64_t> local(cell.size());
    for (std::size_t k = 0; k < cell.size(); ++k) {
        local[k] = cell[k] - offset_[k];
        if (local[k] < 0 || local[k] >= raster_.extent[k])
            return true; // far outside G
    }
    return clean_[raster_.flat_index(local)];
}

int HaarRaster::digit_at(const Eigen::VectorXd& x) const
{
    std::vector<std::int64_t> cell(static_cast<std::size_t>(x.size()));
    for (Eigen::Index k = 0; k < x.size(); ++k)
        cell[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(x[k] * resolution_ + 1e-9));
    return label_global(cell);
}

double HaarRaster::evaluate(std::size_t index, const Eigen::VectorXd& x) const
{
    check_index(*sys_, index);
    const int k = digit_at(x);
    return k < 0 ? 0.0 : piece_value(*sys_, index, static_cast<std::size_t>(k));
}

QuadratureValue HaarRaster::inner_product(const HaarFunction& f, const HaarFunction& g) const
{
    check_index(*sys_, f.index);
    check_index(*sys_, g.index);
    const IntVec tf = translate_of(*sys_, f);
    const IntVec tg = translate_of(*sys_, g);
    const std::size_t d = tf.size();

    // <f, g> = sum over cells y of G of base_f(y) base_g(y + tf - tg).
    QuadratureValue out;
    std::vector<std::int64_t> local(d), global(d), other(d);
    for (std::size_t c = 0; c < label_.size(); ++c) {
        if (label_[c] < 0)
            continue;
        std::size_t rem = c;
        for (std::size_t k = 0; k < d; ++k) {
            local[k] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(raster_.extent[k]));
            rem /= static_cast<std::size_t>(raster_.extent[k]);
            global[k] = local[k] + offset_[k];
            other[k] = global[k] + (tf[k] - tg[k]) * resolution_;
        }
        const int lg = label_global(other);
        if (lg < 0) {
            if (!clean_[c] || !clean_global(other))
                out.error_bound += std::abs(piece_value(*sys_, f.index, static_cast<std::size_t>(label_[c]))) *
                                   sys_->basis.m * cell_volume_;
            continue;
        }
        const double term = piece_value(*sys_, f.index, static_cast<std::size_t>(label_[c])) *
                            piece_value(*sys_, g.index, static_cast<std::size_t>(lg));
        out.value += term * cell_volume_;
        if (!clean_[c] || !clean_global(other))
            out.error_bound += static_cast<double>(sys_->basis.m) * cell_volume_;
    }
    return out;
}

QuadratureValue inner_product(const HaarSystem& sys, const HaarFunction& f, const HaarFunction& g,
                              const QuadratureParams& params)
{
    if (auto exact = exact_inner_product(sys, f, g))
        return {exact->to_double(), 0.0};
    return HaarRaster(sys, params).inner_product(f, g);
}

GramReport gram(const HaarSystem& sys, const QuadratureParams& params, bool force_raster)
{
    const std::size_t n = sys.wavelet_count() + 1;
    GramReport report;
    report.gram = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (sys.tile && !force_raster) {
        std::vector<std::vector<QuadraticSurd>> exact(n, std::vector<QuadraticSurd>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                exact[i][j] = *exact_inner_product(sys, {i, {}}, {j, {}});
                report.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = exact[i][j].to_double();
            }
        report.exact = std::move(exact);
    } else {
        const HaarRaster raster(sys, params);
        report.raster = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const QuadratureValue v = raster.inner_product({i, {}}, {j, {}});
                report.gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.value;
                report.gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v.value;
                report.error_bound = std::max(report.error_bound, v.error_bound);
            }
    }
    report.max_deviation =
        (report.gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))
            .cwiseAbs()
            .maxCoeff();
    return report;
}

ShiftReport shift_orthonormality(const IntMatrix& matrix, const DigitSet& digits, const IntBox& window,
                                 const QuadratureParams& params)
{
    const std::size_t d = matrix.dim();
    if (window.lo.size() != d || window.hi.size() != d)
        throw Error(ErrorCode::invalid_input, "window dimension does not match matrix");
    HaarSystem sys = build_wavelets(matrix, digits);
    sys.tile = false; // always measure on the raster
    const HaarRaster raster(sys, params);

    ShiftReport report;
    IntVec k = window.lo;
    for (std::size_t i = 0; i < d; ++i)
        if (window.hi[i] < window.lo[i])
            return report;
    while (true) {
        IntVec neg(d);
        for (std::size_t i = 0; i < d; ++i)
            neg[i] = -k[i];
        const double v = raster.inner_product({0, {}}, {0, neg}).value;
        const bool zero = std::all_of(k.begin(), k.end(), [](auto x) { return x == 0; });
        const double dev = std::abs(v - (zero ? 1.0 : 0.0));
        report.overlaps.push_back({k, v});
        if (dev > report.max_deviation || report.worst.empty()) {
            report.max_deviation = std::max(report.max_deviation, dev);
            if (dev >= report.max_deviation)
                report.worst = k;
        }
        std::size_t j = 0;
        while (j < d && k[j] == window.hi[j]) {
            k[j] = window.lo[j];
            ++j;
        }
        if (j == d)
            break;
        ++k[j];
    }
    return report;
}

} // namespace tileforge
