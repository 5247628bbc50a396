#include "tileforge/boxtile.hpp"

#include "cell_set.hpp"
#include "tileforge/error.hpp"
#include "tileforge/hull.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tileforge {

void validate(const BoxForm& form)
{
    if (form.p.empty())
        throw Error(ErrorCode::invalid_input, "box form needs at least one p_i");
    if (form.sign != 1 && form.sign != -1)
        throw Error(ErrorCode::invalid_input, "box form sign must be +1 or -1");
    for (auto v : form.p)
        if (v < 1)
            throw Error(ErrorCode::invalid_input, "box form entries must be positive");
    if (std::all_of(form.p.begin(), form.p.end(), [](auto v) { return v == 1; }))
        throw Error(ErrorCode::invalid_input, "box form entries cannot all be 1");
}

IntMatrix build_cyclic_matrix(const BoxForm& form)
{
    validate(form);
    const std::size_t n = form.p.size();
    std::vector<std::vector<std::int64_t>> rows(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i + 1 < n; ++i)
        rows[i][i + 1] = form.p[i];
    rows[n - 1][0] = checked::add(rows[n - 1][0], form.sign * form.p[n - 1]);
    IntMatrix m = IntMatrix::from_rows(rows);
    if (!is_expanding(m))
        throw Error(ErrorCode::not_expanding, "cyclic matrix is not expanding");
    return m;
}

DigitSet box_digits(const BoxForm& form)
{
    validate(form);
    const std::size_t n = form.p.size();
    std::int64_t total = 1;
    for (auto v : form.p)
        total = checked::mul(total, v);
    if (total > 50'000'000)
        throw Error(ErrorCode::resource, "too many digits");
    DigitSet out;
    IntVec k(n, 0);
    while (true) {
        IntVec digit = k;
        digit[n - 1] *= form.sign;
        out.push_back(digit);
        std::size_t j = n;
        while (j-- > 0) {
            if (++k[j] < form.p[j])
                break;
            k[j] = 0;
        }
        if (j == static_cast<std::size_t>(-1))
            break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

IntSystem tensor_product(const IntSystem& a, const IntSystem& b)
{
    IntSystem out{block_diagonal(a.matrix, b.matrix), {}};
    for (const auto& s : a.shifts)
        for (const auto& t : b.shifts) {
            IntVec v = s;
            v.insert(v.end(), t.begin(), t.end());
            out.shifts.push_back(std::move(v));
        }
    return out;
}

RealSystem tensor_product(const RealSystem& a, const RealSystem& b)
{
    const Eigen::Index d1 = a.matrix.rows(), d2 = b.matrix.rows();
    RealSystem out{Eigen::MatrixXd::Zero(d1 + d2, d1 + d2), {}};
    out.matrix.topLeftCorner(d1, d1) = a.matrix;
    out.matrix.bottomRightCorner(d2, d2) = b.matrix;
    for (const auto& s : a.shifts)
        for (const auto& t : b.shifts) {
            Eigen::VectorXd v(d1 + d2);
            v << s, t;
            out.shifts.push_back(std::move(v));
        }
    return out;
}

std::optional<MonomialStructure> monomial_structure(const IntMatrix& m)
{
    const std::size_t n = m.dim();
    MonomialStructure out;
    out.permutation.assign(n, 0);
    out.multipliers.assign(n, 0);
    std::vector<bool> hit(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        int nonzero = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (m(i, j) != 0) {
                ++nonzero;
                out.permutation[j] = i;
                out.multipliers[j] = m(i, j);
            }
        if (nonzero != 1 || hit[out.permutation[j]])
            return std::nullopt;
        hit[out.permutation[j]] = true;
    }
    std::vector<bool> seen(n, false);
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start])
            continue;
        std::vector<std::size_t> cycle;
        for (std::size_t j = start; !seen[j]; j = out.permutation[j]) {
            seen[j] = true;
            cycle.push_back(j);
        }
        out.cycles.push_back(std::move(cycle));
    }
    return out;
}

int depth_for_budget(std::int64_t m, std::size_t cells)
{
    if (m < 2)
        throw Error(ErrorCode::invalid_input, "determinant must have absolute value >= 2");
    int k = 1;
    double total = static_cast<double>(m);
    while (total * static_cast<double>(m) <= static_cast<double>(cells)) {
        total *= static_cast<double>(m);
        ++k;
    }
    return k;
}

namespace {

// A cell c with c - v and c + v both present is a midpoint and never a hull
// vertex; v runs over e_i and e_i +- e_j.
Eigen::MatrixXd boundary_points(const AttractorApprox& approx)
{
    if (!approx.is_integer())
        return approx.points();
    const std::size_t d = approx.dim();
    detail::CellSet cells(d, approx.size());
    for (std::size_t i = 0; i < approx.size(); ++i)
        cells.insert(approx.cell(i));
    std::vector<IntVec> steps;
    for (std::size_t i = 0; i < d; ++i) {
        IntVec e(d, 0);
        e[i] = 1;
        steps.push_back(e);
        for (std::size_t j = i + 1; j < d; ++j)
            for (int sj : {-1, 1}) {
                IntVec f = e;
                f[j] = sj;
                steps.push_back(f);
            }
    }
    std::vector<Eigen::Index> keep;
    IntVec fwd(d), back(d);
    for (std::size_t i = 0; i < approx.size(); ++i) {
        auto c = approx.cell(i);
        bool midpoint = false;
        for (const auto& v : steps) {
            for (std::size_t k = 0; k < d; ++k) {
                fwd[k] = c[k] + v[k];
                back[k] = c[k] - v[k];
            }
            if (cells.contains(fwd) && cells.contains(back)) {
                midpoint = true;
                break;
            }
        }
        if (!midpoint)
            keep.push_back(static_cast<Eigen::Index>(i));
    }
    Eigen::MatrixXd out(d, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = approx.points().col(keep[j]);
    return out;
}

Eigen::MatrixXd hull_vertices(const Eigen::MatrixXd& pts, const ConvexHull& hull)
{
    const std::vector<std::size_t> corners = hull.extreme_vertices(1e-6);
    Eigen::MatrixXd out(pts.rows(), static_cast<Eigen::Index>(corners.size()));
    for (std::size_t j = 0; j < corners.size(); ++j)
        out.col(static_cast<Eigen::Index>(j)) = pts.col(static_cast<Eigen::Index>(corners[j]));
    return out;
}

double measure_of(const AttractorApprox& approx)
{
    if (!approx.is_integer())
        return rasterize(approx, default_resolution(approx)).occupied_area();
    const IntMatrix& m = approx.int_matrix();
    std::int64_t md = det(m);
    md = md < 0 ? -md : md;
    const int depth = depth_for_budget(md, std::size_t{1} << 14);
    if (validate_digits(m, approx.int_shifts())) {
        // mu(G) is a positive integer; a certified tile settles it.
        try {
            if (tile_check_exact(m, approx.int_shifts()).is_tile)
                return 1.0;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::resource)
                throw;
        }
        return measure_upper(m, approx.int_shifts(), depth).value().to_double();
    }
    return union_measure_bound(m, approx.int_shifts(), depth).value().to_double();
}

} // namespace

ParallelepipedReport is_parallelepiped(const AttractorApprox& approx, double tol)
{
    if (approx.size() == 0)
        throw Error(ErrorCode::invalid_input, "empty approximation");
    if (!(tol > 0.0 && tol < 1.0))
        throw Error(ErrorCode::invalid_input, "tolerance must lie in (0, 1)");
    const Eigen::Index d = static_cast<Eigen::Index>(approx.dim());
    ParallelepipedReport report;

    // conv(P_2K) = conv(P_K) + M^{-K} conv(P_K): each doubling squares the
    // approximation error of the hull.
    Eigen::MatrixXd pts = boundary_points(approx);
    ConvexHull hull = convex_hull(pts);
    Eigen::MatrixXd verts = hull_vertices(pts, hull);
    Eigen::MatrixXd step = Eigen::MatrixXd::Identity(d, d);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(approx.matrix());
    for (int t = 0; t < approx.depth(); ++t)
        step = lu.solve(step);
    for (int round = 0; round < 2; ++round) {
        const Eigen::Index nv = verts.cols();
        if (nv * nv > 250000)
            break;
        Eigen::MatrixXd scaled = step * verts;
        Eigen::MatrixXd sum(d, nv * nv);
        for (Eigen::Index i = 0; i < nv; ++i)
            for (Eigen::Index j = 0; j < nv; ++j)
                sum.col(i * nv + j) = verts.col(i) + scaled.col(j);
        hull = convex_hull(sum);
        verts = hull_vertices(sum, hull);
        step = step * step;
        ++report.refinements;
    }
    report.hull_volume = hull.volume;

    auto normals = hull.merged_normals(1e-6);
    const std::size_t cap = std::min<std::size_t>(normals.size(), d <= 2 ? 64 : d == 3 ? 32 : 20);
    normals.resize(cap);
    Eigen::MatrixXd dirs(static_cast<Eigen::Index>(cap), d);
    for (std::size_t i = 0; i < cap; ++i)
        dirs.row(static_cast<Eigen::Index>(i)) = normals[i].first.transpose();
    const Box range = directional_bounds(approx.matrix(), approx.shifts(), dirs);
    const Eigen::VectorXd width = range.hi - range.lo;

    // Smallest enclosing parallelepiped over d-subsets of candidate normals.
    double best = INFINITY;
    std::vector<std::size_t> best_pick;
    std::vector<std::size_t> pick(static_cast<std::size_t>(d));
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t slot, std::size_t from) {
        if (slot == pick.size()) {
            Eigen::MatrixXd n(d, d);
            double prod = 1.0;
            for (std::size_t i = 0; i < pick.size(); ++i) {
                n.row(static_cast<Eigen::Index>(i)) = dirs.row(static_cast<Eigen::Index>(pick[i]));
                prod *= width[static_cast<Eigen::Index>(pick[i])];
            }
            const double det_n = std::abs(n.determinant());
            if (det_n < 1e-9)
                return;
            const double vol = prod / det_n;
            if (vol < best) {
                best = vol;
                best_pick = pick;
            }
            return;
        }
        for (std::size_t i = from; i < cap; ++i) {
            pick[slot] = i;
            choose(slot + 1, i + 1);
        }
    };
    choose(0, 0);
    if (best_pick.empty())
        throw Error(ErrorCode::degenerate, "hull normals do not span the space");

    Eigen::MatrixXd n(d, d);
    Eigen::VectorXd lo(d), w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto j = static_cast<Eigen::Index>(best_pick[static_cast<std::size_t>(i)]);
        n.row(i) = dirs.row(j);
        lo[i] = range.lo[j];
        w[i] = width[j];
    }
    const Eigen::MatrixXd ninv = n.inverse();
    report.fit_volume = best;
    report.corner = ninv * lo;
    report.edge_vectors = ninv * w.asDiagonal();
    report.measure_estimate = measure_of(approx);
    report.is_box = report.hull_volume >= (1.0 - tol) * report.fit_volume &&
                    std::abs(report.measure_estimate - report.hull_volume) <= tol * report.hull_volume;
    return report;
}

} // namespace tileforge
