#include "tileforge/lattice.hpp"

#include "tileforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include <Eigen/Eigenvalues>

namespace tileforge {

namespace checked {

std::int64_t add(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r))
        throw Error(ErrorCode::overflow, "integer overflow in addition");
    return r;
}

std::int64_t mul(std::int64_t a, std::int64_t b)
{
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r))
        throw Error(ErrorCode::overflow, "integer overflow in multiplication");
    return r;
}

std::int64_t pow(std::int64_t base, unsigned exp)
{
    std::int64_t r = 1;
    for (unsigned i = 0; i < exp; ++i)
        r = mul(r, base);
    return r;
}

} // namespace checked

namespace {

std::int64_t narrow(__int128 v)
{
    if (v < std::numeric_limits<std::int64_t>::min() || v > std::numeric_limits<std::int64_t>::max())
        throw Error(ErrorCode::overflow, "integer result exceeds 64-bit range");
    return static_cast<std::int64_t>(v);
}

__int128 mul128(__int128 a, __int128 b)
{
    __int128 r;
    if (__builtin_mul_overflow(a, b, &r))
        throw Error(ErrorCode::overflow, "integer overflow in 128-bit product");
    return r;
}

__int128 floor_div(__int128 a, __int128 b)
{
    __int128 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

} // namespace

std::size_t IntVecHash::operator()(const IntVec& v) const noexcept
{
    std::size_t h = 0xcbf29ce484222325ull;
    for (std::int64_t x : v) {
        h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
}

IntMatrix::IntMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0) {}

IntMatrix::IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows)
{
    std::vector<std::vector<std::int64_t>> r;
    for (const auto& row : rows)
        r.emplace_back(row);
    *this = from_rows(r);
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>>& rows)
{
    if (rows.empty())
        throw Error(ErrorCode::invalid_input, "matrix must have dimension >= 1");
    IntMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.size())
            throw Error(ErrorCode::invalid_input, "matrix must be square");
        for (std::size_t j = 0; j < rows.size(); ++j)
            m(i, j) = rows[i][j];
    }
    return m;
}

IntMatrix IntMatrix::identity(std::size_t dim)
{
    IntMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i)
        m(i, i) = 1;
    return m;
}

IntMatrix IntMatrix::diagonal(const std::vector<std::int64_t>& diag)
{
    IntMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i)
        m(i, i) = diag[i];
    return m;
}

IntVec IntMatrix::apply(const IntVec& v) const
{
    IntVec r(dim_, 0);
    for (std::size_t i = 0; i < dim_; ++i) {
        __int128 acc = 0;
        for (std::size_t j = 0; j < dim_; ++j)
            acc += static_cast<__int128>((*this)(i, j)) * v[j];
        r[i] = narrow(acc);
    }
    return r;
}

IntVec IntMatrix::apply_add(const IntVec& v, const IntVec& s) const
{
    IntVec r(dim_, 0);
    for (std::size_t i = 0; i < dim_; ++i) {
        __int128 acc = s[i];
        for (std::size_t j = 0; j < dim_; ++j)
            acc += static_cast<__int128>((*this)(i, j)) * v[j];
        r[i] = narrow(acc);
    }
    return r;
}

IntMatrix IntMatrix::operator*(const IntMatrix& o) const
{
    IntMatrix r(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) {
            __int128 acc = 0;
            for (std::size_t k = 0; k < dim_; ++k)
                acc += static_cast<__int128>((*this)(i, k)) * o(k, j);
            r(i, j) = narrow(acc);
        }
    return r;
}

std::vector<std::vector<std::int64_t>> IntMatrix::rows() const
{
    std::vector<std::vector<std::int64_t>> r(dim_, std::vector<std::int64_t>(dim_));
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
            r[i][j] = (*this)(i, j);
    return r;
}

Eigen::MatrixXd IntMatrix::to_eigen() const
{
    Eigen::MatrixXd m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
            m(i, j) = static_cast<double>((*this)(i, j));
    return m;
}

IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b)
{
    IntMatrix r(a.dim() + b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            r(i, j) = a(i, j);
    for (std::size_t i = 0; i < b.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j)
            r(a.dim() + i, a.dim() + j) = b(i, j);
    return r;
}

Eigen::VectorXd to_eigen(const IntVec& v)
{
    Eigen::VectorXd r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        r[i] = static_cast<double>(v[i]);
    return r;
}

std::int64_t det(const IntMatrix& m)
{
    const std::size_t n = m.dim();
    if (n == 0)
        throw Error(ErrorCode::invalid_input, "determinant of empty matrix");
    std::vector<__int128> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i * n + j] = m(i, j);
    auto at = [&](std::size_t i, std::size_t j) -> __int128& { return a[i * n + j]; };

    int sign = 1;
    __int128 prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (at(k, k) == 0) {
            std::size_t p = k + 1;
            while (p < n && at(p, k) == 0)
                ++p;
            if (p == n)
                return 0;
            for (std::size_t j = 0; j < n; ++j)
                std::swap(at(k, j), at(p, j));
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                // Bareiss: the division is exact.
                __int128 v = mul128(at(i, j), at(k, k)) - mul128(at(i, k), at(k, j));
                at(i, j) = v / prev;
                narrow(at(i, j));
            }
            at(i, k) = 0;
        }
        prev = at(k, k);
    }
    return narrow(sign * at(n - 1, n - 1));
}

IntMatrix adjugate(const IntMatrix& m)
{
    const std::size_t n = m.dim();
    IntMatrix adj(n);
    if (n == 1) {
        adj(0, 0) = 1;
        return adj;
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            IntMatrix minor(n - 1);
            for (std::size_t i = 0, mi = 0; i < n; ++i) {
                if (i == r)
                    continue;
                for (std::size_t j = 0, mj = 0; j < n; ++j) {
                    if (j == c)
                        continue;
                    minor(mi, mj++) = m(i, j);
                }
                ++mi;
            }
            std::int64_t cof = det(minor);
            if ((r + c) % 2 == 1)
                cof = -cof;
            adj(c, r) = cof;
        }
    }
    return adj;
}

double min_abs_eigenvalue(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().cwiseAbs().minCoeff();
}

bool is_expanding(const Eigen::MatrixXd& m, double eps)
{
    if (m.rows() == 0 || m.rows() != m.cols())
        return false;
    return min_abs_eigenvalue(m) > 1.0 + eps;
}

bool is_expanding(const IntMatrix& m, double eps)
{
    std::int64_t d = det(m);
    if (d >= -1 && d <= 1)
        return false;
    return is_expanding(m.to_eigen(), eps);
}

IntVec residue_of(const IntMatrix& m, const IntVec& v)
{
    if (v.size() != m.dim())
        throw Error(ErrorCode::invalid_input, "vector dimension does not match matrix");
    const std::int64_t d = det(m);
    if (d == 0)
        throw Error(ErrorCode::singular, "residue modulo a singular matrix");
    IntMatrix adj = adjugate(m);
    const std::size_t n = m.dim();
    // z = floor(M^{-1} v) = floor(adj v / det), computed exactly.
    IntVec z(n);
    for (std::size_t i = 0; i < n; ++i) {
        __int128 w = 0;
        for (std::size_t j = 0; j < n; ++j)
            w += mul128(adj(i, j), v[j]);
        z[i] = narrow(floor_div(w, d));
    }
    IntVec mz = m.apply(z);
    IntVec r(n);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = narrow(static_cast<__int128>(v[i]) - mz[i]);
    return r;
}

DigitSet residue_system(const IntMatrix& m)
{
    const std::int64_t d = det(m);
    if (d == 0)
        throw Error(ErrorCode::singular, "residue system of a singular matrix");
    const std::size_t n = m.dim();
    IntMatrix adj = adjugate(m);

    IntVec lo(n, 0), hi(n, 0);
    __int128 box = 1;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (m(i, j) < 0)
                lo[i] += m(i, j);
            else
                hi[i] += m(i, j);
        }
        box *= (hi[i] - lo[i] + 1);
        if (box > 50'000'000)
            throw Error(ErrorCode::resource, "fundamental domain too large to enumerate");
    }

    const std::int64_t ad = d < 0 ? -d : d;
    DigitSet out;
    IntVec x = lo;
    while (true) {
        bool inside = true;
        for (std::size_t i = 0; i < n && inside; ++i) {
            __int128 w = 0;
            for (std::size_t j = 0; j < n; ++j)
                w += static_cast<__int128>(adj(i, j)) * x[j];
            // need 0 <= w / d < 1
            if (d > 0)
                inside = w >= 0 && w < d;
            else
                inside = w <= 0 && w > d;
        }
        if (inside)
            out.push_back(x);
        std::size_t k = 0;
        while (k < n && x[k] == hi[k]) {
            x[k] = lo[k];
            ++k;
        }
        if (k == n)
            break;
        ++x[k];
    }
    std::sort(out.begin(), out.end());
    if (static_cast<std::int64_t>(out.size()) != ad)
        throw Error(ErrorCode::invalid_input, "residue enumeration mismatch");
    return out;
}

bool validate_digits(const IntMatrix& m, const DigitSet& digits)
{
    const std::int64_t d = det(m);
    if (d == 0)
        return false;
    const std::int64_t ad = d < 0 ? -d : d;
    if (static_cast<std::int64_t>(digits.size()) != ad)
        return false;
    bool has_zero = false;
    std::unordered_set<IntVec, IntVecHash> seen;
    for (const IntVec& v : digits) {
        if (v.size() != m.dim())
            return false;
        if (std::all_of(v.begin(), v.end(), [](std::int64_t x) { return x == 0; }))
            has_zero = true;
        if (!seen.insert(residue_of(m, v)).second)
            return false;
    }
    return has_zero;
}

} // namespace tileforge
