#include "tileforge/oned.hpp"

#include "tileforge/error.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace tileforge {

void check_set(const IntSet1D& y)
{
    if (y.empty() || y.front() != 0)
        throw Error(ErrorCode::invalid_input, "set must be nonempty and start at 0");
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] <= y[i - 1])
            throw Error(ErrorCode::invalid_input, "set must be strictly increasing");
}

IntSet1D Progression::elements() const
{
    if (a < 1 || d < 1)
        throw Error(ErrorCode::invalid_input, "progression needs a >= 1 and d >= 1");
    IntSet1D out;
    for (std::int64_t i = 0; i < d; ++i)
        out.push_back(checked::mul(a, i));
    return out;
}

IntSet1D direct_sum(const IntSet1D& a, const IntSet1D& b)
{
    check_set(a);
    check_set(b);
    std::unordered_set<std::int64_t> seen;
    std::unordered_map<std::int64_t, std::pair<std::int64_t, std::int64_t>> origin;
    IntSet1D out;
    for (auto x : a)
        for (auto y : b) {
            const std::int64_t s = checked::add(x, y);
            auto [it, fresh] = origin.emplace(s, std::make_pair(x, y));
            if (!fresh)
                throw Error(ErrorCode::collision, std::to_string(it->second.first) + " + " +
                                                      std::to_string(it->second.second) + " = " + std::to_string(x) +
                                                      " + " + std::to_string(y) + " = " + std::to_string(s));
            out.push_back(s);
        }
    std::sort(out.begin(), out.end());
    return out;
}

IntSet1D cancel(const IntSet1D& a, const IntSet1D& sum)
{
    check_set(a);
    check_set(sum);
    // The smallest element left is always b + 0 for the next b.
    std::set<std::int64_t> rest(sum.begin(), sum.end());
    IntSet1D b;
    while (!rest.empty()) {
        const std::int64_t next = *rest.begin();
        for (auto x : a) {
            auto it = rest.find(next + x);
            if (it == rest.end())
                throw Error(ErrorCode::no_solution, "no B with A + B equal to the given set (missing " +
                                                        std::to_string(next + x) + ")");
            rest.erase(it);
        }
        b.push_back(next);
    }
    return b;
}

std::int64_t default_tiling_bound(const IntSet1D& y)
{
    check_set(y);
    const std::int64_t size = static_cast<std::int64_t>(y.size());
    const std::int64_t exponent = y.back() - size + 1;
    constexpr std::int64_t cap = 1'000'000;
    if (exponent >= 40)
        return cap;
    return std::min<std::int64_t>(cap, size * (std::int64_t{1} << std::max<std::int64_t>(exponent, 0)));
}

TilingResult tiling_oracle(const IntSet1D& y) { return tiling_oracle(y, default_tiling_bound(y)); }

TilingResult tiling_oracle(const IntSet1D& y, std::int64_t n_max)
{
    check_set(y);
    if (n_max < y.back() + 1)
        throw Error(ErrorCode::invalid_input, "n_max must be at least max(Y) + 1");
    TilingResult out;
    std::vector<char> covered(static_cast<std::size_t>(n_max + y.back() + 2), 0);
    std::unordered_set<std::string> states;
    std::int64_t hole = 0, top = 0;
    while (true) {
        for (auto v : y) {
            const auto at = static_cast<std::size_t>(hole + v);
            if (covered[at]) {
                out.proved = true;
                out.reason = "translate at " + std::to_string(hole) + " overlaps at " + std::to_string(hole + v);
                out.shifts.clear();
                return out;
            }
            covered[at] = 1;
        }
        out.shifts.push_back(hole);
        top = std::max(top, hole + y.back() + 1);
        while (hole < top && covered[static_cast<std::size_t>(hole)])
            ++hole;
        if (hole == top && top <= n_max) {
            out.tiles = true;
            out.n = top;
            return out;
        }
        if (top > n_max) {
            out.reason = "no tiled segment of length <= " + std::to_string(n_max);
            out.shifts.clear();
            return out;
        }
        // The search is deterministic, so a repeated frontier means a cycle.
        std::string key(covered.begin() + hole, covered.begin() + top);
        if (!states.insert(std::move(key)).second) {
            out.proved = true;
            out.reason = "search state repeats at " + std::to_string(hole);
            out.shifts.clear();
            return out;
        }
    }
}

bool is_l_set(const IntSet1D& l, std::int64_t block)
{
    if (block <= 0)
        throw Error(ErrorCode::invalid_input, "block length must be positive");
    std::unordered_set<std::int64_t> members(l.begin(), l.end());
    for (auto x : l) {
        if (x < 0)
            return false;
        const std::int64_t start = x / block * block;
        for (std::int64_t i = 0; i < block; ++i)
            if (!members.count(start + i))
                return false;
    }
    return true;
}

Classification classify(const IntSet1D& y)
{
    check_set(y);
    Classification out;
    IntSet1D cur = y;
    while (cur.size() > 1) {
        const std::int64_t a = cur[1];
        std::unordered_set<std::int64_t> members(cur.begin(), cur.end());
        std::int64_t run = 1;
        while (members.count(a * run))
            ++run;
        bool peeled = false;
        for (std::int64_t d = run; d >= 2 && !peeled; --d) {
            try {
                IntSet1D rest = cancel(Progression{a, d}.elements(), cur);
                out.progressions.push_back({a, d});
                cur = std::move(rest);
                peeled = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::no_solution)
                    throw;
            }
        }
        if (!peeled) {
            out.reason = "no progression with step " + std::to_string(a) + " splits off";
            return out;
        }
    }
    for (std::size_t k = 0; k + 1 < out.progressions.size(); ++k) {
        const auto& p = out.progressions[k];
        const auto& q = out.progressions[k + 1];
        if (q.a % (p.a * p.d) != 0) {
            out.reason = "step " + std::to_string(q.a) + " is not a multiple of " + std::to_string(p.a * p.d);
            return out;
        }
    }
    out.simple = true;
    return out;
}

Poly poly_of_set(const IntSet1D& a)
{
    if (a.empty())
        return {};
    if (*std::min_element(a.begin(), a.end()) < 0)
        throw Error(ErrorCode::invalid_input, "polynomial exponents must be nonnegative");
    Poly p(static_cast<std::size_t>(*std::max_element(a.begin(), a.end()) + 1), 0);
    for (auto x : a)
        ++p[static_cast<std::size_t>(x)];
    return p;
}

namespace {

void trim(Poly& p)
{
    while (!p.empty() && p.back() == 0)
        p.pop_back();
}

} // namespace

Poly poly_mul(const Poly& a, const Poly& b)
{
    if (a.empty() || b.empty())
        return {};
    Poly out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            out[i + j] = checked::add(out[i + j], checked::mul(a[i], b[j]));
    trim(out);
    return out;
}

bool poly_eq(const Poly& a, const Poly& b)
{
    Poly x = a, y = b;
    trim(x);
    trim(y);
    return x == y;
}

Poly progression_poly(std::int64_t a, std::int64_t d) { return poly_of_set(Progression{a, d}.elements()); }

std::optional<Poly> poly_div(const Poly& a, const Poly& b)
{
    Poly num = a, den = b;
    trim(num);
    trim(den);
    if (den.empty())
        throw Error(ErrorCode::invalid_input, "division by the zero polynomial");
    if (num.empty())
        return Poly{};
    if (num.size() < den.size())
        return std::nullopt;
    Poly q(num.size() - den.size() + 1, 0);
    const std::int64_t lead = den.back();
    for (std::size_t i = q.size(); i-- > 0;) {
        const std::int64_t top = num[i + den.size() - 1];
        if (top % lead != 0)
            return std::nullopt;
        q[i] = top / lead;
        for (std::size_t j = 0; j < den.size(); ++j)
            num[i + j] = checked::add(num[i + j], -checked::mul(q[i], den[j]));
    }
    trim(num);
    if (!num.empty())
        return std::nullopt;
    trim(q);
    return q;
}

std::vector<Progression> progression_family(const std::vector<std::int64_t>& d)
{
    std::vector<Progression> out;
    std::int64_t a = 1;
    for (auto v : d) {
        if (v < 2)
            throw Error(ErrorCode::invalid_input, "progression lengths must be >= 2");
        out.push_back({a, v});
        a = checked::mul(a, v);
    }
    return out;
}

std::vector<std::vector<std::int64_t>> ordered_factorizations(std::int64_t n)
{
    if (n < 1)
        throw Error(ErrorCode::invalid_input, "n must be positive");
    if (n == 1)
        return {{}};
    std::vector<std::vector<std::int64_t>> out;
    for (std::int64_t f = 2; f <= n; ++f) {
        if (n % f != 0)
            continue;
        for (auto rest : ordered_factorizations(n / f)) {
            rest.insert(rest.begin(), f);
            out.push_back(std::move(rest));
        }
    }
    return out;
}

std::vector<IntSet1D> enumerate_simple(std::int64_t n)
{
    if (n < 1)
        throw Error(ErrorCode::invalid_input, "n must be positive");
    std::set<IntSet1D> found;
    for (const auto& f : ordered_factorizations(n)) {
        const auto family = progression_family(f);
        if (family.size() > 30)
            throw Error(ErrorCode::resource, "too many factors");
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << family.size()); ++mask) {
            IntSet1D sum{0};
            for (std::size_t k = 0; k < family.size(); ++k)
                if (mask >> k & 1)
                    sum = direct_sum(sum, family[k].elements());
            found.insert(std::move(sum));
        }
    }
    return {found.begin(), found.end()};
}

SegmentSet normalize_segments(SegmentSet w)
{
    if (w.empty())
        throw Error(ErrorCode::invalid_input, "segment set is empty");
    for (const auto& s : w)
        if (s.length <= 0)
            throw Error(ErrorCode::invalid_input, "segment lengths must be positive");
    std::sort(w.begin(), w.end(), [](const Segment& a, const Segment& b) { return a.start < b.start; });
    SegmentSet out{w.front()};
    for (std::size_t i = 1; i < w.size(); ++i) {
        Segment& last = out.back();
        const std::int64_t end = last.start + last.length;
        if (w[i].start <= end)
            last.length = std::max(end, w[i].start + w[i].length) - last.start;
        else
            out.push_back(w[i]);
    }
    return out;
}

IntSet1D segments_to_intset(const SegmentSet& w)
{
    const SegmentSet merged = normalize_segments(w);
    const std::int64_t h = merged.front().length;
    for (const auto& s : merged)
        if (s.length != h)
            throw Error(ErrorCode::invalid_input, "segments have different lengths (" + std::to_string(h) + " and " +
                                                      std::to_string(s.length) + "); not an attractor");
    const std::int64_t origin = merged.front().start;
    IntSet1D y;
    for (const auto& s : merged)
        for (std::int64_t z = 0; z < s.length; ++z)
            y.push_back(s.start - origin + z);
    return y;
}

SegmentSet intset_to_segments(const IntSet1D& y)
{
    check_set(y);
    SegmentSet out;
    for (auto v : y) {
        if (!out.empty() && out.back().start + out.back().length == v)
            ++out.back().length;
        else
            out.push_back({v, 1});
    }
    return out;
}

std::pair<SegmentSet, std::int64_t> rescale_segments(const SegmentSet& w)
{
    SegmentSet merged = normalize_segments(w);
    const std::int64_t h = merged.front().length;
    const std::int64_t origin = merged.front().start;
    for (auto& s : merged) {
        if (s.length != h)
            throw Error(ErrorCode::invalid_input, "segments have different lengths; not an attractor");
        if ((s.start - origin) % h != 0)
            throw Error(ErrorCode::invalid_input, "segment starts are not multiples of the segment length");
        s.start = (s.start - origin) / h;
        s.length = 1;
    }
    return {merged, h};
}

IntSystem to_attractor_system(const IntSet1D& y)
{
    const TilingResult t = tiling_oracle(y);
    if (!t.tiles)
        throw Error(ErrorCode::no_solution, "set does not tile a segment: " + t.reason);
    IntSet1D scaled;
    for (auto v : y)
        scaled.push_back(checked::mul(v, t.n));
    IntSystem sys{IntMatrix::from_rows({{t.n}}), {}};
    for (auto s : direct_sum(t.shifts, scaled))
        sys.shifts.push_back({s});
    return sys;
}

} // namespace tileforge
