#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tileforge/attractor.hpp"

namespace tileforge {

/// Strictly increasing nonnegative integers starting at 0.
using IntSet1D = std::vector<std::int64_t>;
/// Integer polynomial, coefficient of z^i at index i.
using Poly = std::vector<std::int64_t>;

/// Throws Error(invalid_input) unless the set is strictly increasing,
/// nonempty and starts at 0.
void check_set(const IntSet1D& y);

/// {0, a, ..., a(d-1)}
struct Progression {
    std::int64_t a = 1;
    std::int64_t d = 2;

    IntSet1D elements() const;
    friend bool operator==(const Progression&, const Progression&) = default;
};

/// Sum set; throws Error(collision) naming a pair of equal sums.
IntSet1D direct_sum(const IntSet1D& a, const IntSet1D& b);
/// The unique B with A (+) B = sum; throws Error(no_solution) otherwise.
IntSet1D cancel(const IntSet1D& a, const IntSet1D& sum);

struct TilingResult {
    bool tiles = false;
    std::int64_t n = 0; // covered segment {0, ..., n-1}
    IntSet1D shifts;    // L with Y (+) L = {0, ..., n-1}
    /// For failures: true when non-existence is proved (overlap or a repeated
    /// search state), false when only the bound n_max was hit.
    bool proved = false;
    std::string reason;
};

std::int64_t default_tiling_bound(const IntSet1D& y);
/// Places Y at the leftmost uncovered integer until the covered set is a
/// prefix {0, ..., n-1}. Since 0 is in Y that move is forced.
TilingResult tiling_oracle(const IntSet1D& y, std::int64_t n_max);
TilingResult tiling_oracle(const IntSet1D& y);

bool is_l_set(const IntSet1D& l, std::int64_t block);

struct Classification {
    bool simple = false;
    std::vector<Progression> progressions; // increasing steps
    std::string reason;                    // why not simple
};

/// Greedy peel of maximal progressions; simple iff the chain
/// a_k d_k | a_{k+1} holds.
Classification classify(const IntSet1D& y);

Poly poly_of_set(const IntSet1D& a);
Poly poly_mul(const Poly& a, const Poly& b);
bool poly_eq(const Poly& a, const Poly& b);
/// P_d(z^a) = 1 + z^a + ... + z^{a(d-1)}
Poly progression_poly(std::int64_t a, std::int64_t d);
/// Exact division; std::nullopt when b does not divide a over Z.
std::optional<Poly> poly_div(const Poly& a, const Poly& b);

/// a_k = d_1 ... d_{k-1}
std::vector<Progression> progression_family(const std::vector<std::int64_t>& d);
std::vector<std::vector<std::int64_t>> ordered_factorizations(std::int64_t n);
/// All direct sums of subsets of progression_family(f) over ordered
/// factorizations f of n; sorted and deduplicated.
std::vector<IntSet1D> enumerate_simple(std::int64_t n);

struct Segment {
    std::int64_t start = 0;
    std::int64_t length = 1;
    friend bool operator==(const Segment&, const Segment&) = default;
};
using SegmentSet = std::vector<Segment>;

/// Merges touching segments; throws on empty or nonpositive lengths.
SegmentSet normalize_segments(SegmentSet w);
/// Y = {z : [z, z+1] in W} after translating W to start at 0. All maximal
/// segments must have the same length.
IntSet1D segments_to_intset(const SegmentSet& w);
/// Maximal runs of Y, each as a segment of W = Y + [0, 1].
SegmentSet intset_to_segments(const IntSet1D& y);
/// Divides by the common segment length h when every start is a multiple
/// of h (relative to the first); returns (W / h, h).
std::pair<SegmentSet, std::int64_t> rescale_segments(const SegmentSet& w);

/// System x -> (x + s) / N with shifts L (+) N Y whose attractor is Y + [0, 1].
IntSystem to_attractor_system(const IntSet1D& y);

} // namespace tileforge
