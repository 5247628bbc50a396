#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tileforge/fraction.hpp"
#include "tileforge/lattice.hpp"

namespace tileforge {

/// Integer dilation with integer shifts (digits when they form a residue system).
struct IntSystem {
    IntMatrix matrix;
    std::vector<IntVec> shifts;
};

/// General attractor data: any expanding real matrix and real shifts.
struct RealSystem {
    Eigen::MatrixXd matrix;
    ShiftSet shifts;
};

RealSystem to_real(const IntSystem& s);

/// Cell budget for approximations: TILEFORGE_MAX_CELLS if set, else 2^22.
std::size_t max_cells();

/// Axis-aligned box in R^d.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
    double volume() const;
};

/// Certified coordinate bounds of the attractor of x -> M^{-1}(x + s).
/// Partial sums of max_s (M^{-j} s)_i plus a geometric tail bound.
Box attractor_bounds(const Eigen::MatrixXd& matrix, const ShiftSet& shifts);
/// Certified range of n . x over G for every row n of `directions`
/// (the support function in both directions).
Box directional_bounds(const Eigen::MatrixXd& matrix, const ShiftSet& shifts, const Eigen::MatrixXd& directions);

/// Depth-K approximation of G. Cell z stands for M^{-K}(z + G); the point
/// M^{-K} z is itself a point of G (the digit expansion truncated after K terms).
class AttractorApprox {
public:
    std::size_t dim() const noexcept { return dim_; }
    int depth() const noexcept { return depth_; }
    std::size_t size() const noexcept { return leading_.size(); }
    bool is_integer() const noexcept { return int_matrix_.has_value(); }

    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    const ShiftSet& shifts() const noexcept { return shifts_; }
    /// Integer data; throw Error(invalid_input) for general systems.
    const IntMatrix& int_matrix() const;
    const std::vector<IntVec>& int_shifts() const;

    /// Integer cell i (only for integer systems).
    std::span<const std::int64_t> cell(std::size_t i) const;
    IntVec cell_vec(std::size_t i) const;
    /// Real coordinates M^{-K} z of every cell, one column per cell.
    const Eigen::MatrixXd& points() const noexcept { return points_; }
    /// Index of the leading shift (the M^{-1} term) of each cell's expansion.
    const std::vector<std::uint32_t>& leading_shift() const noexcept { return leading_; }

private:
    friend AttractorApprox approximate(const IntMatrix&, const std::vector<IntVec>&, int);
    friend AttractorApprox approximate(const Eigen::MatrixXd&, const ShiftSet&, int);

    std::size_t dim_ = 0;
    int depth_ = 0;
    Eigen::MatrixXd matrix_;
    ShiftSet shifts_;
    std::optional<IntMatrix> int_matrix_;
    std::vector<IntVec> int_shifts_;
    std::vector<std::int64_t> cells_; // flat, dim_ per cell
    Eigen::MatrixXd points_;
    std::vector<std::uint32_t> leading_;
};

/// All distinct truncated sums sum_{k=1..K} M^{K-k} s_{n_k}, sorted
/// lexicographically. Throws Error(resource) past max_cells().
AttractorApprox approximate(const IntMatrix& matrix, const std::vector<IntVec>& shifts, int depth);
AttractorApprox approximate(const IntSystem& sys, int depth);
/// General system. Points are deduplicated up to 1e-12 relative to the
/// attractor diameter.
AttractorApprox approximate(const Eigen::MatrixXd& matrix, const ShiftSet& shifts, int depth);
AttractorApprox approximate(const RealSystem& sys, int depth);

/// Upper bounds on the Lebesgue measure of G.
struct MeasureBound {
    /// min over k <= depth of |D_k + Q| / |det M|^k, where Q is the set of
    /// unit lattice cubes meeting the certified bounding box of G.
    Fraction union_bound;
    /// floor(union_bound); a valid bound for residue digit sets because mu(G)
    /// is then a positive integer. Meaningful only when `integral` is set.
    std::int64_t integral_bound = 0;
    bool integral = false;
    int depth = 0;

    /// The tightest certified bound: the integral one when available.
    Fraction value() const { return integral ? Fraction(integral_bound) : union_bound; }
};

/// Union-of-cubes bound for any integer shift set (no integrality step).
MeasureBound union_measure_bound(const IntMatrix& matrix, const std::vector<IntVec>& shifts, int depth);
/// Non-increasing in depth, converges to mu(G). Requires validate_digits.
MeasureBound measure_upper(const IntMatrix& matrix, const DigitSet& digits, int depth);

/// Transition counts on candidate overlap translations:
/// count(k, k') = #{(a, b) in D x D : k' = M k + b - a}.
struct ContactMatrix {
    std::vector<IntVec> states;
    std::vector<std::size_t> row_start; // CSR
    std::vector<std::uint32_t> col;
    std::vector<std::uint32_t> count;

    std::size_t size() const noexcept { return states.size(); }
    std::uint32_t at(std::size_t row, std::size_t column) const;
    /// y = T x
    std::vector<double> apply(const std::vector<double>& x) const;
};

enum class TileVerdict { tile, not_tile, indeterminate };
const char* to_string(TileVerdict v) noexcept;

inline constexpr double kPowerTolerance = 1e-10;
inline constexpr int kPowerIterationCap = 100000;
inline constexpr double kGapTolerance = 1e-6;

struct TileCheck {
    TileVerdict verdict = TileVerdict::indeterminate;
    bool is_tile = false;
    std::int64_t digit_count = 0;
    /// Power-iteration estimate of the Perron root and a Collatz-Wielandt
    /// upper bound for it.
    double spectral_radius = 0.0;
    double radius_upper = 0.0;
    int iterations = 0;
    /// True when an exact nonnegative eigenvector for eigenvalue m was found.
    bool exact_certificate = false;
    std::vector<double> perron_vector;
    /// mu(G) when it is pinned down (1 for tiles; 2 when the measure bound
    /// leaves no other option).
    std::optional<std::int64_t> measure;
    ContactMatrix contact;
};

/// Measure-one test. The overlap function f(k) = mu(G cap (G + k)) satisfies
/// m f = T f on nonzero translations, and rho(T) <= m always, so G is a tile
/// iff rho(T) < m.
TileCheck tile_check_exact(const IntMatrix& matrix, const DigitSet& digits);

/// Pixel grid with a point count per cell.
struct Raster {
    Eigen::VectorXd origin;
    double cell_size = 1.0;
    std::vector<std::int64_t> extent;
    std::vector<std::uint32_t> occupancy;

    std::size_t dim() const noexcept { return extent.size(); }
    std::size_t flat_index(std::span<const std::int64_t> idx) const;
    std::vector<std::int64_t> cell_of(const Eigen::VectorXd& x) const;
    /// Half the median of the nonzero counts (at least 1). Cells at or above
    /// it count as covered; this discards thinly hit boundary cells.
    std::uint32_t threshold() const;
    std::size_t occupied_count() const;
    double occupied_area() const;
    /// Fraction of occupied cells whose count differs from the median.
    double boundary_fraction() const;
};

/// Marks the raster cell of every point M^{-K} z. Throws on resolution <= 0.
Raster rasterize(const AttractorApprox& approx, double resolution);
/// Power-of-two resolution at which the median occupied cell holds >= 4 points.
double default_resolution(const AttractorApprox& approx);

/// Symmetric-difference fraction between the raster of level K and the
/// union over s of the level K-1 raster mapped by x -> M^{-1}(x + s).
double self_similarity_residual(const AttractorApprox& approx);
double self_similarity_residual(const AttractorApprox& approx, double resolution);

struct IntBox {
    IntVec lo;
    IntVec hi;
};

struct LayerHistogram {
    std::map<std::int64_t, std::size_t> counts; // layer count -> number of cells
    std::int64_t dominant = 0;
    double boundary_fraction = 0.0; // share of cells whose count is not dominant
    double resolution = 0.0;
};

/// Number of integer translates G + k, k in window, covering each raster cell
/// of the unit cube [0,1)^d. Uses a power-of-two resolution so translates are
/// raster-aligned. Throws if the window misses translates that reach the cube.
LayerHistogram shift_cover_layers(const AttractorApprox& approx, const IntBox& window);
LayerHistogram shift_cover_layers(const AttractorApprox& approx, const IntBox& window, double resolution);

} // namespace tileforge
