#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tileforge/attractor.hpp"
#include "tileforge/fraction.hpp"
#include "tileforge/lattice.hpp"

namespace tileforge {

/// Helmert vectors e_s = (1, ..., 1, -s, 0, ..., 0) / sqrt(s(s+1)), s = 1..m-1.
struct HyperplaneBasis {
    std::int64_t m = 0;
    std::vector<std::vector<std::int64_t>> numerators; // integer directions
    std::vector<std::int64_t> norms2;                  // s(s+1)
    std::vector<Eigen::VectorXd> vectors;              // normalised
};

HyperplaneBasis hyperplane_basis(std::int64_t m);

struct HaarPiece {
    std::size_t digit = 0;  // the piece M^{-1}(G + d_k)
    double coefficient = 0; // sqrt(m) (e_s)_k
};

struct HaarSystem {
    IntMatrix matrix;
    DigitSet digits;
    HyperplaneBasis basis;
    std::vector<std::vector<HaarPiece>> pieces; // one list per wavelet
    bool tile = false;                          // certified by tile_check_exact

    std::size_t wavelet_count() const noexcept { return pieces.size(); }
};

HaarSystem build_wavelets(const IntMatrix& matrix, const DigitSet& digits);
HaarSystem build_wavelets(const IntMatrix& matrix, const DigitSet& digits, const HyperplaneBasis& basis);

/// Index 0 is the scaling function chi_G, index s >= 1 the wavelet psi_s.
struct HaarFunction {
    std::size_t index = 0;
    IntVec translate; // f(x) = base(x - translate); empty means zero
};

/// Value of a function on the piece with leading digit k.
double piece_value(const HaarSystem& sys, std::size_t index, std::size_t digit);

/// Exact inner products for certified tiles: every piece has measure exactly
/// 1/m and integer translates overlap in measure zero.
std::optional<QuadraticSurd> exact_inner_product(const HaarSystem& sys, const HaarFunction& f, const HaarFunction& g);
/// Exact integral of a function over R^d (tiles only).
std::optional<QuadraticSurd> exact_mean(const HaarSystem& sys, std::size_t index);

struct QuadratureParams {
    int depth = 12;
    int resolution = 64;
};

struct QuadratureValue {
    double value = 0.0;
    double error_bound = 0.0;
};

/// Raster of G with the leading digit of each covered cell.
class HaarRaster {
public:
    HaarRaster(const HaarSystem& sys, const QuadratureParams& params);

    const Raster& raster() const noexcept { return raster_; }
    double cell_volume() const noexcept { return cell_volume_; }
    /// Leading digit of the cell containing x, or -1 outside G.
    int digit_at(const Eigen::VectorXd& x) const;
    double evaluate(std::size_t index, const Eigen::VectorXd& x) const;
    QuadratureValue inner_product(const HaarFunction& f, const HaarFunction& g) const;

private:
    const HaarSystem* sys_;
    int resolution_;
    Raster raster_;
    double cell_volume_ = 0.0;
    std::vector<int> label_;    // per raster cell, -1 if not covered
    std::vector<bool> clean_;   // full count and a single leading digit
    std::vector<std::int64_t> offset_;

    int label_global(const std::vector<std::int64_t>& cell) const;
    bool clean_global(const std::vector<std::int64_t>& cell) const;
};

QuadratureValue inner_product(const HaarSystem& sys, const HaarFunction& f, const HaarFunction& g,
                              const QuadratureParams& params);

struct GramReport {
    Eigen::MatrixXd gram; // over chi_G, psi_1, ..., psi_{m-1}
    std::optional<std::vector<std::vector<QuadraticSurd>>> exact;
    double max_deviation = 0.0; // max |gram - I|
    double error_bound = 0.0;
    bool raster = false;
};

/// Exact when the system is a certified tile and `force_raster` is off.
GramReport gram(const HaarSystem& sys, const QuadratureParams& params, bool force_raster = false);

struct ShiftReport {
    double max_deviation = 0.0;
    IntVec worst;
    std::vector<std::pair<IntVec, double>> overlaps; // <chi_G, chi_G(. + k)>
};

/// max over k in the window of |<chi_G, chi_G(. + k)> - delta_{k0}| by raster quadrature.
ShiftReport shift_orthonormality(const IntMatrix& matrix, const DigitSet& digits, const IntBox& window,
                                 const QuadratureParams& params);

} // namespace tileforge
