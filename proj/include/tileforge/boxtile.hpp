#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tileforge/attractor.hpp"
#include "tileforge/lattice.hpp"

namespace tileforge {

/// Cyclic normal form: superdiagonal p_1..p_{n-1}, corner sign * p_n.
struct BoxForm {
    std::vector<std::int64_t> p;
    int sign = 1;
};

/// Throws Error(invalid_input) unless every p_i >= 1, not all p_i == 1,
/// and sign is +1 or -1.
void validate(const BoxForm& form);

IntMatrix build_cyclic_matrix(const BoxForm& form);
/// {(k_1, ..., k_{n-1}, sign * k_n) : 0 <= k_i < p_i}, lexicographic.
DigitSet box_digits(const BoxForm& form);

/// Block-diagonal matrix and product shifts (s1, s2) in row-major order
/// over (s1, s2).
IntSystem tensor_product(const IntSystem& a, const IntSystem& b);
RealSystem tensor_product(const RealSystem& a, const RealSystem& b);

/// M e_j = multiplier[j] * e_{permutation[j]}.
struct MonomialStructure {
    std::vector<std::size_t> permutation;
    std::vector<std::int64_t> multipliers;
    std::vector<std::vector<std::size_t>> cycles;

    bool single_cycle() const noexcept { return cycles.size() == 1; }
};

/// std::nullopt when some column does not have exactly one nonzero entry.
std::optional<MonomialStructure> monomial_structure(const IntMatrix& m);

struct ParallelepipedReport {
    bool is_box = false;
    /// Columns are the edge vectors of the best enclosing parallelepiped.
    Eigen::MatrixXd edge_vectors;
    /// Its lower corner: the box is corner + edges * [0,1]^d.
    Eigen::VectorXd corner;
    double hull_volume = 0.0;
    double fit_volume = 0.0;
    double measure_estimate = 0.0;
    int refinements = 0;
};

inline constexpr double kBoxTolerance = 0.05;

/// Compares the convex hull of G with the smallest parallelepiped whose facet
/// normals come from the hull and whose widths are the exact support widths
/// of G. Throws Error(degenerate) for lower-dimensional point clouds.
ParallelepipedReport is_parallelepiped(const AttractorApprox& approx, double tol = kBoxTolerance);

/// Largest depth with m^K at most `cells` (at least 1).
int depth_for_budget(std::int64_t m, std::size_t cells);

} // namespace tileforge
