#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace tileforge {

using IntVec = std::vector<std::int64_t>;

/// Integer digits, one representative per class of Z^d / M Z^d.
using DigitSet = std::vector<IntVec>;

/// Arbitrary real shift vectors of a general attractor.
using ShiftSet = std::vector<Eigen::VectorXd>;

struct IntVecHash {
    std::size_t operator()(const IntVec& v) const noexcept;
};

/// Eigenvalues within this distance of the unit circle count as non-expanding.
inline constexpr double kEigenTolerance = 1e-9;

/// Square integer matrix, row-major.
class IntMatrix {
public:
    IntMatrix() = default;
    explicit IntMatrix(std::size_t dim);
    IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

    static IntMatrix from_rows(const std::vector<std::vector<std::int64_t>>& rows);
    static IntMatrix identity(std::size_t dim);
    static IntMatrix diagonal(const std::vector<std::int64_t>& diag);

    std::size_t dim() const noexcept { return dim_; }
    std::int64_t operator()(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }
    std::int64_t& operator()(std::size_t r, std::size_t c) { return a_[r * dim_ + c]; }

    /// M v with overflow checking.
    IntVec apply(const IntVec& v) const;
    /// M v + s with overflow checking.
    IntVec apply_add(const IntVec& v, const IntVec& s) const;
    IntMatrix operator*(const IntMatrix& o) const;

    std::vector<std::vector<std::int64_t>> rows() const;
    Eigen::MatrixXd to_eigen() const;

    friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

private:
    std::size_t dim_ = 0;
    std::vector<std::int64_t> a_;
};

IntMatrix block_diagonal(const IntMatrix& a, const IntMatrix& b);

/// Exact determinant (fraction-free Bareiss elimination).
std::int64_t det(const IntMatrix& m);

/// adj(M), so that M * adj(M) = det(M) * I.
IntMatrix adjugate(const IntMatrix& m);

double min_abs_eigenvalue(const Eigen::MatrixXd& m);

/// True iff every eigenvalue satisfies |lambda| > 1 + eps. For integer
/// matrices |det M| >= 2 is checked first as a necessary condition.
bool is_expanding(const IntMatrix& m, double eps = kEigenTolerance);
bool is_expanding(const Eigen::MatrixXd& m, double eps = kEigenTolerance);

/// Canonical representative of v modulo M Z^d: the unique r = v - M z lying in
/// the half-open parallelepiped M [0,1)^d. Throws Error(singular) if det M = 0.
IntVec residue_of(const IntMatrix& m, const IntVec& v);

/// All |det M| lattice points of M [0,1)^d, lexicographically sorted.
DigitSet residue_system(const IntMatrix& m);

/// |D| = |det M|, 0 in D, and the residues of all digits pairwise distinct.
bool validate_digits(const IntMatrix& m, const DigitSet& digits);

Eigen::VectorXd to_eigen(const IntVec& v);

namespace checked {
std::int64_t add(std::int64_t a, std::int64_t b);
std::int64_t mul(std::int64_t a, std::int64_t b);
std::int64_t pow(std::int64_t base, unsigned exp);
} // namespace checked

} // namespace tileforge
