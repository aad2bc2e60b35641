#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ppm/types.hpp"

namespace ppm {

inline constexpr std::size_t kDefaultMaxStates = 4'000'000;

/// Composite basis |s, n_1..n_k> with n_i < cutoff and sum n_i <= cap, ordered lexicographically
/// with the system level most significant. Full index = s * tuple_count() + tuple index.
class EnrBasis {
public:
    /// cutoff <= 0 selects cap + 1.
    EnrBasis(int system_dim, int modes, int cutoff, int cap, std::size_t max_states = kDefaultMaxStates);

    int system_dim() const { return system_dim_; }
    int mode_count() const { return modes_; }
    int cutoff() const { return cutoff_; }
    int cap() const { return cap_; }
    std::size_t tuple_count() const { return tuple_count_; }
    std::size_t size() const { return tuple_count_ * static_cast<std::size_t>(system_dim_); }

    std::span<const int> tuple(std::size_t t) const;
    int occupation(std::size_t t, int mode) const { return tuple(t)[static_cast<std::size_t>(mode)]; }
    int total_occupation(std::size_t t) const;
    /// Tuple index, or -1 when the tuple is outside the set.
    std::ptrdiff_t find(std::span<const int> occ) const;

    std::size_t index(int level, std::size_t t) const { return static_cast<std::size_t>(level) * tuple_count_ + t; }
    int level_of(std::size_t i) const { return static_cast<int>(i / tuple_count_); }
    std::size_t tuple_of(std::size_t i) const { return i % tuple_count_; }

private:
    int system_dim_;
    int modes_;
    int cutoff_;
    int cap_;
    std::size_t tuple_count_ = 0;
    std::vector<int> occ_; // tuple_count_ * modes_
};

enum class Ladder { Annihilate, Create };
enum class Side { Left, Right };

/// Ladder operator on the mode tuples only (dimension tuple_count()); out-of-set transitions dropped.
SparseMatrix mode_operator_tuples(const EnrBasis& basis, int mode, Ladder kind);
/// The same operator embedded as I_S (x) op on the full basis.
SparseMatrix mode_operator(const EnrBasis& basis, int mode, Ladder kind);
/// op (x) I_modes on the full basis.
SparseMatrix system_operator(const EnrBasis& basis, const Matrix& op);

SparseMatrix identity(std::size_t n);
SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b);
/// Drops entries with |z| <= tol.
SparseMatrix pruned(SparseMatrix m, double tol = 1e-16);

/// Column-major vectorization: vec(A rho B) = (B^T (x) A) vec(rho).
/// Left lift = I (x) A, right lift = A^T (x) I in Eigen's kron(first, second) ordering.
SparseMatrix lift_super(const SparseMatrix& op, Side side);

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, Eigen::Index rows);

Matrix partial_trace_system(const Matrix& rho_full, const EnrBasis& basis);

/// rho_S (x) |vac><vac| on the full basis.
Matrix with_vacuum(const Matrix& rho_s, const EnrBasis& basis);

} // namespace ppm
