#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppm/bath.hpp"
#include "ppm/fock.hpp"
#include "ppm/model.hpp"
#include "ppm/types.hpp"

namespace ppm {

inline constexpr std::size_t kMaxGeneratorDim = 40'000'000;

/// d x/dt = L x on some vectorized representation whose system block can be read out.
class LinearGenerator {
public:
    virtual ~LinearGenerator() = default;

    virtual std::size_t dim() const = 0;
    virtual int system_dim() const = 0;
    virtual void apply(const Vector& x, Vector& y) const = 0;
    virtual SparseMatrix sparse() const = 0;
    /// rho_S (x) vacuum (hierarchy: rho_{0,0} = rho_S, every other ADO zero).
    virtual Vector initial_state(const Matrix& rho_s) const = 0;
    /// Reduced system state: partial trace, or rho_{0,0} for the hierarchy.
    virtual Matrix reduced(const Vector& x) const = 0;
    /// op rho (Left) or rho op (Right) with op a system operator, applied to the whole state.
    virtual Vector apply_system(const Matrix& op, const Vector& x, Side side) const = 0;
};

struct GeneratorMetadata {
    std::string backend;
    std::string convention;
    nlohmann::json modes;
    std::vector<double> alpha;
    int cap = 0;
    int cutoff = 0;
    /// For each degree n = 1..deg of the polynomial, the number of binomial cross-term groups (n - 1).
    std::vector<int> cross_groups;
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const GeneratorMetadata& m);

/// A superoperator on |K| x |B| matrices, where K and B are lists of full-basis indices.
/// For the purified backend K keeps states with no "-" excitations and B states with no "+"
/// excitations; every other backend uses the whole basis on both sides.
class AssembledGenerator : public LinearGenerator {
public:
    AssembledGenerator(SparseMatrix l, std::shared_ptr<const EnrBasis> basis, std::vector<std::size_t> ket,
                       std::vector<std::size_t> bra, GeneratorMetadata meta);

    std::size_t dim() const override { return static_cast<std::size_t>(l_.rows()); }
    int system_dim() const override { return basis_->system_dim(); }
    void apply(const Vector& x, Vector& y) const override { y.noalias() = l_ * x; }
    SparseMatrix sparse() const override { return l_; }
    Vector initial_state(const Matrix& rho_s) const override;
    Matrix reduced(const Vector& x) const override;
    Vector apply_system(const Matrix& op, const Vector& x, Side side) const override;

    const SparseMatrix& matrix() const { return l_; }
    const EnrBasis& basis() const { return *basis_; }
    const std::vector<std::size_t>& ket() const { return ket_; }
    const std::vector<std::size_t>& bra() const { return bra_; }
    const GeneratorMetadata& metadata() const { return meta_; }
    void add_warning(std::string w) { meta_.warnings.push_back(std::move(w)); }
    bool full_space() const { return ket_.size() == basis_->size() && bra_.size() == basis_->size(); }
    /// Tr(op rho) for a full-basis operator; requires full_space().
    cplx expectation_full(const SparseMatrix& op, const Vector& x) const;
    /// op rho or rho op for a full-basis operator; requires full_space().
    Vector apply_full(const SparseMatrix& op, const Vector& x, Side side) const;

private:
    SparseMatrix l_;
    std::shared_ptr<const EnrBasis> basis_;
    std::vector<std::size_t> ket_;
    std::vector<std::size_t> bra_;
    GeneratorMetadata meta_;
    std::size_t ket_tuples_ = 0;
    std::size_t bra_tuples_ = 0;
    // Positions (in K and B) of the level-0 entries of every tuple present on both sides.
    std::vector<std::pair<std::size_t, std::size_t>> shared_tuples_;
};

/// One term c * (left) rho (right) of the purified generator before the -i is folded in.
struct SuperTerm {
    cplx coef;
    SparseMatrix left;
    SparseMatrix right;
    std::string group;
    int degree = 0;
};

/// The operator list of L_S + L_0 + sum_n alpha_n L_int,n on the full 2N-mode basis.
std::vector<SuperTerm> ppm_terms(const SystemSpec& sys, const PseudomodeSet& modes, const CouplingPolynomial& poly,
                                 const EnrBasis& basis);

struct PurifiedAudit {
    bool ok = true;
    std::size_t violations = 0;
    std::string first_violation;
};

/// Every left factor must keep all "-" occupations and every right factor all "+" occupations.
PurifiedAudit audit_purified_structure(std::span<const SuperTerm> terms, const EnrBasis& basis, int family_size);

/// Mode-set warnings plus a trace-drift warning when a nonlinear term meets a complex sum_l w_l:
/// the vacuum part of alpha_n X^n then feeds Tr rho_S at a rate ~ alpha_n Im sum_l w_l.
std::vector<std::string> purified_warnings(const PseudomodeSet& modes, const CouplingPolynomial& poly);

/// basis must hold 2N modes ordered (1+..N+, 1-..N-).
AssembledGenerator build_ppm_generator(const SystemSpec& sys, const PseudomodeSet& modes,
                                       const CouplingPolynomial& poly, std::shared_ptr<const EnrBasis> basis);

/// basis must hold 2N + 1 modes ordered (1+..N+, 1-..N-, 0).
AssembledGenerator build_finite_a_generator(const SystemSpec& sys, const PseudomodeSet& modes,
                                            const CouplingPolynomial& poly, std::shared_ptr<const EnrBasis> basis);

/// H = H_S + nu b^dag b + s Q(lambda (b + b^dag)), dissipator gamma (2 b rho b^dag - {b^dag b, rho}).
AssembledGenerator build_exact_cavity_generator(const SystemSpec& sys, const SingleMode& cavity,
                                                const CouplingPolynomial& poly, int cavity_cap);

/// H_S and the system collapse terms only, no bath.
AssembledGenerator build_system_generator(const SystemSpec& sys);

/// Largest real part of the spectrum for generators up to max_dense_dim; nullopt if larger.
std::optional<double> max_real_eigenvalue(const LinearGenerator& gen, std::size_t max_dense_dim = 2500);

/// Adds a warning to metadata when the largest real part exceeds 1e-8.
void check_instability(AssembledGenerator& gen, std::size_t max_dense_dim = 2500);

/// ADOs rho_{m,n} = <m,0|rho|0,n> over occupation tuples m ("+" family) and n ("-" family).
class HeomHierarchy : public LinearGenerator {
public:
    /// total_cap < 0 keeps the full product set {m} x {n}; otherwise |m| + |n| <= total_cap.
    HeomHierarchy(const SystemSpec& sys, const PseudomodeSet& modes, const CouplingPolynomial& poly, int cap,
                  int cutoff = 0, int total_cap = -1);

    std::size_t dim() const override { return ado_count() * static_cast<std::size_t>(ds_ * ds_); }
    int system_dim() const override { return ds_; }
    void apply(const Vector& x, Vector& y) const override;
    SparseMatrix sparse() const override;
    Vector initial_state(const Matrix& rho_s) const override;
    Matrix reduced(const Vector& x) const override;
    Vector apply_system(const Matrix& op, const Vector& x, Side side) const override;

    std::size_t ado_count() const { return ados_.size(); }
    std::size_t coupling_count() const { return table_.size(); }
    const EnrBasis& family_basis() const { return family_; }
    /// (m tuple, n tuple) of ADO k.
    std::pair<std::size_t, std::size_t> ado(std::size_t k) const { return ados_[k]; }
    const GeneratorMetadata& metadata() const { return meta_; }

private:
    enum Factor : unsigned char { kIdentity = 0, kS = 1 };
    struct Coupling {
        std::uint32_t target;
        std::uint32_t source;
        cplx coef;
        Factor left;
        Factor right;
    };

    void add(std::size_t target_m, std::size_t target_n, std::size_t source_m, std::size_t source_n, cplx coef,
             Factor left, Factor right);

    int ds_;
    EnrBasis family_;
    std::vector<std::pair<std::size_t, std::size_t>> ados_;
    std::vector<std::ptrdiff_t> lookup_; // m * tuples + n -> ADO index or -1
    std::vector<cplx> dressing_;
    std::vector<Coupling> table_;
    Matrix s_;
    // Per-ADO system part as left/right multiplication: d rho/dt = A rho + rho B + sum_k c_k L_k rho L_k^dag.
    Matrix left_sys_;
    Matrix right_sys_;
    std::vector<std::pair<double, Matrix>> jumps_;
    GeneratorMetadata meta_;
};

} // namespace ppm
