#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfanneal/errors.hpp"

namespace mfanneal {

struct CouplingEntry {
    int i;
    int j;
    double value;
};

/// An Ising problem: symmetric pair couplings J_ij (stored dense with zero
/// diagonal), on-site fields J_i, and the coordination number Z used to
/// normalize the interaction term. Z is data, not inferred: generated
/// ensembles use Z = n-1 while small hand-built instances often use Z = 1.
///
/// The energy of a classical configuration sigma (entries +-1/2) is
///   E = -(1/Z) * sum_{mu,nu} J_{mu nu} sigma_mu sigma_nu - sum_mu J_mu sigma_mu
/// with the double sum over ordered pairs, so each stored unordered pair
/// contributes twice.
class IsingInstance {
public:
    IsingInstance(Eigen::VectorXd fields, const std::vector<CouplingEntry>& couplings, int z);
    IsingInstance(Eigen::VectorXd fields, Eigen::MatrixXd couplings, int z);

    int size() const { return static_cast<int>(fields_.size()); }
    int coordination() const { return z_; }
    const Eigen::VectorXd& fields() const { return fields_; }
    const Eigen::MatrixXd& couplings() const { return couplings_; }
    double coupling(int i, int j) const { return couplings_(i, j); }

    /// Stored pairs in canonical (i < j, row-major) order, zeros skipped.
    std::vector<CouplingEntry> coupling_entries() const;

    bool operator==(const IsingInstance& other) const;

private:
    void validate() const;

    Eigen::VectorXd fields_;
    Eigen::MatrixXd couplings_;
    int z_ = 1;
};

/// A classical spin assignment; every entry is exactly +1/2 or -1/2.
class SpinConfiguration {
public:
    explicit SpinConfiguration(Eigen::VectorXd spins);

    /// sign(v_i)/2 per site; rejects exact zeros.
    static SpinConfiguration from_signs(const Eigen::VectorXd& values);

    /// Bit k of `mask` encodes site k: 0 -> +1/2, 1 -> -1/2.
    static SpinConfiguration from_mask(std::uint64_t mask, int n);

    const Eigen::VectorXd& values() const { return spins_; }
    int size() const { return static_cast<int>(spins_.size()); }
    std::uint64_t mask() const;

    bool operator==(const SpinConfiguration& other) const;

private:
    SpinConfiguration() = default;
    Eigen::VectorXd spins_;
};

/// Effective local fields b_mu = (2/Z) sum_nu J_{mu nu} sigma_nu + J_mu.
using LocalFields = Eigen::VectorXd;

struct GroundResult {
    double energy = 0.0;
    std::vector<SpinConfiguration> minimizers; // all exact ties
};

/// The two energy sums, accumulated in a fixed order so that every consumer
/// (classical energy, brute force, Hamiltonian diagonal) sees bit-identical
/// arithmetic: pair_sum = sum_{i<j} 2 J_ij s_i s_j, field_sum = sum_i J_i s_i.
struct EnergyTerms {
    double pair_sum = 0.0;
    double field_sum = 0.0;
};

EnergyTerms energy_terms(const IsingInstance& instance, const Eigen::VectorXd& spins);
EnergyTerms energy_terms(const IsingInstance& instance, std::uint64_t mask);

double classical_energy(const IsingInstance& instance, const SpinConfiguration& config);

LocalFields local_fields(const IsingInstance& instance, const SpinConfiguration& config);

/// True iff no single spin flip strictly lowers the classical energy;
/// equivalently sigma_mu * b_mu >= 0 for every site (b_mu = 0 is free).
bool is_one_flip_local_min(const IsingInstance& instance, const SpinConfiguration& config);

inline constexpr int kExhaustiveSiteLimit = 20;

/// Exact minimum over all 2^n configurations, with every exact tie returned.
GroundResult brute_force_ground(const IsingInstance& instance,
                                int site_limit = kExhaustiveSiteLimit);

struct UniformDist {
    double lo = -1.0;
    double hi = 1.0;
};

struct ZRule {
    static ZRule n_minus_one() { return ZRule{std::nullopt}; }
    static ZRule fixed(int z) { return ZRule{z}; }
    int resolve(int n) const;

    std::optional<int> fixed_z;
};

/// Fully connected instance with couplings and fields drawn independently
/// from `dist`. Identical (n, seed, dist, z_rule) give a bit-identical
/// instance. Draw order: fields 0..n-1, then pairs (i,j) in canonical order.
IsingInstance generate_instance(int n, std::uint64_t seed, const UniformDist& dist = {},
                                const ZRule& z_rule = ZRule::n_minus_one());

/// JSON schema: {"n": int, "z": int, "fields": [f; n],
///               "couplings": [{"i": int, "j": int, "value": f}]}, i < j.
IsingInstance read_instance(const std::string& text);
std::string write_instance(const IsingInstance& instance);

} // namespace mfanneal
