#include "mfanneal/ising.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "mfanneal/rng.hpp"

namespace mfanneal {

namespace {

Eigen::MatrixXd matrix_from_entries(int n, const std::vector<CouplingEntry>& entries) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : entries) {
        if (e.i == e.j) {
            throw InputError("self-coupling at site " + std::to_string(e.i));
        }
        if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) {
            throw InputError("coupling index out of range: (" + std::to_string(e.i) + ", " +
                             std::to_string(e.j) + ")");
        }
        if (!(e.i < e.j)) {
            throw InputError("coupling pair not canonical (need i < j): (" +
                             std::to_string(e.i) + ", " + std::to_string(e.j) + ")");
        }
        if (m(e.i, e.j) != 0.0) {
            throw InputError("duplicate coupling pair (" + std::to_string(e.i) + ", " +
                             std::to_string(e.j) + ")");
        }
        m(e.i, e.j) = e.value;
        m(e.j, e.i) = e.value;
    }
    return m;
}

} // namespace

IsingInstance::IsingInstance(Eigen::VectorXd fields, const std::vector<CouplingEntry>& couplings,
                             int z)
    : fields_(std::move(fields)),
      couplings_(matrix_from_entries(static_cast<int>(fields_.size()), couplings)),
      z_(z) {
    validate();
}

IsingInstance::IsingInstance(Eigen::VectorXd fields, Eigen::MatrixXd couplings, int z)
    : fields_(std::move(fields)), couplings_(std::move(couplings)), z_(z) {
    const int n = size();
    if (couplings_.rows() != n || couplings_.cols() != n) {
        throw InputError("coupling matrix shape does not match the field count");
    }
    for (int i = 0; i < n; ++i) {
        if (couplings_(i, i) != 0.0) {
            throw InputError("self-coupling at site " + std::to_string(i));
        }
        for (int j = i + 1; j < n; ++j) {
            if (couplings_(i, j) != couplings_(j, i)) {
                throw InputError("asymmetric coupling at pair (" + std::to_string(i) + ", " +
                                 std::to_string(j) + ")");
            }
        }
    }
    validate();
}

void IsingInstance::validate() const {
    const int n = size();
    if (n < 1) {
        throw InputError("instance needs at least one site");
    }
    if (z_ < 1) {
        throw InputError("coordination number must be >= 1, got " + std::to_string(z_));
    }
    if (!fields_.allFinite() || !couplings_.allFinite()) {
        throw InputError("non-finite field or coupling value");
    }
    for (int i = 0; i < n; ++i) {
        int degree = 0;
        for (int j = 0; j < n; ++j) {
            if (couplings_(i, j) != 0.0) ++degree;
        }
        if (degree > z_) {
            throw InputError("site " + std::to_string(i) + " has " + std::to_string(degree) +
                             " nonzero couplings, above Z = " + std::to_string(z_));
        }
    }
}

std::vector<CouplingEntry> IsingInstance::coupling_entries() const {
    std::vector<CouplingEntry> out;
    const int n = size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (couplings_(i, j) != 0.0) {
                out.push_back({i, j, couplings_(i, j)});
            }
        }
    }
    return out;
}

bool IsingInstance::operator==(const IsingInstance& other) const {
    return z_ == other.z_ && fields_.size() == other.fields_.size() &&
           fields_ == other.fields_ && couplings_ == other.couplings_;
}

SpinConfiguration::SpinConfiguration(Eigen::VectorXd spins) : spins_(std::move(spins)) {
    for (Eigen::Index i = 0; i < spins_.size(); ++i) {
        if (spins_[i] != 0.5 && spins_[i] != -0.5) {
            throw InputError("spin entry " + std::to_string(i) + " is not exactly +-1/2");
        }
    }
}

SpinConfiguration SpinConfiguration::from_signs(const Eigen::VectorXd& values) {
    SpinConfiguration config;
    config.spins_.resize(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        if (values[i] == 0.0) {
            throw InputError("cannot round an exactly zero value at site " + std::to_string(i));
        }
        config.spins_[i] = values[i] > 0.0 ? 0.5 : -0.5;
    }
    return config;
}

SpinConfiguration SpinConfiguration::from_mask(std::uint64_t mask, int n) {
    SpinConfiguration config;
    config.spins_.resize(n);
    for (int k = 0; k < n; ++k) {
        config.spins_[k] = ((mask >> k) & 1u) ? -0.5 : 0.5;
    }
    return config;
}

std::uint64_t SpinConfiguration::mask() const {
    std::uint64_t m = 0;
    for (Eigen::Index k = 0; k < spins_.size(); ++k) {
        if (spins_[k] < 0.0) m |= (std::uint64_t{1} << k);
    }
    return m;
}

bool SpinConfiguration::operator==(const SpinConfiguration& other) const {
    return spins_.size() == other.spins_.size() && spins_ == other.spins_;
}

namespace {

// One shared accumulation order for all energy consumers.
template <typename SpinAt>
EnergyTerms energy_terms_impl(const IsingInstance& instance, SpinAt spin_at) {
    const int n = instance.size();
    const Eigen::MatrixXd& j = instance.couplings();
    EnergyTerms t;
    for (int i = 0; i < n; ++i) {
        const double si = spin_at(i);
        for (int k = i + 1; k < n; ++k) {
            const double jik = j(i, k);
            if (jik != 0.0) {
                t.pair_sum += 2.0 * jik * si * spin_at(k);
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        t.field_sum += instance.fields()[i] * spin_at(i);
    }
    return t;
}

} // namespace

EnergyTerms energy_terms(const IsingInstance& instance, const Eigen::VectorXd& spins) {
    return energy_terms_impl(instance, [&](int i) { return spins[i]; });
}

EnergyTerms energy_terms(const IsingInstance& instance, std::uint64_t mask) {
    return energy_terms_impl(instance,
                             [&](int i) { return ((mask >> i) & 1u) ? -0.5 : 0.5; });
}

double classical_energy(const IsingInstance& instance, const SpinConfiguration& config) {
    if (config.size() != instance.size()) {
        throw InputError("configuration length " + std::to_string(config.size()) +
                         " does not match instance size " + std::to_string(instance.size()));
    }
    const EnergyTerms t = energy_terms(instance, config.values());
    return -t.pair_sum / instance.coordination() - t.field_sum;
}

LocalFields local_fields(const IsingInstance& instance, const SpinConfiguration& config) {
    if (config.size() != instance.size()) {
        throw InputError("configuration length " + std::to_string(config.size()) +
                         " does not match instance size " + std::to_string(instance.size()));
    }
    return (2.0 / instance.coordination()) * (instance.couplings() * config.values()) +
           instance.fields();
}

bool is_one_flip_local_min(const IsingInstance& instance, const SpinConfiguration& config) {
    const LocalFields b = local_fields(instance, config);
    for (int i = 0; i < instance.size(); ++i) {
        if (config.values()[i] * b[i] < 0.0) return false;
    }
    return true;
}

GroundResult brute_force_ground(const IsingInstance& instance, int site_limit) {
    const int n = instance.size();
    if (n > site_limit) {
        throw CapabilityError("brute force limited to " + std::to_string(site_limit) +
                              " sites, instance has " + std::to_string(n));
    }
    const std::uint64_t total = std::uint64_t{1} << n;
    GroundResult result;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::uint64_t> tied;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        const EnergyTerms t = energy_terms(instance, mask);
        const double e = -t.pair_sum / instance.coordination() - t.field_sum;
        if (e < best) {
            best = e;
            tied.clear();
            tied.push_back(mask);
        } else if (e == best) {
            tied.push_back(mask);
        }
    }
    result.energy = best;
    result.minimizers.reserve(tied.size());
    for (std::uint64_t mask : tied) {
        result.minimizers.push_back(SpinConfiguration::from_mask(mask, n));
    }
    return result;
}

int ZRule::resolve(int n) const {
    if (fixed_z) return *fixed_z;
    return std::max(1, n - 1);
}

IsingInstance generate_instance(int n, std::uint64_t seed, const UniformDist& dist,
                                const ZRule& z_rule) {
    if (n < 1) {
        throw InputError("site count must be >= 1");
    }
    if (!(dist.lo < dist.hi) || !std::isfinite(dist.lo) || !std::isfinite(dist.hi)) {
        throw InputError("invalid distribution bounds [" + std::to_string(dist.lo) + ", " +
                         std::to_string(dist.hi) + ")");
    }
    std::mt19937_64 gen(seed);
    const double span = dist.hi - dist.lo;
    auto draw = [&] { return dist.lo + uniform_unit(gen()) * span; };

    Eigen::VectorXd fields(n);
    for (int i = 0; i < n; ++i) fields[i] = draw();
    Eigen::MatrixXd couplings = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double v = draw();
            couplings(i, j) = v;
            couplings(j, i) = v;
        }
    }
    return IsingInstance(std::move(fields), std::move(couplings), z_rule.resolve(n));
}

IsingInstance read_instance(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("instance JSON: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw InputError("instance document must be a JSON object");
        const int n = doc.at("n").get<int>();
        const int z = doc.at("z").get<int>();
        const auto& jf = doc.at("fields");
        if (!jf.is_array() || static_cast<int>(jf.size()) != n) {
            throw InputError("fields array length does not match n = " + std::to_string(n));
        }
        Eigen::VectorXd fields(n);
        for (int i = 0; i < n; ++i) fields[i] = jf.at(i).get<double>();
        std::vector<CouplingEntry> entries;
        for (const auto& jc : doc.at("couplings")) {
            entries.push_back({jc.at("i").get<int>(), jc.at("j").get<int>(),
                               jc.at("value").get<double>()});
        }
        return IsingInstance(std::move(fields), entries, z);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("instance JSON: ") + e.what());
    }
}

std::string write_instance(const IsingInstance& instance) {
    nlohmann::json doc;
    doc["n"] = instance.size();
    doc["z"] = instance.coordination();
    doc["fields"] = std::vector<double>(instance.fields().begin(), instance.fields().end());
    nlohmann::json couplings = nlohmann::json::array();
    for (const auto& e : instance.coupling_entries()) {
        couplings.push_back({{"i", e.i}, {"j", e.j}, {"value", e.value}});
    }
    doc["couplings"] = std::move(couplings);
    return doc.dump();
}

} // namespace mfanneal
