// Integration acceptance suite: one pass/fail line per criterion.
// Exit status is the number of failed criteria. An optional argv[1] runs a
// single criterion by number.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mfanneal/exact.hpp"
#include "mfanneal/flow.hpp"
#include "mfanneal/harness.hpp"
#include "mfanneal/ising.hpp"

using namespace mfanneal;

namespace {

struct CriterionResult {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

IsingInstance two_spin(double j1, double j2, double j12 = 1.0, int z = 1) {
    Eigen::VectorXd fields(2);
    fields << j1, j2;
    return IsingInstance(fields, std::vector<CouplingEntry>{{0, 1, j12}}, z);
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

constexpr std::uint64_t kSweepSeed = 20260809;

SweepConfig sweep_config(int threads) {
    SweepConfig config;
    config.n_list = {4, 8, 16, 32, 64, 128, 256};
    config.samples_per_n = 200;
    config.master_seed = kSweepSeed;
    config.oracle_limit = 16;
    config.threads = threads;
    return config;
}

const SweepResult& shared_sweep() {
    static SweepResult result = [] {
        std::cerr << "# running the reference sweep (7 site counts x 200 samples)..."
                  << std::endl;
        const auto start = std::chrono::steady_clock::now();
        SweepResult r = run_multiqubit_sweep(sweep_config(2));
        std::cerr << "# sweep finished in " << fmt(seconds_since(start)) << " s" << std::endl;
        return r;
    }();
    return result;
}

std::string sweep_bytes(const SweepResult& result) {
    std::ostringstream out;
    write_sweep_csv(out, result.records);
    write_curve_csv(out, result.curve);
    write_histogram_csv(out, result.histogram);
    return out.str();
}

// 1. Two-spin regression: J1 = -0.9, J2 = 3, J12 = 1, Z = 1 must be flagged
//    Singular with s_sing in [0.87, 0.91], in under a second.
CriterionResult criterion1() {
    const auto start = std::chrono::steady_clock::now();
    const SolveOutcome out = integrate(two_spin(-0.9, 3.0));
    const double elapsed = seconds_since(start);
    CriterionResult r;
    if (out.status != SolveStatus::Singular) {
        r.detail = "expected Singular, flow ended with status " +
                   std::string(out.status == SolveStatus::Converged ? "converged" : "degenerate") +
                   " (runtime " + fmt(elapsed) + " s)";
        return r;
    }
    const double s = *out.s_sing;
    r.pass = s >= 0.87 && s <= 0.91 && elapsed < 1.0;
    r.detail = "singular at s_sing = " + fmt(s) + ", expected [0.87, 0.91]; runtime " +
               fmt(elapsed) + " s";
    return r;
}

// 2. Same instance: exact ground magnetizations show zero sign changes on
//    s in (0,1) while the flow trace flips exactly one spin before ending.
CriterionResult criterion2() {
    const IsingInstance inst = two_spin(-0.9, 3.0);
    const auto samples = magnetization_trace(inst, 200);
    std::vector<int> exact_flips(2, 0);
    for (int site = 0; site < 2; ++site) {
        std::vector<double> series;
        for (const auto& sample : samples) {
            if (sample.s > 0.0 && sample.s < 1.0) series.push_back(sample.m[site]);
        }
        exact_flips[site] = count_sign_changes(series);
    }
    const SolveOutcome out = integrate(inst);
    int mf_sites_flipped = 0;
    for (int site = 0; site < 2; ++site) {
        std::vector<double> series;
        for (const FlowSample& sample : out.trace) series.push_back(sample.state.sz[site]);
        if (count_sign_changes(series) > 0) ++mf_sites_flipped;
    }
    CriterionResult r;
    r.pass = exact_flips[0] == 0 && exact_flips[1] == 0 && mf_sites_flipped == 1;
    r.detail = "exact sign changes = {" + std::to_string(exact_flips[0]) + ", " +
               std::to_string(exact_flips[1]) + "} (expected {0, 0}); flow spins flipped = " +
               std::to_string(mf_sites_flipped) + " (expected 1)";
    return r;
}

// 3. Default two-spin grid: converged fraction within [0.65, 0.80] and every
//    converged cell matches the brute-force ground set. Under 30 s.
CriterionResult criterion3() {
    const auto start = std::chrono::steady_clock::now();
    const auto cells = run_two_spin_scan(Scan2Config{});
    const double elapsed = seconds_since(start);
    int converged = 0;
    int mismatched = 0;
    for (const Scan2Cell& cell : cells) {
        if (cell.outcome == RunOutcome::Converged) {
            ++converged;
            if (!cell.mf_matches_exact || !*cell.mf_matches_exact) ++mismatched;
        }
    }
    const double fraction = static_cast<double>(converged) / cells.size();
    CriterionResult r;
    r.pass = fraction >= 0.65 && fraction <= 0.80 && mismatched == 0 && elapsed < 30.0;
    r.detail = "converged fraction " + fmt(fraction) + " (band [0.65, 0.80]), " +
               std::to_string(mismatched) + " converged cells off the ground set; runtime " +
               fmt(elapsed) + " s";
    return r;
}

// 4. Exact minimum gap stays above 1e-6 on every cell of the grid.
CriterionResult criterion4() {
    const auto start = std::chrono::steady_clock::now();
    Scan2Config config;
    double worst = 1e300;
    double worst_j1 = 0.0, worst_j2 = 0.0;
    for (int a = 0; a < config.j1_range.steps; ++a) {
        for (int b = 0; b < config.j2_range.steps; ++b) {
            const double j1 = config.j1_range.value(a);
            const double j2 = config.j2_range.value(b);
            const GapScan scan = gap_scan(two_spin(j1, j2, config.j12, config.z), 200);
            if (scan.min_gap < worst) {
                worst = scan.min_gap;
                worst_j1 = j1;
                worst_j2 = j2;
            }
        }
    }
    const double elapsed = seconds_since(start);
    CriterionResult r;
    r.pass = worst > 1e-6 && elapsed < 120.0;
    r.detail = "smallest min_gap " + fmt(worst) + " at (J1, J2) = (" + fmt(worst_j1) + ", " +
               fmt(worst_j2) + "); runtime " + fmt(elapsed) + " s";
    return r;
}

// 5. Equation-level properties over 1000 random instances, n in 4..10.
CriterionResult criterion5() {
    std::mt19937_64 gen(424242);
    int fail_fixed_point = 0, fail_residual = 0, fail_length = 0, fail_energy = 0,
        fail_exact = 0, fail_run = 0;
    int converged_count = 0, singular_count = 0;
    for (int round = 0; round < 1000; ++round) {
        const int n = 4 + static_cast<int>(gen() % 7);
        const IsingInstance inst = generate_instance(n, gen());
        SolveOutcome out;
        try {
            out = integrate(inst);
        } catch (const std::exception&) {
            ++fail_run;
            continue;
        }
        for (const FlowSample& sample : out.trace) {
            const double worst_len = (sample.diag.sx.array().square() +
                                      sample.state.sz.array().square() - 0.25)
                                         .abs()
                                         .maxCoeff();
            if (worst_len > 1e-10) {
                ++fail_length;
                break;
            }
        }
        if (out.status != SolveStatus::Singular) {
            for (const FlowSample& sample : out.trace) {
                const double residual =
                    (sample.state.sz - on_shell_sz(sample.diag.a)).cwiseAbs().maxCoeff();
                if (residual > 1e-6) {
                    ++fail_residual;
                    break;
                }
            }
        } else {
            ++singular_count;
        }
        if (out.status == SolveStatus::Converged) {
            ++converged_count;
            if (!is_one_flip_local_min(inst, *out.spins)) ++fail_fixed_point;
            // E_MF evaluated at s = 1 with the rounded spins and sx = 0
            const Eigen::VectorXd sigma = out.spins->values();
            const double e_mf_s1 = -sigma.dot(inst.couplings() * sigma) / inst.coordination() -
                                   inst.fields().dot(sigma);
            if (std::abs(e_mf_s1 - *out.e0) > 1e-6) ++fail_energy;
        }
        if (lowest_two(inst, 1.0).point.e0 != brute_force_ground(inst).energy) ++fail_exact;
    }
    CriterionResult r;
    r.pass = fail_fixed_point == 0 && fail_residual == 0 && fail_length == 0 &&
             fail_energy == 0 && fail_exact == 0 && fail_run == 0 && converged_count > 0;
    r.detail = "violations: fixed-point " + std::to_string(fail_fixed_point) + ", on-shell " +
               std::to_string(fail_residual) + ", spin-length " + std::to_string(fail_length) +
               ", s=1 energy " + std::to_string(fail_energy) + ", exact-vs-brute " +
               std::to_string(fail_exact) + ", aborted runs " + std::to_string(fail_run) +
               " (converged " + std::to_string(converged_count) + ", singular " +
               std::to_string(singular_count) + " of 1000)";
    return r;
}

// 6. Success-rate curve over n in {4..256}, 200 samples each, has an interior
//    minimum: rate(n*) below both rate(4) and rate(256).
CriterionResult criterion6() {
    const SweepResult& sweep = shared_sweep();
    std::map<int, double> rate;
    for (const SuccessCurveRow& row : sweep.curve) rate[row.n] = row.success_rate;
    int n_star = sweep.curve.front().n;
    for (const SuccessCurveRow& row : sweep.curve) {
        if (row.success_rate < rate[n_star]) n_star = row.n;
    }
    CriterionResult r;
    r.pass = rate[n_star] < rate[4] && rate[n_star] < rate[256];
    std::ostringstream curve;
    for (const SuccessCurveRow& row : sweep.curve) {
        curve << " n=" << row.n << ":" << fmt(row.success_rate);
    }
    r.detail = "minimum at n=" + std::to_string(n_star) + " (rate " + fmt(rate[n_star]) +
               "); need it strictly below both rate(4) = " + fmt(rate[4]) +
               " and rate(256) = " + fmt(rate[256]) + ";" + curve.str();
    return r;
}

// 7. The n = 256 singularity histogram concentrates strictly more of its mass
//    below s = 0.3 than the n = 16 histogram.
CriterionResult criterion7() {
    const SweepResult& sweep = shared_sweep();
    auto mass = [&](int n) {
        int below = 0, total = 0;
        for (const HistogramRow& row : sweep.histogram) {
            if (row.n != n) continue;
            total += row.count;
            if (row.bin_high <= 0.3 + 1e-12) below += row.count;
        }
        return std::pair<int, int>(below, total);
    };
    const auto [below16, total16] = mass(16);
    const auto [below256, total256] = mass(256);
    CriterionResult r;
    if (total16 == 0 || total256 == 0) {
        r.detail = "not enough singular records (n=16: " + std::to_string(total16) +
                   ", n=256: " + std::to_string(total256) + ")";
        return r;
    }
    const double frac16 = static_cast<double>(below16) / total16;
    const double frac256 = static_cast<double>(below256) / total256;
    r.pass = frac256 > frac16;
    r.detail = "mass below s=0.3: n=256 " + fmt(frac256) + " (" + std::to_string(below256) +
               "/" + std::to_string(total256) + ") vs n=16 " + fmt(frac16) + " (" +
               std::to_string(below16) + "/" + std::to_string(total16) + ")";
    return r;
}

// 8. The sweep is byte-deterministic across thread counts.
CriterionResult criterion8() {
    const std::string reference = sweep_bytes(shared_sweep()); // threads = 2
    const SweepResult serial = run_multiqubit_sweep(sweep_config(1));
    CriterionResult r;
    r.pass = reference == sweep_bytes(serial);
    r.detail = r.pass ? "CSV bytes identical for 1 and 2 worker threads"
                      : "CSV bytes differ between 1 and 2 worker threads";
    return r;
}

const char* kNames[8] = {
    "two-spin singular regression",
    "trace sign changes, flow vs exact",
    "two-spin grid success band",
    "two-spin grid minimum gap",
    "equation-level property suite",
    "success-rate curve interior minimum",
    "singularity histogram concentration",
    "sweep determinism across thread counts",
};

} // namespace

int main(int argc, char** argv) {
    std::vector<int> which;
    if (argc > 1) {
        which.push_back(std::atoi(argv[1]));
    } else {
        for (int i = 1; i <= 8; ++i) which.push_back(i);
    }
    CriterionResult (*runners[8])() = {criterion1, criterion2, criterion3, criterion4,
                                       criterion5, criterion6, criterion7, criterion8};
    int failures = 0;
    for (int id : which) {
        if (id < 1 || id > 8) {
            std::cerr << "unknown criterion " << id << std::endl;
            return 64;
        }
        const CriterionResult result = runners[id - 1]();
        if (!result.pass) ++failures;
        std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": "
                  << kNames[id - 1] << ": " << result.detail << std::endl;
    }
    return failures;
}
