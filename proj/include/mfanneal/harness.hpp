#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfanneal/exact.hpp"
#include "mfanneal/flow.hpp"
#include "mfanneal/ising.hpp"

namespace mfanneal {

enum class RunOutcome { Converged, Singular, Degenerate, Failed };

std::string to_string(RunOutcome outcome);

struct GridSpec {
    double lo = -3.0;
    double hi = 3.0;
    int steps = 7;

    double value(int k) const;
    void validate() const;
};

struct Scan2Config {
    double j12 = 1.0;
    GridSpec j1_range{};
    GridSpec j2_range{};
    int z = 1;
    SolverConfig solver{};
};

struct Scan2Cell {
    double j1 = 0.0;
    double j2 = 0.0;
    RunOutcome outcome = RunOutcome::Failed;
    std::optional<double> s_sing;
    std::optional<double> e0_mf;
    double e0_exact = 0.0; // brute-force classical minimum
    std::optional<bool> mf_matches_exact; // converged cells only
};

/// One flow run plus one brute-force run per grid cell, row-major in (j1, j2).
std::vector<Scan2Cell> run_two_spin_scan(const Scan2Config& config);

struct SweepConfig {
    std::vector<int> n_list;
    int samples_per_n = 200;
    std::uint64_t master_seed = 0;
    UniformDist dist{};
    std::optional<int> fixed_z; // default rule: Z = n-1
    SolverConfig solver{};
    int oracle_limit = 16; // brute-force cross-check for n <= this
    int threads = 0;       // 0 = hardware concurrency
};

struct SweepRecord {
    int n = 0;
    int sample_index = 0;
    std::uint64_t derived_seed = 0;
    RunOutcome outcome = RunOutcome::Failed;
    std::optional<double> s_sing;
    std::optional<double> e0_mf;
    std::optional<bool> matches_bruteforce;
};

struct SuccessCurveRow {
    int n = 0;
    int total = 0;
    int converged = 0;
    int singular = 0;
    int degenerate = 0;
    int failed = 0;
    double success_rate = 0.0;
};

inline constexpr int kHistogramBins = 50;

struct HistogramRow {
    int n = 0;
    double bin_low = 0.0;
    double bin_high = 0.0;
    int count = 0;
};

struct SweepResult {
    std::vector<SweepRecord> records;       // canonical (n, sample_index) order
    std::vector<SuccessCurveRow> curve;     // one row per n
    std::vector<HistogramRow> histogram;    // kHistogramBins rows per n
};

/// Seeded parallel map over (n, sample) tasks. The record set is a pure
/// function of the config; worker count only changes the wall time.
SweepResult run_multiqubit_sweep(const SweepConfig& config);

struct CompareReport {
    RunOutcome outcome = RunOutcome::Failed;
    std::optional<double> s_sing;
    std::optional<double> e0_mf;
    double e0_exact = 0.0;
    std::optional<bool> energies_match;
    double min_gap = 0.0;
    double s_gap = 0.0;
    std::vector<int> mf_sign_changes;    // per site, strict sign flips along the flow trace
    std::vector<int> exact_sign_changes; // per site, over the interior grid points
};

/// Flow vs. exact diagonalization on one small instance: outcome, energy
/// match, minimum gap, and per-site sign-change counts for both traces.
CompareReport mf_vs_exact_compare(const IsingInstance& instance,
                                  const SolverConfig& solver = {}, int grid_size = 200);

/// Strict sign flips between consecutive samples of a per-site series.
int count_sign_changes(const std::vector<double>& series);

void write_scan2_csv(std::ostream& out, const std::vector<Scan2Cell>& cells);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records);
void write_curve_csv(std::ostream& out, const std::vector<SuccessCurveRow>& rows);
void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows);

} // namespace mfanneal
