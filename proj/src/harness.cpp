#include "mfanneal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "mfanneal/csv.hpp"
#include "mfanneal/rng.hpp"

namespace mfanneal {

namespace {

bool configuration_in(const SpinConfiguration& config,
                      const std::vector<SpinConfiguration>& set) {
    return std::any_of(set.begin(), set.end(),
                       [&](const SpinConfiguration& c) { return c == config; });
}

RunOutcome outcome_of(const SolveOutcome& solve) {
    switch (solve.status) {
        case SolveStatus::Converged: return RunOutcome::Converged;
        case SolveStatus::Singular: return RunOutcome::Singular;
        case SolveStatus::Degenerate: return RunOutcome::Degenerate;
    }
    return RunOutcome::Failed;
}

std::optional<std::string> opt_field(const std::optional<double>& v) {
    if (!v) return std::nullopt;
    return g17(*v);
}

} // namespace

std::string to_string(RunOutcome outcome) {
    switch (outcome) {
        case RunOutcome::Converged: return "converged";
        case RunOutcome::Singular: return "singular";
        case RunOutcome::Degenerate: return "degenerate";
        case RunOutcome::Failed: return "failed";
    }
    return "failed";
}

double GridSpec::value(int k) const {
    return lo + (hi - lo) * static_cast<double>(k) / (steps - 1);
}

void GridSpec::validate() const {
    if (steps < 2) throw InputError("grid needs at least 2 steps");
    if (!(lo < hi)) throw InputError("grid needs lo < hi");
}

std::vector<Scan2Cell> run_two_spin_scan(const Scan2Config& config) {
    config.j1_range.validate();
    config.j2_range.validate();
    config.solver.validate();
    std::vector<Scan2Cell> cells;
    cells.reserve(static_cast<std::size_t>(config.j1_range.steps) * config.j2_range.steps);
    for (int a = 0; a < config.j1_range.steps; ++a) {
        for (int b = 0; b < config.j2_range.steps; ++b) {
            Scan2Cell cell;
            cell.j1 = config.j1_range.value(a);
            cell.j2 = config.j2_range.value(b);
            Eigen::VectorXd fields(2);
            fields << cell.j1, cell.j2;
            const IsingInstance instance(fields, std::vector<CouplingEntry>{{0, 1, config.j12}},
                                         config.z);
            const GroundResult ground = brute_force_ground(instance);
            cell.e0_exact = ground.energy;
            try {
                const SolveOutcome solve = integrate(instance, config.solver);
                cell.outcome = outcome_of(solve);
                cell.s_sing = solve.s_sing;
                cell.e0_mf = solve.e0;
                if (solve.status == SolveStatus::Converged) {
                    cell.mf_matches_exact = configuration_in(*solve.spins, ground.minimizers);
                }
            } catch (const NumericalError&) {
                cell.outcome = RunOutcome::Failed;
            } catch (const InternalError&) {
                cell.outcome = RunOutcome::Failed;
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

SweepResult run_multiqubit_sweep(const SweepConfig& config) {
    if (config.n_list.empty()) throw InputError("sweep needs a nonempty n list");
    if (config.samples_per_n < 1) throw InputError("sweep needs samples_per_n >= 1");
    config.solver.validate();
    for (int n : config.n_list) {
        if (n < 1) throw InputError("sweep site counts must be >= 1");
    }

    struct Task {
        int n;
        int sample;
    };
    std::vector<Task> tasks;
    tasks.reserve(config.n_list.size() * config.samples_per_n);
    for (int n : config.n_list) {
        for (int k = 0; k < config.samples_per_n; ++k) tasks.push_back({n, k});
    }

    SweepResult result;
    result.records.resize(tasks.size());

    auto run_task = [&](std::size_t index) {
        const Task task = tasks[index];
        SweepRecord record;
        record.n = task.n;
        record.sample_index = task.sample;
        record.derived_seed = derive_seed(config.master_seed,
                                          static_cast<std::uint64_t>(task.n),
                                          static_cast<std::uint64_t>(task.sample));
        const ZRule rule = config.fixed_z ? ZRule::fixed(*config.fixed_z) : ZRule::n_minus_one();
        const IsingInstance instance =
            generate_instance(task.n, record.derived_seed, config.dist, rule);
        try {
            const SolveOutcome solve = integrate(instance, config.solver);
            record.outcome = outcome_of(solve);
            record.s_sing = solve.s_sing;
            record.e0_mf = solve.e0;
            if (solve.status == SolveStatus::Converged && task.n <= config.oracle_limit) {
                const GroundResult ground = brute_force_ground(instance);
                record.matches_bruteforce = configuration_in(*solve.spins, ground.minimizers);
            }
        } catch (const NumericalError&) {
            record.outcome = RunOutcome::Failed;
        } catch (const InternalError&) {
            record.outcome = RunOutcome::Failed;
        }
        result.records[index] = std::move(record);
    };

    int threads = config.threads > 0
                      ? config.threads
                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, static_cast<int>(tasks.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
                    run_task(i);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    // Aggregation in canonical record order.
    for (int n : config.n_list) {
        SuccessCurveRow row;
        row.n = n;
        std::vector<int> bins(kHistogramBins, 0);
        for (const SweepRecord& record : result.records) {
            if (record.n != n) continue;
            ++row.total;
            switch (record.outcome) {
                case RunOutcome::Converged: ++row.converged; break;
                case RunOutcome::Singular: ++row.singular; break;
                case RunOutcome::Degenerate: ++row.degenerate; break;
                case RunOutcome::Failed: ++row.failed; break;
            }
            if (record.outcome == RunOutcome::Singular && record.s_sing) {
                const int bin = std::min(kHistogramBins - 1,
                                         static_cast<int>(*record.s_sing * kHistogramBins));
                ++bins[std::max(0, bin)];
            }
        }
        row.success_rate = row.total > 0 ? static_cast<double>(row.converged) / row.total : 0.0;
        result.curve.push_back(row);
        for (int b = 0; b < kHistogramBins; ++b) {
            result.histogram.push_back({n, static_cast<double>(b) / kHistogramBins,
                                        static_cast<double>(b + 1) / kHistogramBins, bins[b]});
        }
    }
    return result;
}

int count_sign_changes(const std::vector<double>& series) {
    int flips = 0;
    for (std::size_t k = 1; k < series.size(); ++k) {
        if (series[k - 1] * series[k] < 0.0) ++flips;
    }
    return flips;
}

CompareReport mf_vs_exact_compare(const IsingInstance& instance, const SolverConfig& solver,
                                  int grid_size) {
    if (instance.size() > kExactSiteLimit) {
        throw CapabilityError("comparison needs n <= " + std::to_string(kExactSiteLimit));
    }
    CompareReport report;
    const GroundResult ground = brute_force_ground(instance);
    report.e0_exact = ground.energy;

    FlowTrace trace;
    try {
        const SolveOutcome solve = integrate(instance, solver);
        report.outcome = outcome_of(solve);
        report.s_sing = solve.s_sing;
        report.e0_mf = solve.e0;
        if (solve.status == SolveStatus::Converged) {
            report.energies_match = configuration_in(*solve.spins, ground.minimizers);
        }
        trace = solve.trace;
    } catch (const NumericalError&) {
        report.outcome = RunOutcome::Failed;
    } catch (const InternalError&) {
        report.outcome = RunOutcome::Failed;
    }

    const int n = instance.size();
    report.mf_sign_changes.assign(n, 0);
    for (int site = 0; site < n; ++site) {
        std::vector<double> series;
        series.reserve(trace.size());
        for (const FlowSample& sample : trace) series.push_back(sample.state.sz[site]);
        report.mf_sign_changes[site] = count_sign_changes(series);
    }

    const GapScan scan = gap_scan(instance, grid_size);
    report.min_gap = scan.min_gap;
    report.s_gap = scan.s_gap;

    const auto samples = magnetization_trace(instance, grid_size);
    report.exact_sign_changes.assign(n, 0);
    for (int site = 0; site < n; ++site) {
        std::vector<double> series;
        for (const MagnetizationSample& sample : samples) {
            if (sample.s > 0.0 && sample.s < 1.0) series.push_back(sample.m[site]);
        }
        report.exact_sign_changes[site] = count_sign_changes(series);
    }
    return report;
}

void write_scan2_csv(std::ostream& out, const std::vector<Scan2Cell>& cells) {
    out << "j1,j2,outcome,s_sing,e0_mf,e0_exact,mf_matches_exact\n";
    for (const Scan2Cell& cell : cells) {
        out << g17(cell.j1) << ',' << g17(cell.j2) << ',' << to_string(cell.outcome) << ','
            << opt_field(cell.s_sing).value_or("") << ',' << opt_field(cell.e0_mf).value_or("")
            << ',' << g17(cell.e0_exact) << ',';
        if (cell.mf_matches_exact) out << (*cell.mf_matches_exact ? 1 : 0);
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
    out << "n,sample_index,derived_seed,outcome,s_sing,e0_mf,matches_bruteforce\n";
    for (const SweepRecord& r : records) {
        out << r.n << ',' << r.sample_index << ',' << r.derived_seed << ','
            << to_string(r.outcome) << ',' << opt_field(r.s_sing).value_or("") << ','
            << opt_field(r.e0_mf).value_or("") << ',';
        if (r.matches_bruteforce) out << (*r.matches_bruteforce ? 1 : 0);
        out << '\n';
    }
}

void write_curve_csv(std::ostream& out, const std::vector<SuccessCurveRow>& rows) {
    out << "n,total,converged,singular,degenerate,failed,success_rate\n";
    for (const SuccessCurveRow& r : rows) {
        out << r.n << ',' << r.total << ',' << r.converged << ',' << r.singular << ','
            << r.degenerate << ',' << r.failed << ',' << g17(r.success_rate) << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramRow>& rows) {
    out << "n,bin_low,bin_high,count\n";
    for (const HistogramRow& r : rows) {
        out << r.n << ',' << g17(r.bin_low) << ',' << g17(r.bin_high) << ',' << r.count << '\n';
    }
}

} // namespace mfanneal
