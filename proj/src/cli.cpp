#include "mfanneal/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfanneal/harness.hpp"

namespace mfanneal {

namespace {

std::string read_stream(std::istream& in) {
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

IsingInstance load_instance(const std::string& path, std::istream& in) {
    if (path == "-") {
        return read_instance(read_stream(in));
    }
    std::ifstream file(path);
    if (!file) {
        throw InputError("cannot open instance file: " + path);
    }
    return read_instance(read_stream(file));
}

// Writes through a callback either to the given fallback stream or to a file.
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream file(path);
    if (!file) {
        throw InputError("cannot open output file: " + path);
    }
    write(file);
}

UniformDist parse_dist(const std::string& text) {
    const std::string prefix = "uniform:";
    if (text.rfind(prefix, 0) != 0) {
        throw InputError("unsupported distribution spec: " + text);
    }
    const std::string body = text.substr(prefix.size());
    const auto colon = body.find(':');
    if (colon == std::string::npos) {
        throw InputError("distribution spec needs uniform:LO:HI, got " + text);
    }
    UniformDist dist;
    try {
        dist.lo = std::stod(body.substr(0, colon));
        dist.hi = std::stod(body.substr(colon + 1));
    } catch (const std::exception&) {
        throw InputError("cannot parse distribution bounds in " + text);
    }
    return dist;
}

GridSpec parse_range(const std::string& text) {
    GridSpec grid;
    std::istringstream stream(text);
    std::string lo, hi, steps;
    if (!std::getline(stream, lo, ':') || !std::getline(stream, hi, ':') ||
        !std::getline(stream, steps)) {
        throw InputError("range spec needs LO:HI:STEPS, got " + text);
    }
    try {
        grid.lo = std::stod(lo);
        grid.hi = std::stod(hi);
        grid.steps = std::stoi(steps);
    } catch (const std::exception&) {
        throw InputError("cannot parse range spec " + text);
    }
    grid.validate();
    return grid;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            values.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw InputError("cannot parse integer list entry: " + item);
        }
    }
    if (values.empty()) {
        throw InputError("empty integer list");
    }
    return values;
}

nlohmann::json outcome_json(const SolveOutcome& outcome) {
    nlohmann::json doc;
    switch (outcome.status) {
        case SolveStatus::Converged: doc["status"] = "converged"; break;
        case SolveStatus::Singular: doc["status"] = "singular"; break;
        case SolveStatus::Degenerate: doc["status"] = "degenerate"; break;
    }
    doc["s_sing"] = outcome.s_sing ? nlohmann::json(*outcome.s_sing) : nlohmann::json();
    doc["e0"] = outcome.e0 ? nlohmann::json(*outcome.e0) : nlohmann::json();
    if (outcome.spins) {
        doc["spins"] = std::vector<double>(outcome.spins->values().begin(),
                                           outcome.spins->values().end());
    } else {
        doc["spins"] = nullptr;
    }
    doc["steps"] = outcome.steps();
    return doc;
}

nlohmann::json compare_json(const CompareReport& report) {
    nlohmann::json doc;
    doc["outcome"] = to_string(report.outcome);
    doc["s_sing"] = report.s_sing ? nlohmann::json(*report.s_sing) : nlohmann::json();
    doc["e0_mf"] = report.e0_mf ? nlohmann::json(*report.e0_mf) : nlohmann::json();
    doc["e0_exact"] = report.e0_exact;
    doc["energies_match"] =
        report.energies_match ? nlohmann::json(*report.energies_match) : nlohmann::json();
    doc["min_gap"] = report.min_gap;
    doc["s_gap"] = report.s_gap;
    doc["mf_sign_changes"] = report.mf_sign_changes;
    doc["exact_sign_changes"] = report.exact_sign_changes;
    return doc;
}

struct CliOptions {
    // gen
    int gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_dist = "uniform:-1:1";
    int gen_z = -1; // -1: default rule n-1
    std::string gen_out;
    // solve
    std::string solve_instance;
    int solve_z = -1;
    SolverConfig solver{};
    std::string solve_trace;
    std::string solve_out;
    // exact
    std::string exact_instance;
    int exact_grid = 200;
    std::string exact_gap;
    std::string exact_mag;
    // scan2
    double scan_j12 = 1.0;
    std::string scan_range = "-3:3:7";
    std::string scan_out;
    // sweep
    std::string sweep_n_list;
    int sweep_samples = 200;
    std::uint64_t sweep_seed = 0;
    int sweep_threads = 0;
    std::string sweep_outdir = ".";
    // compare
    std::string compare_instance;
    std::string compare_out;
};

} // namespace

int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Mean-field adiabatic solver and exact-diagonalization benchmark for "
                 "transverse-field Ising instances"};
    app.require_subcommand(1);
    CliOptions opt;

    CLI::App* gen = app.add_subcommand("gen", "Generate a random fully connected instance");
    gen->add_option("--n", opt.gen_n, "Site count")->required();
    gen->add_option("--seed", opt.gen_seed, "RNG seed")->required();
    gen->add_option("--dist", opt.gen_dist, "Coupling distribution, uniform:LO:HI");
    gen->add_option("--z", opt.gen_z, "Coordination number (default n-1)");
    gen->add_option("-o,--output", opt.gen_out, "Output file (default stdout)");

    CLI::App* solve = app.add_subcommand("solve", "Integrate the mean-field adiabatic flow");
    solve->add_option("--instance", opt.solve_instance, "Instance JSON file, - for stdin")
        ->required();
    solve->add_option("--z", opt.solve_z, "Override the instance coordination number");
    solve->add_option("--s0", opt.solver.s0, "Start of the annealing interval");
    solve->add_option("--smax", opt.solver.s_max, "End of the annealing interval");
    solve->add_option("--rtol", opt.solver.rel_tol, "Integrator relative tolerance");
    solve->add_option("--trace", opt.solve_trace, "Write the accepted-step trace CSV here");
    solve->add_option("-o,--output", opt.solve_out, "Outcome JSON file (default stdout)");

    CLI::App* exact = app.add_subcommand("exact", "Exact spectrum scan over s");
    exact->add_option("--instance", opt.exact_instance, "Instance JSON file, - for stdin")
        ->required();
    exact->add_option("--grid", opt.exact_grid, "Grid size over [0, 1]");
    exact->add_option("--gap", opt.exact_gap, "Gap scan CSV file (default stdout)");
    exact->add_option("--mag", opt.exact_mag, "Ground-state magnetization CSV file");

    CLI::App* scan2 = app.add_subcommand("scan2", "Two-spin (J1, J2) grid study");
    scan2->add_option("--j12", opt.scan_j12, "Pair coupling J12");
    scan2->add_option("--range", opt.scan_range, "Field grid, LO:HI:STEPS");
    scan2->add_option("-o,--output", opt.scan_out, "Scan CSV file (default stdout)");

    CLI::App* sweep = app.add_subcommand("sweep", "Seeded multiqubit Monte Carlo sweep");
    sweep->add_option("--n-list", opt.sweep_n_list, "Comma-separated site counts")->required();
    sweep->add_option("--samples", opt.sweep_samples, "Samples per site count")->required();
    sweep->add_option("--seed", opt.sweep_seed, "Master seed")->required();
    sweep->add_option("--threads", opt.sweep_threads, "Worker threads (default: all cores)");
    sweep->add_option("--outdir", opt.sweep_outdir, "Output directory");

    CLI::App* compare = app.add_subcommand("compare", "Flow vs. exact diagonalization report");
    compare->add_option("--instance", opt.compare_instance, "Instance JSON file, - for stdin")
        ->required();
    compare->add_option("-o,--output", opt.compare_out, "Report JSON file (default stdout)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (gen->parsed()) {
            const UniformDist dist = parse_dist(opt.gen_dist);
            const ZRule rule = opt.gen_z >= 0 ? ZRule::fixed(opt.gen_z) : ZRule::n_minus_one();
            const IsingInstance instance = generate_instance(opt.gen_n, opt.gen_seed, dist, rule);
            emit(opt.gen_out, out, [&](std::ostream& o) { o << write_instance(instance) << '\n'; });
        } else if (solve->parsed()) {
            IsingInstance instance = load_instance(opt.solve_instance, in);
            if (opt.solve_z >= 0) {
                instance = IsingInstance(instance.fields(), instance.couplings(), opt.solve_z);
            }
            const SolveOutcome outcome = integrate(instance, opt.solver);
            if (!opt.solve_trace.empty()) {
                emit(opt.solve_trace, out,
                     [&](std::ostream& o) { write_trace_csv(o, outcome.trace); });
            }
            emit(opt.solve_out, out,
                 [&](std::ostream& o) { o << outcome_json(outcome).dump() << '\n'; });
        } else if (exact->parsed()) {
            const IsingInstance instance = load_instance(opt.exact_instance, in);
            const GapScan scan = gap_scan(instance, opt.exact_grid);
            emit(opt.exact_gap, out, [&](std::ostream& o) { write_gap_csv(o, scan); });
            if (!opt.exact_mag.empty()) {
                const auto samples = magnetization_trace(instance, opt.exact_grid);
                emit(opt.exact_mag, out,
                     [&](std::ostream& o) { write_magnetization_csv(o, samples); });
            }
        } else if (scan2->parsed()) {
            Scan2Config config;
            config.j12 = opt.scan_j12;
            config.j1_range = parse_range(opt.scan_range);
            config.j2_range = config.j1_range;
            const auto cells = run_two_spin_scan(config);
            emit(opt.scan_out, out, [&](std::ostream& o) { write_scan2_csv(o, cells); });
        } else if (sweep->parsed()) {
            SweepConfig config;
            config.n_list = parse_int_list(opt.sweep_n_list);
            config.samples_per_n = opt.sweep_samples;
            config.master_seed = opt.sweep_seed;
            config.threads = opt.sweep_threads;
            const SweepResult result = run_multiqubit_sweep(config);
            std::filesystem::create_directories(opt.sweep_outdir);
            const std::filesystem::path dir(opt.sweep_outdir);
            emit((dir / "sweep.csv").string(), out,
                 [&](std::ostream& o) { write_sweep_csv(o, result.records); });
            emit((dir / "curve.csv").string(), out,
                 [&](std::ostream& o) { write_curve_csv(o, result.curve); });
            emit((dir / "histogram.csv").string(), out,
                 [&](std::ostream& o) { write_histogram_csv(o, result.histogram); });
        } else if (compare->parsed()) {
            const IsingInstance instance = load_instance(opt.compare_instance, in);
            const CompareReport report = mf_vs_exact_compare(instance);
            emit(opt.compare_out, out,
                 [&](std::ostream& o) { o << compare_json(report).dump() << '\n'; });
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const CapabilityError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const InternalError& e) {
        err << "internal consistency failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

} // namespace mfanneal
