#include "mfanneal/exact.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfanneal/csv.hpp"

namespace mfanneal {

namespace {

void check_limit(const IsingInstance& instance, int site_limit) {
    if (instance.size() > site_limit) {
        throw CapabilityError("exact diagonalization limited to " + std::to_string(site_limit) +
                              " sites, instance has " + std::to_string(instance.size()));
    }
}

bool is_diagonal_schedule(double s) { return (1.0 - s) == 0.0; }

// Two smallest entries of the diagonal plus the argmin, exact arithmetic.
GroundPair diagonal_ground(const DenseHamiltonian& h, double s) {
    const Eigen::Index dim = h.dim();
    Eigen::Index i0 = 0;
    double e0 = h.matrix(0, 0);
    for (Eigen::Index b = 1; b < dim; ++b) {
        if (h.matrix(b, b) < e0) {
            e0 = h.matrix(b, b);
            i0 = b;
        }
    }
    double e1 = std::numeric_limits<double>::infinity();
    for (Eigen::Index b = 0; b < dim; ++b) {
        if (b == i0) continue;
        e1 = std::min(e1, h.matrix(b, b));
    }
    GroundPair out;
    out.point = SpectrumPoint{s, e0, e1, e1 - e0};
    out.ground = Eigen::VectorXd::Zero(dim);
    out.ground[i0] = 1.0;
    return out;
}

double gap_at(const IsingInstance& instance, double s, int site_limit) {
    return lowest_two(instance, s, site_limit).point.gap;
}

} // namespace

DenseHamiltonian build_hamiltonian(const IsingInstance& instance, double s, int site_limit) {
    check_limit(instance, site_limit);
    if (!(s >= 0.0 && s <= 1.0)) {
        throw InputError("annealing parameter must lie in [0, 1]");
    }
    const int n = instance.size();
    const Eigen::Index dim = Eigen::Index{1} << n;
    DenseHamiltonian h;
    h.sites = n;
    h.matrix = Eigen::MatrixXd::Zero(dim, dim);
    const double z = instance.coordination();
    for (Eigen::Index b = 0; b < dim; ++b) {
        const EnergyTerms t = energy_terms(instance, static_cast<std::uint64_t>(b));
        // Same kernel and operation order as classical_energy, scaled by s, so
        // the s = 1 diagonal reproduces the classical energies bit-exactly.
        h.matrix(b, b) = -(s * t.pair_sum) / z - s * t.field_sum;
    }
    const double flip = -(1.0 - s) * 0.5; // Sx amplitude 1/2
    if (flip != 0.0) {
        for (Eigen::Index b = 0; b < dim; ++b) {
            for (int k = 0; k < n; ++k) {
                h.matrix(b, b ^ (Eigen::Index{1} << k)) += flip;
            }
        }
    }
    return h;
}

GroundPair lowest_two(const IsingInstance& instance, double s, int site_limit) {
    const DenseHamiltonian h = build_hamiltonian(instance, s, site_limit);
    if (h.dim() == 1) {
        // n = 0 cannot occur (instances have >= 1 site), so dim >= 2.
        throw InternalError("unexpected 1x1 Hamiltonian");
    }
    if (is_diagonal_schedule(s)) {
        return diagonal_ground(h, s);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("dense symmetric eigensolver failed");
    }
    GroundPair out;
    out.point = SpectrumPoint{s, solver.eigenvalues()[0], solver.eigenvalues()[1],
                              solver.eigenvalues()[1] - solver.eigenvalues()[0]};
    out.ground = solver.eigenvectors().col(0);
    return out;
}

GapScan gap_scan(const IsingInstance& instance, int grid_size, int site_limit) {
    check_limit(instance, site_limit);
    if (grid_size < 3) {
        throw InputError("gap scan needs a grid of at least 3 points");
    }
    GapScan scan;
    scan.points.reserve(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        const double s = static_cast<double>(k) / (grid_size - 1);
        scan.points.push_back(lowest_two(instance, s, site_limit).point);
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < scan.points.size(); ++k) {
        if (scan.points[k].gap < scan.points[best].gap) best = k;
    }
    // Golden-section refinement inside the bracketing grid interval.
    double lo = scan.points[best == 0 ? 0 : best - 1].s;
    double hi = scan.points[std::min(best + 1, scan.points.size() - 1)].s;
    double min_gap = scan.points[best].gap;
    double s_gap = scan.points[best].s;
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double g1 = gap_at(instance, x1, site_limit);
    double g2 = gap_at(instance, x2, site_limit);
    while (b - a > 1e-4) {
        if (g1 <= g2) {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - kInvPhi * (b - a);
            g1 = gap_at(instance, x1, site_limit);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + kInvPhi * (b - a);
            g2 = gap_at(instance, x2, site_limit);
        }
        const double gm = std::min(g1, g2);
        if (gm < min_gap) {
            min_gap = gm;
            s_gap = g1 <= g2 ? x1 : x2;
        }
    }
    scan.min_gap = min_gap;
    scan.s_gap = s_gap;
    return scan;
}

std::vector<MagnetizationSample> magnetization_trace(const IsingInstance& instance,
                                                     int grid_size, int site_limit) {
    check_limit(instance, site_limit);
    if (grid_size < 2) {
        throw InputError("magnetization trace needs at least 2 grid points");
    }
    const int n = instance.size();
    std::vector<MagnetizationSample> samples;
    samples.reserve(grid_size);
    for (int k = 0; k < grid_size; ++k) {
        const double s = static_cast<double>(k) / (grid_size - 1);
        const GroundPair pair = lowest_two(instance, s, site_limit);
        MagnetizationSample sample;
        sample.s = s;
        sample.m = Eigen::VectorXd::Zero(n);
        for (Eigen::Index b = 0; b < pair.ground.size(); ++b) {
            const double w = pair.ground[b] * pair.ground[b];
            if (w == 0.0) continue;
            for (int site = 0; site < n; ++site) {
                sample.m[site] += w * (((b >> site) & 1) ? -0.5 : 0.5);
            }
        }
        sample.degenerate =
            pair.point.gap <= 1e-12 * std::max(1.0, std::abs(pair.point.e0));
        samples.push_back(std::move(sample));
    }
    return samples;
}

void write_gap_csv(std::ostream& out, const GapScan& scan) {
    out << "s,e0,e1,gap\n";
    for (const SpectrumPoint& p : scan.points) {
        out << g17(p.s) << ',' << g17(p.e0) << ',' << g17(p.e1) << ',' << g17(p.gap) << '\n';
    }
}

void write_magnetization_csv(std::ostream& out,
                             const std::vector<MagnetizationSample>& samples) {
    const int n = samples.empty() ? 0 : static_cast<int>(samples.front().m.size());
    out << "s";
    for (int i = 0; i < n; ++i) out << ",m_" << i;
    out << ",degenerate_flag\n";
    for (const MagnetizationSample& sample : samples) {
        out << g17(sample.s);
        for (int i = 0; i < n; ++i) out << ',' << g17(sample.m[i]);
        out << ',' << (sample.degenerate ? 1 : 0) << '\n';
    }
}

} // namespace mfanneal
