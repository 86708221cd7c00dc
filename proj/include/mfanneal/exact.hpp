#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mfanneal/ising.hpp"

namespace mfanneal {

/// Full 2^n x 2^n transverse-field Hamiltonian at annealing parameter s:
///   H = -(s/Z) sum_{ordered} J_{nu mu} Sz_mu Sz_nu - s sum J_mu Sz_mu - (1-s) sum Sx_mu
/// Basis: computational z-basis; bit k of the index encodes site k
/// (bit 0 -> Sz = +1/2, bit 1 -> -1/2), site 0 is the least significant bit.
struct DenseHamiltonian {
    int sites = 0;
    Eigen::MatrixXd matrix;

    Eigen::Index dim() const { return matrix.rows(); }
};

struct SpectrumPoint {
    double s = 0.0;
    double e0 = 0.0;
    double e1 = 0.0;
    double gap = 0.0;
};

struct GroundPair {
    SpectrumPoint point;
    Eigen::VectorXd ground; // unit-norm eigenvector of e0
};

struct GapScan {
    std::vector<SpectrumPoint> points;
    double min_gap = 0.0;
    double s_gap = 0.0;
};

struct MagnetizationSample {
    double s = 0.0;
    Eigen::VectorXd m; // per-site <Sz_mu> in the ground state
    bool degenerate = false;
};

inline constexpr int kExactSiteLimit = 12;

DenseHamiltonian build_hamiltonian(const IsingInstance& instance, double s,
                                   int site_limit = kExactSiteLimit);

/// Two smallest eigenvalues plus a ground eigenvector. At s = 1 the matrix is
/// exactly diagonal and the spectrum is read off the diagonal, which keeps
/// e0(s=1) bit-identical to the brute-force classical minimum.
GroundPair lowest_two(const IsingInstance& instance, double s,
                      int site_limit = kExactSiteLimit);

/// Gap over a uniform s-grid on [0, 1], with the minimum refined by
/// golden-section search to a bracket of width 1e-4.
GapScan gap_scan(const IsingInstance& instance, int grid_size = 200,
                 int site_limit = kExactSiteLimit);

/// Ground-state <Sz_mu>(s) on a uniform grid. Exactly degenerate ground
/// levels are flagged rather than resolved.
std::vector<MagnetizationSample> magnetization_trace(const IsingInstance& instance,
                                                     int grid_size = 200,
                                                     int site_limit = kExactSiteLimit);

/// Gap scan CSV: `s,e0,e1,gap`.
void write_gap_csv(std::ostream& out, const GapScan& scan);

/// Magnetization CSV: `s,m_0..m_{n-1},degenerate_flag`.
void write_magnetization_csv(std::ostream& out,
                             const std::vector<MagnetizationSample>& samples);

} // namespace mfanneal
