#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "mfanneal/ising.hpp"

namespace mfanneal {

/// Mean spins S^z at annealing parameter s. Valid states have 0 < s < 1 and
/// |sz| strictly below 1/2, so the square roots in the flow matrix stay real.
struct FlowState {
    double s = 0.0;
    Eigen::VectorXd sz;
};

struct FlowDiagnostics {
    Eigen::VectorXd a;  // per-site drive A_mu
    Eigen::VectorXd sx; // per-site S^x = 1/(2 sqrt(1+A^2))
    double e_mf = 0.0;  // mean-field energy at this state
    int det_sign = 0;   // sign of det of the flow matrix (0 if exactly zero)
    double rcond = 0.0; // reciprocal condition estimate of the equilibrated system
};

struct SolverConfig {
    double s0 = 1e-3;
    double s_max = 1.0 - 1e-3;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double h_min = 1e-10;
    double rcond_floor = 1e-12;
    double bisect_tol = 1e-4;
    double round_threshold = 0.05; // |sz(s_max)| below this -> ambiguous rounding

    void validate() const;
};

struct FlowSample {
    FlowState state;
    FlowDiagnostics diag;
};

/// Accepted integrator steps in order of strictly increasing s.
using FlowTrace = std::vector<FlowSample>;

enum class SolveStatus { Converged, Singular, Degenerate };

struct SolveOutcome {
    SolveStatus status = SolveStatus::Degenerate;
    std::optional<double> s_sing;          // Singular only
    std::optional<SpinConfiguration> spins; // Converged only
    std::optional<double> e0;               // Converged only
    std::string reason;                     // Degenerate only
    FlowTrace trace;

    int steps() const { return static_cast<int>(trace.size()); }
};

/// A_mu = [(2/Z) sum_nu J_{mu nu} sz_nu + J_mu] * s/(1-s)
Eigen::VectorXd drive(const IsingInstance& instance, const FlowState& state);

/// The exact integral of the flow: sz = A / (2 sqrt(1+A^2)).
double on_shell_sz(double a);
Eigen::VectorXd on_shell_sz(const Eigen::VectorXd& a);

/// S^x on shell: 1 / (2 sqrt(1+A^2)); the stable closed form of sz/A.
double transverse(double a);
Eigen::VectorXd transverse(const Eigen::VectorXd& a);

/// The flow matrix M:
///   M_{mu mu} = (1 + 4 sz^2/(1-4 sz^2)) * 2 sz / sqrt(1-4 sz^2)
///   M_{mu nu} = -sz_mu * (2s/(Z(1-s))) * J_{mu nu}   (nu != mu)
/// Every row carries an overall factor sz_mu, shared with the right-hand
/// side of the flow system.
Eigen::MatrixXd assemble_m(const IsingInstance& instance, const FlowState& state);

/// M with the common row factor sz_mu divided out analytically:
///   diag 2/(1-4 sz^2)^{3/2}, off-diagonal -(2s/(Z(1-s))) J_{mu nu}.
/// Same determinant zero set as M except for the removable zeros at
/// sz_mu = 0, where the full system's row vanishes identically.
Eigen::MatrixXd assemble_m_reduced(const IsingInstance& instance, const FlowState& state);

/// Solves M * x = g for the spin velocities, g_mu = sz_mu * A_mu / (s(1-s)).
/// Computed through the reduced row form, which extends continuously across
/// sz_mu = 0. Throws NumericalError when the system is exactly singular.
Eigen::VectorXd flow_rhs(const IsingInstance& instance, const FlowState& state);

/// E_MF = -(1-s) sum S^x - (s/Z) sum_{mu nu} J_{nu mu} sz_mu sz_nu - s sum J_mu sz_mu
double mean_field_energy(const IsingInstance& instance, const FlowState& state,
                         const Eigen::VectorXd& sx);

/// Rounds sz(s_max) to sign(sz)/2 and certifies the result as a fixed point
/// of sigma = sign(b)/2. Any |sz| below the rounding threshold means the flow
/// did not commit to a sign: Degenerate. A fixed-point violation throws
/// InternalError (integrator tolerance problem).
SolveOutcome finalize(const IsingInstance& instance, FlowTrace trace,
                      const SolverConfig& config = {});

/// Integrates the adiabatic flow from s0 (initialized on shell from the
/// small-s asymptote sz = s J/2) to s_max with an adaptive embedded
/// Dormand-Prince 5(4) pair, one dense factorization per derivative.
/// Declares Singular when (a) the determinant sign of the flow matrix flips
/// between accepted steps (bisected to bisect_tol), (b) the reciprocal
/// condition number of the row-equilibrated system falls below rcond_floor
/// (also bisected), or (c) the step size collapses below h_min.
SolveOutcome integrate(const IsingInstance& instance, const SolverConfig& config = {});

/// Trace CSV: header `s, sz_0..sz_{n-1}, e_mf, det_sign, rcond`, one row per
/// accepted step, floats with 17 significant digits.
void write_trace_csv(std::ostream& out, const FlowTrace& trace);

} // namespace mfanneal
