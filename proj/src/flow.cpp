#include "mfanneal/flow.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "mfanneal/csv.hpp"

namespace mfanneal {

namespace {

void validate_state(const IsingInstance& instance, const FlowState& state) {
    if (state.sz.size() != instance.size()) {
        throw InputError("flow state length does not match instance size");
    }
    if (!(state.s > 0.0 && state.s < 1.0)) {
        throw InputError("annealing parameter must lie strictly inside (0, 1)");
    }
    if (!((1.0 - 4.0 * state.sz.array().square()) > 0.0).all()) {
        throw InputError("|sz| must stay strictly below 1/2");
    }
}

// Step rejection inside the integrator: domain exit or a factorization that
// cannot be used. Rejected steps shrink h; persistent rejection is the
// h_min singularity signal.
struct StepReject {};

Eigen::VectorXd drive_at(const IsingInstance& instance, double s, const Eigen::VectorXd& sz) {
    return ((2.0 / instance.coordination()) * (instance.couplings() * sz) + instance.fields()) *
           (s / (1.0 - s));
}

Eigen::MatrixXd reduced_matrix_at(const IsingInstance& instance, double s,
                                  const Eigen::VectorXd& sz) {
    const Eigen::ArrayXd q = 1.0 - 4.0 * sz.array().square();
    Eigen::MatrixXd m = -(2.0 * s / (instance.coordination() * (1.0 - s))) * instance.couplings();
    m.diagonal() = (2.0 / (q * q.sqrt())).matrix();
    return m;
}

// d(sz)/ds. Solves the row-equilibrated reduced system; the reduced form and
// the full M*x = g system have the same solution wherever both are defined,
// and the reduced one stays regular at benign sz_mu = 0 points.
Eigen::VectorXd rhs_or_reject(const IsingInstance& instance, double s,
                              const Eigen::VectorXd& sz) {
    if (!((1.0 - 4.0 * sz.array().square()) > 0.0).all()) throw StepReject{};
    Eigen::MatrixXd m = reduced_matrix_at(instance, s, sz);
    Eigen::VectorXd g = drive_at(instance, s, sz) / (s * (1.0 - s));
    for (int r = 0; r < m.rows(); ++r) {
        const double scale = m.row(r).cwiseAbs().maxCoeff(); // >= 2, diag never vanishes
        m.row(r) /= scale;
        g[r] /= scale;
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if ((lu.matrixLU().diagonal().array() == 0.0).any()) throw StepReject{};
    Eigen::VectorXd x = lu.solve(g);
    if (!x.allFinite()) throw StepReject{};
    return x;
}

struct MatrixAnalysis {
    int det_sign = 0; // sign of det(M), spin-parity factor included
    double rcond = 0.0;
};

// Determinant sign and conditioning of the flow matrix at a state. The rows
// of M are equilibrated by their max-magnitude entry (a strictly positive
// scaling, so the determinant sign is unchanged); the common row factors
// sz_mu contribute their sign product.
std::optional<MatrixAnalysis> analyze_matrix(const IsingInstance& instance, double s,
                                             const Eigen::VectorXd& sz) {
    if (!((1.0 - 4.0 * sz.array().square()) > 0.0).all()) return std::nullopt;
    Eigen::MatrixXd m = reduced_matrix_at(instance, s, sz);
    for (int r = 0; r < m.rows(); ++r) {
        m.row(r) /= m.row(r).cwiseAbs().maxCoeff();
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    for (double d : lu.matrixLU().diagonal()) {
        if (d == 0.0) {
            sign = 0;
            break;
        }
        if (d < 0.0) sign = -sign;
    }
    int parity = 1;
    for (double v : sz) {
        if (v == 0.0) {
            parity = 0;
            break;
        }
        if (v < 0.0) parity = -parity;
    }
    MatrixAnalysis out;
    out.det_sign = (parity == 0 || sign == 0) ? 0 : parity * sign;
    out.rcond = lu.rcond();
    return out;
}

FlowSample make_sample(const IsingInstance& instance, double s, const Eigen::VectorXd& sz,
                       const MatrixAnalysis& analysis) {
    FlowSample sample;
    sample.state = FlowState{s, sz};
    sample.diag.a = drive_at(instance, s, sz);
    sample.diag.sx = transverse(sample.diag.a);
    sample.diag.e_mf = mean_field_energy(instance, sample.state, sample.diag.sx);
    sample.diag.det_sign = analysis.det_sign;
    sample.diag.rcond = analysis.rcond;
    return sample;
}

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA2[1] = {1.0 / 5};
constexpr double kA3[2] = {3.0 / 40, 9.0 / 40};
constexpr double kA4[3] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
constexpr double kA5[4] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
constexpr double kA6[5] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                           -5103.0 / 18656};
constexpr double kB[6] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84};
constexpr double kE[7] = {71.0 / 57600,     0.0,          -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525,  -1.0 / 40};

double error_norm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, double rel_tol, double abs_tol) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = abs_tol + rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        worst = std::max(worst, std::abs(err[i]) / scale);
    }
    return worst;
}

// Cubic Hermite interpolation between two accepted states, used only to
// localize a detection bracket to bisect_tol.
Eigen::VectorXd hermite(double sa, const Eigen::VectorXd& ya, const Eigen::VectorXd& fa,
                        double sb, const Eigen::VectorXd& yb, const Eigen::VectorXd& fb,
                        double s) {
    const double h = sb - sa;
    const double t = (s - sa) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + t) * h * fa + (-2 * t3 + 3 * t2) * yb +
           (t3 - t2) * h * fb;
}

} // namespace

void SolverConfig::validate() const {
    if (!(0.0 < s0 && s0 < s_max && s_max < 1.0)) {
        throw InputError("need 0 < s0 < s_max < 1");
    }
    if (!(rel_tol > 0.0 && abs_tol > 0.0 && h_min > 0.0 && rcond_floor > 0.0 &&
          bisect_tol > 0.0)) {
        throw InputError("solver tolerances must be positive");
    }
    if (!(round_threshold >= 0.0 && round_threshold < 0.5)) {
        throw InputError("rounding threshold must lie in [0, 1/2)");
    }
}

Eigen::VectorXd drive(const IsingInstance& instance, const FlowState& state) {
    validate_state(instance, state);
    return drive_at(instance, state.s, state.sz);
}

double on_shell_sz(double a) { return a / (2.0 * std::sqrt(1.0 + a * a)); }

Eigen::VectorXd on_shell_sz(const Eigen::VectorXd& a) {
    return (a.array() / (2.0 * (1.0 + a.array().square()).sqrt())).matrix();
}

double transverse(double a) { return 1.0 / (2.0 * std::sqrt(1.0 + a * a)); }

Eigen::VectorXd transverse(const Eigen::VectorXd& a) {
    return (1.0 / (2.0 * (1.0 + a.array().square()).sqrt())).matrix();
}

Eigen::MatrixXd assemble_m(const IsingInstance& instance, const FlowState& state) {
    validate_state(instance, state);
    const int n = instance.size();
    const double coupling_scale =
        2.0 * state.s / (instance.coordination() * (1.0 - state.s));
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i) {
        const double sz = state.sz[i];
        const double q = 1.0 - 4.0 * sz * sz;
        for (int k = 0; k < n; ++k) {
            m(i, k) = -sz * coupling_scale * instance.coupling(i, k);
        }
        m(i, i) = (1.0 + 4.0 * sz * sz / q) * (2.0 * sz / std::sqrt(q));
    }
    return m;
}

Eigen::MatrixXd assemble_m_reduced(const IsingInstance& instance, const FlowState& state) {
    validate_state(instance, state);
    return reduced_matrix_at(instance, state.s, state.sz);
}

Eigen::VectorXd flow_rhs(const IsingInstance& instance, const FlowState& state) {
    validate_state(instance, state);
    try {
        return rhs_or_reject(instance, state.s, state.sz);
    } catch (const StepReject&) {
        throw NumericalError("flow matrix is singular at s = " + std::to_string(state.s));
    }
}

double mean_field_energy(const IsingInstance& instance, const FlowState& state,
                         const Eigen::VectorXd& sx) {
    const double s = state.s;
    const double quad = state.sz.dot(instance.couplings() * state.sz); // ordered double sum
    return -(1.0 - s) * sx.sum() - (s / instance.coordination()) * quad -
           s * instance.fields().dot(state.sz);
}

SolveOutcome finalize(const IsingInstance& instance, FlowTrace trace,
                      const SolverConfig& config) {
    if (trace.empty()) {
        throw InternalError("finalize called with an empty trace");
    }
    const FlowState& last = trace.back().state;
    for (Eigen::Index i = 0; i < last.sz.size(); ++i) {
        if (std::abs(last.sz[i]) < config.round_threshold) {
            SolveOutcome out;
            out.status = SolveStatus::Degenerate;
            out.reason = "ambiguous rounding: |sz| at site " + std::to_string(i) +
                         " ended below the decision threshold";
            out.trace = std::move(trace);
            return out;
        }
    }
    SpinConfiguration spins = SpinConfiguration::from_signs(last.sz);
    if (!is_one_flip_local_min(instance, spins)) {
        throw InternalError("rounded configuration violates the fixed-point condition "
                            "sigma = sign(b)/2; integrator tolerances are suspect");
    }
    SolveOutcome out;
    out.status = SolveStatus::Converged;
    out.e0 = classical_energy(instance, spins);
    out.spins = std::move(spins);
    out.trace = std::move(trace);
    return out;
}

SolveOutcome integrate(const IsingInstance& instance, const SolverConfig& config) {
    config.validate();

    if ((instance.fields().array() == 0.0).all()) {
        SolveOutcome out;
        out.status = SolveStatus::Degenerate;
        out.reason = "all fields are zero: the initial state sz = s0 J/2 vanishes and the "
                     "flow never leaves it";
        return out;
    }

    double s = config.s0;
    Eigen::VectorXd y = (config.s0 / 2.0) * instance.fields();
    // Settle onto the on-shell manifold at s0; the asymptote sz = s J/2 is its
    // small-s limit and seeds the fixed point.
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd next = on_shell_sz(drive_at(instance, s, y));
        const double delta = (next - y).cwiseAbs().maxCoeff();
        y = std::move(next);
        if (delta < 1e-15) break;
    }

    FlowTrace trace;
    auto initial = analyze_matrix(instance, s, y);
    if (!initial) {
        throw NumericalError("initial state left the admissible domain");
    }
    trace.push_back(make_sample(instance, s, y, *initial));
    int prev_sign = initial->det_sign;

    Eigen::VectorXd k[7];
    try {
        k[0] = rhs_or_reject(instance, s, y);
    } catch (const StepReject&) {
        throw NumericalError("flow matrix is singular at the start point");
    }

    auto singular_outcome = [&](double s_sing, FlowTrace&& tr) {
        SolveOutcome out;
        out.status = SolveStatus::Singular;
        out.s_sing = s_sing;
        out.trace = std::move(tr);
        return out;
    };

    // Bisects [sa, sb] for the earliest point where `past` holds, using the
    // cubic Hermite interpolant through the bracketing accepted states.
    auto bisect = [&](double sa, const Eigen::VectorXd& ya, const Eigen::VectorXd& fa, double sb,
                      const Eigen::VectorXd& yb, const Eigen::VectorXd& fb,
                      auto past) {
        double lo = sa, hi = sb;
        while (hi - lo > config.bisect_tol) {
            const double mid = 0.5 * (lo + hi);
            const Eigen::VectorXd ym = hermite(sa, ya, fa, sb, yb, fb, mid);
            if (past(mid, ym)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return 0.5 * (lo + hi);
    };

    double h = 1e-4;
    constexpr std::size_t kMaxAcceptedSteps = 2'000'000;

    while (s < config.s_max) {
        bool final_span = false;
        double hs = h;
        if (s + hs >= config.s_max) {
            hs = config.s_max - s;
            final_span = true;
        }
        if (!final_span && hs < config.h_min) {
            return singular_outcome(s, std::move(trace));
        }

        Eigen::VectorXd y_new;
        double err = 0.0;
        try {
            for (int stage = 1; stage < 6; ++stage) {
                Eigen::VectorXd yi = y;
                const double* a = stage == 1   ? kA2
                                  : stage == 2 ? kA3
                                  : stage == 3 ? kA4
                                  : stage == 4 ? kA5
                                               : kA6;
                for (int j = 0; j < stage; ++j) yi += (hs * a[j]) * k[j];
                k[stage] = rhs_or_reject(instance, s + kC[stage] * hs, yi);
            }
            y_new = y;
            for (int j = 0; j < 6; ++j) y_new += (hs * kB[j]) * k[j];
            if (!((1.0 - 4.0 * y_new.array().square()) > 0.0).all() || !y_new.allFinite()) {
                throw StepReject{};
            }
            k[6] = rhs_or_reject(instance, s + hs, y_new); // FSAL stage
            Eigen::VectorXd err_vec = Eigen::VectorXd::Zero(y.size());
            for (int j = 0; j < 7; ++j) err_vec += (hs * kE[j]) * k[j];
            err = error_norm(err_vec, y, y_new, config.rel_tol, config.abs_tol);
        } catch (const StepReject&) {
            h = 0.5 * hs;
            if (h < config.h_min) {
                return singular_outcome(s, std::move(trace));
            }
            continue;
        }

        if (!std::isfinite(err) || err > 1.0) {
            const double factor =
                std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h = hs * std::min(factor, 0.9);
            if (h < config.h_min) {
                return singular_outcome(s, std::move(trace));
            }
            continue;
        }

        const double s_new = s + hs;
        auto analysis = analyze_matrix(instance, s_new, y_new);
        if (!analysis) {
            h = 0.5 * hs;
            if (h < config.h_min) return singular_outcome(s, std::move(trace));
            continue;
        }
        trace.push_back(make_sample(instance, s_new, y_new, *analysis));

        if (prev_sign != 0 && analysis->det_sign != 0 && analysis->det_sign != prev_sign) {
            const double s_sing =
                bisect(s, y, k[0], s_new, y_new, k[6], [&](double sm, const Eigen::VectorXd& ym) {
                    auto a = analyze_matrix(instance, sm, ym);
                    return !a || a->det_sign != prev_sign;
                });
            return singular_outcome(s_sing, std::move(trace));
        }
        if (analysis->rcond < config.rcond_floor) {
            const double s_sing =
                bisect(s, y, k[0], s_new, y_new, k[6], [&](double sm, const Eigen::VectorXd& ym) {
                    auto a = analyze_matrix(instance, sm, ym);
                    return !a || a->rcond < config.rcond_floor;
                });
            return singular_outcome(s_sing, std::move(trace));
        }

        s = s_new;
        y = std::move(y_new);
        k[0] = k[6];
        if (analysis->det_sign != 0) prev_sign = analysis->det_sign;
        if (trace.size() > kMaxAcceptedSteps) {
            throw NumericalError("accepted-step budget exceeded; integration is not advancing");
        }
        if (!final_span) {
            const double factor = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)))
                                            : 5.0;
            h = hs * factor;
        }
    }

    return finalize(instance, std::move(trace), config);
}

void write_trace_csv(std::ostream& out, const FlowTrace& trace) {
    const int n = trace.empty() ? 0 : static_cast<int>(trace.front().state.sz.size());
    out << "s";
    for (int i = 0; i < n; ++i) out << ",sz_" << i;
    out << ",e_mf,det_sign,rcond\n";
    for (const FlowSample& sample : trace) {
        out << g17(sample.state.s);
        for (int i = 0; i < n; ++i) out << ',' << g17(sample.state.sz[i]);
        out << ',' << g17(sample.diag.e_mf) << ',' << sample.diag.det_sign << ','
            << g17(sample.diag.rcond) << '\n';
    }
}

} // namespace mfanneal
