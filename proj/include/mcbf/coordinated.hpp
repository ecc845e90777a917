// SPDX-License-Identifier: Apache-2.0
//
// Coordinated beamforming solver: leakage matrices, the Γ = T^{-1} family,
// per-beam β, per-BS dual bisection and the outer/inner fixed-point loop
// shared by ICBF, ICBF-WI and CB-REFIM. Plus KKT diagnostics.

#pragma once

#include "mcbf/beams.hpp"
#include "mcbf/config.hpp"
#include "mcbf/metrics.hpp"
#include "mcbf/network.hpp"

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mcbf {

inline constexpr double kLn2 = 0.69314718055994530942;

enum class Algorithm { icbf, icbf_wi, cb_refim };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algo);

/// How Γ_{m,k}(n; λ) is formed from the leakage matrix.
enum class GammaMode {
    direct,            // (L + λ ln2 I)^{-1} by a Hermitian solve
    sherman_morrison,  // rank-one inverse-free form, exact only when rank(L) <= 1
    exact_rank_r,      // sequential rank-one updates over the leakage factors
};

/// Hermitian PSD leakage matrix, kept together with the rank-one factors
/// f_i it was summed from (L = sum f_i f_i^H).
struct LeakageMatrix {
    Mat matrix;
    std::vector<Vec> factors;
    int rank_hint = 0;

    static LeakageMatrix zero(int nt);
    void add_term(double q, const Vec& h);
};

/// Per-BS Lagrange multipliers and the last bisection bracket.
struct DualVariables {
    std::vector<double> lambda;
    std::vector<double> bracket_lo;
    std::vector<double> bracket_hi;

    explicit DualVariables(int num_bs = 0, double lambda_min = 1e-10);
};

/// i_{m,k}(n): power received by user (m,k) from every other active beam.
double interference(const ChannelState& channels, const BeamSet& beams, int m, int k, int n);

/// q_{j,u}(n) = w_u SINR_{j,u} / (1 + total received power at u), where the
/// total includes u's own desired signal.
double q_coefficient(const CrossGains& gains, const NetworkConfig& config, int j, int u, int n);

/// sum over active (j,u) != (m,k) on n of q_{j,u}(n) h_{m,u} h_{m,u}^H.
LeakageMatrix leakage_full(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config,
                           int m, int k, int n);

/// Full leakage for every triple, indexed by Dims::triple (inactive ones empty).
std::vector<LeakageMatrix> leakage_full_all(const ChannelState& channels, const BeamSet& beams,
                                            const NetworkConfig& config);

Mat gamma_direct(const Mat& leakage, double lambda);

/// (1/(λ ln2)) (I - L / (λ ln2 + tr L)).
Mat gamma_sherman_morrison(const Mat& leakage, double lambda);

Mat gamma_for(const LeakageMatrix& leakage, double lambda, GammaMode mode);

/// β from [w u - i - 1]^+ / u^2 with u = h^H Γ h. Throws NumericalError when
/// u is not real and positive.
double beta(const Vec& h, const Mat& gamma, double interference, double weight);

/// One triple's response to the dual variable with leakage, interference and
/// weight frozen. Evaluates u(λ) and |Γ h|^2 in O(Nt) per λ (spectral form
/// for the exact modes, closed form for Sherman-Morrison).
class TripleResponse {
public:
    TripleResponse(const Vec& h, const LeakageMatrix& leakage, double interference, double weight,
                   GammaMode mode);

    struct Eval {
        double u = 0.0;
        double gamma_h_sq = 0.0;
        double beta = 0.0;
        double power = 0.0;  // β^2 |Γ h|^2
    };
    Eval evaluate(double lambda) const;

    /// β Γ h with Γ built by gamma_for() and β by beta().
    Vec beam(double lambda) const;

    /// w |h|^2 / ln2, the per-triple bound on the useful λ range.
    double lambda_bound() const { return weight_ * h_.squaredNorm() / kLn2; }

private:
    Vec h_;
    LeakageMatrix leakage_;
    double interference_;
    double weight_;
    GammaMode mode_;

    // spectral data for the exact modes
    Eigen::VectorXd eig_;
    Eigen::VectorXd proj_sq_;
    // closed-form data for Sherman-Morrison
    double hh_ = 0.0, hlh_ = 0.0, lh_sq_ = 0.0, trace_ = 0.0;
};

struct BisectionResult {
    double lambda = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double power = 0.0;
    int steps = 0;
};

/// Total BS power f(λ) = sum of β^2 |Γ h|^2 over the given triples.
double power_at(std::span<const TripleResponse> triples, double lambda);

/// Smallest λ in [lambda_min, max bound] with f(λ) <= p_max. Returns
/// lambda_min without bisecting when the constraint is inactive there.
BisectionResult lambda_bisection(std::span<const TripleResponse> triples, double p_max, double lambda_min);

/// One Table-1 inner sweep: with leakage and interference fixed, bisect λ_m
/// and set v = β Γ h for each BS m in index order. `interference` is indexed
/// by Dims::triple.
BeamSet update_beams(const ChannelState& channels, std::span<const LeakageMatrix> leakages,
                     std::span<const double> interference, const NetworkConfig& config, GammaMode mode,
                     DualVariables& duals);

struct KktReport {
    double power_violation = 0.0;   // max_m max(0, P_m - p_max)
    double min_lambda = 0.0;
    double slackness = 0.0;         // max_m |λ_m (p_max - P_m)|
    double stationarity = 0.0;      // max relative residual of T v = w G v / (1 + v^H G v + i)
    double gradient_fd_error = 0.0; // analytic vs central-difference Lagrangian gradient, relative
};

struct TraceEntry {
    int outer = 0;
    int inner = 0;
    double sum_rate = 0.0;
    std::vector<double> power;
    double residual = 0.0;  // relative weighted-sum-rate change vs previous iterate
};

struct SolverTrace {
    double initial_sum_rate = 0.0;
    std::vector<TraceEntry> entries;
    std::vector<double> outer_sum_rate;  // after each executed outer iteration
    double best_sum_rate = 0.0;
    bool converged = false;
    int non_monotone_steps = 0;
    KktReport kkt;
};

struct SolveOptions {
    Algorithm algo = Algorithm::icbf;
    int refs = 1;  // reference users per beam, CB-REFIM only
};

struct SolveResult {
    BeamSet beams;
    DualVariables duals;
    SolverTrace trace;
};

/// Outer loop recomputes leakage (and CB-REFIM references); inner loop
/// recomputes interference, then λ, β and beams per BS. Returns the best
/// iterate seen, including the initial beams.
SolveResult solve(const ChannelState& channels, const NetworkConfig& config, const BeamSet& init,
                  const SolveOptions& options);

/// Partial Lagrangian: weighted sum-rate + sum λ_m (p_max - P_m).
double lagrangian(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                  const NetworkConfig& config);

/// Real gradient of the Lagrangian for every active beam, packed as
/// dL/dRe(v) + j dL/dIm(v) (indexed by Dims::triple).
std::vector<Vec> lagrangian_gradient(const ChannelState& channels, const BeamSet& beams,
                                     const DualVariables& duals, const NetworkConfig& config);

/// Central differences of lagrangian() with the given step, same packing.
std::vector<Vec> lagrangian_gradient_fd(const ChannelState& channels, const BeamSet& beams,
                                        const DualVariables& duals, const NetworkConfig& config,
                                        double step = 1e-5);

/// max over active triples of |T v - w G v / (1 + v^H G v + i)| / |v| with the
/// full leakage of the given beams; zero beams contribute nothing.
double stationarity_residual(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                             const NetworkConfig& config);

/// Least-squares λ_m >= lambda_min that best satisfies stationarity for fixed
/// beams; used to score beams that did not come with multipliers.
DualVariables fit_duals(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config);

KktReport kkt_report(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                     const NetworkConfig& config, double fd_step = 1e-5);

/// Header "outer,inner,sum_rate,power_1..power_M,residual".
void write_trace_csv(const SolverTrace& trace, int num_bs, std::ostream& out);

} // namespace mcbf
