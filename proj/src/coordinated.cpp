// SPDX-License-Identifier: Apache-2.0

#include "mcbf/coordinated.hpp"

#include "mcbf/refim.hpp"

#include "csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace mcbf {

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "icbf") return Algorithm::icbf;
    if (name == "icbf_wi") return Algorithm::icbf_wi;
    if (name == "cb_refim") return Algorithm::cb_refim;
    throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected icbf|icbf_wi|cb_refim)");
}

std::string_view to_string(Algorithm algo)
{
    switch (algo) {
    case Algorithm::icbf: return "icbf";
    case Algorithm::icbf_wi: return "icbf_wi";
    case Algorithm::cb_refim: return "cb_refim";
    }
    return "?";
}

LeakageMatrix LeakageMatrix::zero(int nt)
{
    LeakageMatrix l;
    l.matrix = Mat::Zero(nt, nt);
    return l;
}

void LeakageMatrix::add_term(double q, const Vec& h)
{
    if (q < 0.0) throw NumericalError("negative leakage coefficient");
    Vec f = std::sqrt(q) * h;
    matrix.noalias() += f * f.adjoint();
    factors.push_back(std::move(f));
    ++rank_hint;
}

DualVariables::DualVariables(int num_bs, double lambda_min)
    : lambda(static_cast<std::size_t>(num_bs), lambda_min),
      bracket_lo(static_cast<std::size_t>(num_bs), lambda_min),
      bracket_hi(static_cast<std::size_t>(num_bs), lambda_min)
{
}

double interference(const ChannelState& channels, const BeamSet& beams, int m, int k, int n)
{
    const Dims& d = beams.dims();
    if (!beams.is_active(m, k, n)) throw UsageError("interference of an inactive triple");
    const int user = d.user_id(m, k);
    double total = 0.0;
    for (int l = 0; l < d.num_bs; ++l)
        for (int s = 0; s < d.users_per_cell; ++s) {
            if ((l == m && s == k) || !beams.is_active(l, s, n)) continue;
            total += std::norm(channels.h(l, user, n).dot(beams.at(l, s, n)));
        }
    return total;
}

double q_coefficient(const CrossGains& gains, const NetworkConfig& config, int j, int u, int n)
{
    const int user = config.dims.user_id(j, u);
    return config.weight(user, n) * gains.sinr(j, u, n) / gains.received_plus_noise(user, n);
}

namespace {

LeakageMatrix leakage_from_gains(const CrossGains& gains, const ChannelState& channels, const NetworkConfig& config,
                                 int m, int k, int n)
{
    const Dims& d = config.dims;
    LeakageMatrix l = LeakageMatrix::zero(d.num_antennas);
    for (int j = 0; j < d.num_bs; ++j)
        for (int u = 0; u < d.users_per_cell; ++u) {
            if ((j == m && u == k) || !config.is_active(j, u, n)) continue;
            l.add_term(q_coefficient(gains, config, j, u, n), channels.h(m, d.user_id(j, u), n));
        }
    return l;
}

} // namespace

LeakageMatrix leakage_full(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config, int m,
                           int k, int n)
{
    if (!beams.is_active(m, k, n)) throw UsageError("leakage of an inactive triple");
    const CrossGains gains(channels, beams);
    return leakage_from_gains(gains, channels, config, m, k, n);
}

std::vector<LeakageMatrix> leakage_full_all(const ChannelState& channels, const BeamSet& beams,
                                            const NetworkConfig& config)
{
    const CrossGains gains(channels, beams);
    std::vector<LeakageMatrix> out(config.dims.num_triples());
    beams.for_each_active([&](int m, int k, int n, const Vec&) {
        out[config.dims.triple(m, k, n)] = leakage_from_gains(gains, channels, config, m, k, n);
    });
    return out;
}

Mat gamma_direct(const Mat& leakage, double lambda)
{
    const Eigen::Index nt = leakage.rows();
    const Mat t = leakage + (lambda * kLn2) * Mat::Identity(nt, nt);
    Eigen::LLT<Mat> llt(t);
    if (llt.info() != Eigen::Success) throw NumericalError("T = L + λ ln2 I is not positive definite");
    Mat g = llt.solve(Mat::Identity(nt, nt));
    return 0.5 * (g + g.adjoint());
}

Mat gamma_sherman_morrison(const Mat& leakage, double lambda)
{
    const Eigen::Index nt = leakage.rows();
    const double c = lambda * kLn2;
    const double tr = leakage.trace().real();
    return (Mat::Identity(nt, nt) - leakage / (c + tr)) / c;
}

Mat gamma_for(const LeakageMatrix& leakage, double lambda, GammaMode mode)
{
    switch (mode) {
    case GammaMode::direct: return gamma_direct(leakage.matrix, lambda);
    case GammaMode::sherman_morrison: return gamma_sherman_morrison(leakage.matrix, lambda);
    case GammaMode::exact_rank_r:
        return invert_rank_r(leakage.factors, lambda, static_cast<int>(leakage.matrix.rows()));
    }
    throw UsageError("unknown gamma mode");
}

double beta(const Vec& h, const Mat& gamma, double interference, double weight)
{
    const cdouble uc = h.dot(gamma * h);
    const double u = uc.real();
    if (!(u > 0.0)) throw NumericalError("u = h^H Γ h is not positive");
    if (std::abs(uc.imag()) > 1e-10 * std::abs(u)) throw NumericalError("u = h^H Γ h is not real");
    const double num = std::max(0.0, weight * u - interference - 1.0);
    return std::sqrt(num) / u;
}

TripleResponse::TripleResponse(const Vec& h, const LeakageMatrix& leakage, double interference, double weight,
                               GammaMode mode)
    : h_(h), leakage_(leakage), interference_(interference), weight_(weight), mode_(mode)
{
    if (mode_ == GammaMode::sherman_morrison) {
        const Vec lh = leakage_.matrix * h_;
        hh_ = h_.squaredNorm();
        hlh_ = h_.dot(lh).real();
        lh_sq_ = lh.squaredNorm();
        trace_ = leakage_.matrix.trace().real();
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(leakage_.matrix);
        if (es.info() != Eigen::Success) throw NumericalError("leakage eigendecomposition failed");
        eig_ = es.eigenvalues().cwiseMax(0.0);
        proj_sq_ = (es.eigenvectors().adjoint() * h_).cwiseAbs2();
    }
}

TripleResponse::Eval TripleResponse::evaluate(double lambda) const
{
    const double c = lambda * kLn2;
    Eval e;
    if (mode_ == GammaMode::sherman_morrison) {
        const double ct = c + trace_;
        e.u = (hh_ - hlh_ / ct) / c;
        e.gamma_h_sq = (hh_ - 2.0 * hlh_ / ct + lh_sq_ / (ct * ct)) / (c * c);
    } else {
        for (Eigen::Index i = 0; i < eig_.size(); ++i) {
            const double inv = 1.0 / (eig_[i] + c);
            e.u += proj_sq_[i] * inv;
            e.gamma_h_sq += proj_sq_[i] * inv * inv;
        }
    }
    if (e.u > 0.0) {
        const double num = std::max(0.0, weight_ * e.u - interference_ - 1.0);
        e.beta = std::sqrt(num) / e.u;
        e.power = num / (e.u * e.u) * e.gamma_h_sq;
    }
    return e;
}

Vec TripleResponse::beam(double lambda) const
{
    const Mat g = gamma_for(leakage_, lambda, mode_);
    const double b = beta(h_, g, interference_, weight_);
    return b * (g * h_);
}

double power_at(std::span<const TripleResponse> triples, double lambda)
{
    double p = 0.0;
    for (const TripleResponse& t : triples) p += t.evaluate(lambda).power;
    return p;
}

BisectionResult lambda_bisection(std::span<const TripleResponse> triples, double p_max, double lambda_min)
{
    BisectionResult r;
    r.lambda = r.lo = r.hi = lambda_min;
    r.power = power_at(triples, lambda_min);
    if (r.power <= p_max) return r;

    double upper = lambda_min;
    for (const TripleResponse& t : triples) upper = std::max(upper, t.lambda_bound());
    double f_hi = power_at(triples, upper);
    if (f_hi > p_max * (1.0 + 1e-12))
        throw NumericalError("λ bracket failure: power " + std::to_string(f_hi) + " exceeds budget at the upper bound");

    double lo = lambda_min;
    double hi = upper;
    int steps = 0;
    while (steps < 200 && hi - lo > 1e-12 * upper) {
        const double mid = 0.5 * (lo + hi);
        const double f = power_at(triples, mid);
        ++steps;
        if (f <= p_max) {
            hi = mid;
            f_hi = f;
            if (f >= p_max * (1.0 - 1e-6)) break;
        } else {
            lo = mid;
        }
    }
    r.lambda = hi;
    r.lo = lo;
    r.hi = hi;
    r.power = f_hi;
    r.steps = steps;
    return r;
}

BeamSet update_beams(const ChannelState& channels, std::span<const LeakageMatrix> leakages,
                     std::span<const double> interference, const NetworkConfig& config, GammaMode mode,
                     DualVariables& duals)
{
    const Dims& d = config.dims;
    if (leakages.size() != d.num_triples() || interference.size() != d.num_triples())
        throw UsageError("leakage/interference tables must be indexed by triple");
    if (duals.lambda.size() != static_cast<std::size_t>(d.num_bs)) duals = DualVariables(d.num_bs, config.lambda_min);

    BeamSet beams(config);
    for (int m = 0; m < d.num_bs; ++m) {
        std::vector<TripleResponse> responses;
        std::vector<std::size_t> slots;
        for (int k = 0; k < d.users_per_cell; ++k)
            for (int n = 0; n < d.num_subchannels; ++n) {
                if (!config.is_active(m, k, n)) continue;
                const std::size_t t = d.triple(m, k, n);
                const int user = d.user_id(m, k);
                responses.emplace_back(channels.h(m, user, n), leakages[t], interference[t], config.weight(user, n),
                                       mode);
                slots.push_back(t);
            }
        const BisectionResult b = lambda_bisection(responses, config.p_max, config.lambda_min);
        duals.lambda[m] = b.lambda;
        duals.bracket_lo[m] = b.lo;
        duals.bracket_hi[m] = b.hi;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            const std::size_t t = slots[i];
            const int k = static_cast<int>((t / d.num_subchannels) % d.users_per_cell);
            const int n = static_cast<int>(t % d.num_subchannels);
            beams.at(m, k, n) = responses[i].beam(b.lambda);
        }
    }
    return beams;
}

namespace {

GammaMode gamma_mode_for(const SolveOptions& options)
{
    switch (options.algo) {
    case Algorithm::icbf: return GammaMode::direct;
    case Algorithm::icbf_wi: return GammaMode::sherman_morrison;
    case Algorithm::cb_refim: return options.refs <= 1 ? GammaMode::sherman_morrison : GammaMode::exact_rank_r;
    }
    return GammaMode::direct;
}

double relative_change(double now, double before)
{
    const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
    return std::abs(now - before) / scale;
}

std::vector<double> interference_table(const ChannelState& channels, const BeamSet& beams)
{
    const Dims& d = beams.dims();
    const CrossGains gains(channels, beams);
    std::vector<double> out(d.num_triples(), 0.0);
    beams.for_each_active([&](int m, int k, int n, const Vec&) {
        out[d.triple(m, k, n)] = std::max(0.0, gains.interference(m, k, n));
    });
    return out;
}

} // namespace

SolveResult solve(const ChannelState& channels, const NetworkConfig& config, const BeamSet& init,
                  const SolveOptions& options)
{
    config.validate();
    const Dims& d = config.dims;
    if (!(init.dims() == d)) throw UsageError("initial beams do not match config dimensions");
    if (!power_feasible(init, config)) throw UsageError("initial beams violate the power budget");
    if (options.algo == Algorithm::cb_refim && options.refs < 0) throw ConfigError("refs must be >= 0");

    const GammaMode mode = gamma_mode_for(options);

    SolveResult result{init, DualVariables(d.num_bs, config.lambda_min), {}};
    SolverTrace& trace = result.trace;

    BeamSet beams = init;
    DualVariables duals(d.num_bs, config.lambda_min);
    double current = weighted_sum_rate(channels, beams, config);
    trace.initial_sum_rate = current;
    double best = current;
    double outer_prev = current;

    for (int outer = 1; outer <= config.outer_iters; ++outer) {
        std::vector<LeakageMatrix> leakages;
        if (options.algo == Algorithm::cb_refim) {
            const ReferenceMap refs = select_all_references(channels, config, options.refs);
            leakages = leakage_refim_all(channels, beams, config, refs);
        } else {
            leakages = leakage_full_all(channels, beams, config);
        }

        for (int inner = 1; inner <= config.inner_iters; ++inner) {
            const std::vector<double> interf = interference_table(channels, beams);
            beams = update_beams(channels, leakages, interf, config, mode, duals);
            const double next = weighted_sum_rate(channels, beams, config);

            TraceEntry e;
            e.outer = outer;
            e.inner = inner;
            e.sum_rate = next;
            e.residual = relative_change(next, current);
            for (int m = 0; m < d.num_bs; ++m) e.power.push_back(beams.bs_power(m));
            trace.entries.push_back(std::move(e));

            if (next < current - 1e-12 * std::abs(current)) ++trace.non_monotone_steps;
            if (next > best) {
                best = next;
                result.beams = beams;
                result.duals = duals;
            }
            const bool settled = relative_change(next, current) <= config.inner_tol;
            current = next;
            if (settled) break;
        }

        trace.outer_sum_rate.push_back(current);
        if (relative_change(current, outer_prev) <= config.outer_tol) {
            trace.converged = true;
            break;
        }
        outer_prev = current;
    }

    trace.best_sum_rate = best;
    trace.kkt = kkt_report(channels, result.beams, result.duals, config);
    return result;
}

double lagrangian(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                  const NetworkConfig& config)
{
    double value = weighted_sum_rate(channels, beams, config);
    for (int m = 0; m < config.dims.num_bs; ++m) value += duals.lambda.at(m) * (config.p_max - beams.bs_power(m));
    return value;
}

std::vector<Vec> lagrangian_gradient(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                                     const NetworkConfig& config)
{
    const Dims& d = config.dims;
    const CrossGains gains(channels, beams);
    std::vector<Vec> grad(d.num_triples());
    beams.for_each_active([&](int m, int k, int n, const Vec& v) {
        const int user = d.user_id(m, k);
        const Vec& h = channels.h(m, user, n);
        // own-rate term w G v / (1 + v^H G v + i)
        const Vec own = (config.weight(user, n) * h.dot(v) / gains.received_plus_noise(user, n)) * h;
        // rate loss this beam causes at every other co-subchannel user
        const LeakageMatrix leak = leakage_from_gains(gains, channels, config, m, k, n);
        grad[d.triple(m, k, n)] = (2.0 / kLn2) * (own - leak.matrix * v) - 2.0 * duals.lambda.at(m) * v;
    });
    return grad;
}

std::vector<Vec> lagrangian_gradient_fd(const ChannelState& channels, const BeamSet& beams,
                                        const DualVariables& duals, const NetworkConfig& config, double step)
{
    const Dims& d = config.dims;
    std::vector<Vec> grad(d.num_triples());
    BeamSet probe = beams;
    beams.for_each_active([&](int m, int k, int n, const Vec& v) {
        Vec g(v.size());
        for (Eigen::Index a = 0; a < v.size(); ++a) {
            double parts[2];
            for (int part = 0; part < 2; ++part) {
                const cdouble delta = part == 0 ? cdouble(step, 0.0) : cdouble(0.0, step);
                probe.at(m, k, n)[a] = v[a] + delta;
                const double up = lagrangian(channels, probe, duals, config);
                probe.at(m, k, n)[a] = v[a] - delta;
                const double down = lagrangian(channels, probe, duals, config);
                probe.at(m, k, n)[a] = v[a];
                parts[part] = (up - down) / (2.0 * step);
            }
            g[a] = cdouble(parts[0], parts[1]);
        }
        grad[d.triple(m, k, n)] = std::move(g);
    });
    return grad;
}

namespace {

// T v - w G v / (1 + v^H G v + i) without the λ ln2 v part.
Vec stationarity_base(const CrossGains& gains, const ChannelState& channels, const NetworkConfig& config, int m, int k,
                      int n, const Vec& v)
{
    const Dims& d = config.dims;
    const int user = d.user_id(m, k);
    const Vec& h = channels.h(m, user, n);
    const LeakageMatrix leak = leakage_from_gains(gains, channels, config, m, k, n);
    const Vec rhs = (config.weight(user, n) * h.dot(v) / gains.received_plus_noise(user, n)) * h;
    return leak.matrix * v - rhs;
}

} // namespace

double stationarity_residual(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                             const NetworkConfig& config)
{
    const CrossGains gains(channels, beams);
    double worst = 0.0;
    beams.for_each_active([&](int m, int k, int n, const Vec& v) {
        const double vn = v.norm();
        if (vn == 0.0) return;
        const Vec r = stationarity_base(gains, channels, config, m, k, n, v) + (duals.lambda.at(m) * kLn2) * v;
        worst = std::max(worst, r.norm() / vn);
    });
    return worst;
}

DualVariables fit_duals(const ChannelState& channels, const BeamSet& beams, const NetworkConfig& config)
{
    const Dims& d = config.dims;
    const CrossGains gains(channels, beams);
    std::vector<double> num(static_cast<std::size_t>(d.num_bs), 0.0);
    std::vector<double> den(static_cast<std::size_t>(d.num_bs), 0.0);
    beams.for_each_active([&](int m, int k, int n, const Vec& v) {
        const Vec r = stationarity_base(gains, channels, config, m, k, n, v);
        num[m] -= v.dot(r).real();
        den[m] += v.squaredNorm();
    });
    DualVariables duals(d.num_bs, config.lambda_min);
    for (int m = 0; m < d.num_bs; ++m) {
        const double c = den[m] > 0.0 ? num[m] / den[m] : 0.0;
        duals.lambda[m] = std::max(config.lambda_min, c / kLn2);
        duals.bracket_lo[m] = duals.bracket_hi[m] = duals.lambda[m];
    }
    return duals;
}

KktReport kkt_report(const ChannelState& channels, const BeamSet& beams, const DualVariables& duals,
                     const NetworkConfig& config, double fd_step)
{
    const Dims& d = config.dims;
    KktReport rep;
    rep.min_lambda = std::numeric_limits<double>::infinity();
    for (int m = 0; m < d.num_bs; ++m) {
        const double p = beams.bs_power(m);
        rep.power_violation = std::max(rep.power_violation, p - config.p_max);
        rep.min_lambda = std::min(rep.min_lambda, duals.lambda.at(m));
        rep.slackness = std::max(rep.slackness, std::abs(duals.lambda.at(m) * (config.p_max - p)));
    }
    rep.power_violation = std::max(0.0, rep.power_violation);
    rep.stationarity = stationarity_residual(channels, beams, duals, config);

    const std::vector<Vec> analytic = lagrangian_gradient(channels, beams, duals, config);
    const std::vector<Vec> numeric = lagrangian_gradient_fd(channels, beams, duals, config, fd_step);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t t = 0; t < analytic.size(); ++t) {
        if (analytic[t].size() == 0) continue;
        diff = std::max(diff, (analytic[t] - numeric[t]).cwiseAbs().maxCoeff());
        scale = std::max(scale, analytic[t].cwiseAbs().maxCoeff());
    }
    rep.gradient_fd_error = scale > 0.0 ? diff / scale : diff;
    return rep;
}

void write_trace_csv(const SolverTrace& trace, int num_bs, std::ostream& out)
{
    using detail::fmt;
    out << "outer,inner,sum_rate";
    for (int m = 1; m <= num_bs; ++m) out << ",power_" << m;
    out << ",residual\n";
    for (const TraceEntry& e : trace.entries) {
        out << e.outer << ',' << e.inner << ',' << fmt(e.sum_rate);
        for (double p : e.power) out << ',' << fmt(p);
        out << ',' << fmt(e.residual) << '\n';
    }
}

} // namespace mcbf
