// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The mimo-gpi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef MIMO_GPI_HARQ_GPI_HPP
#define MIMO_GPI_HARQ_GPI_HPP

// Round-by-round precoding for IR-HARQ and its full-knowledge counterpart.
//
// Round t (0-based) optimizes the tail precoder for rounds t..T-1. The current
// round is seen through its realized channel, later rounds through their
// covariances. After convergence the leading block is kept, its share of the
// tail norm is stored as q(t), and the rest seeds the next round.

#include "delay_gpi.hpp"

namespace mimo_gpi {

/// Round-`first` problem. Pairs 0..K-1 are the realized forms; future forms of
/// constrained users follow. `carried[k]` is the bound already secured by user k
/// in earlier rounds.
inline GpiProblem harq_round_problem(const HarqForms& hf, const ScenarioConfig& cfg, const std::vector<double>& carried)
{
    const int K = cfg.users();
    if (static_cast<int>(carried.size()) != K)
        throw std::invalid_argument("harq_round_problem: carried rates need one entry per user");
    GpiProblem p;
    p.pairs = hf.realized;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (!cfg.constrained(k)) {
            p.objective.push_back(ku);
            continue;
        }
        const auto coeffs = harq_coeffs(cfg, k, hf.first, hf.horizon);
        for (const auto& c : coeffs)
            if (c.f >= 1.0)
                throw VacuousBoundError("user " + std::to_string(k) + ": log-linear bound is vacuous (f = " +
                                        std::to_string(c.f) + ")");
        Constraint con{k, cfg.rate_target(k), carried[ku], {{ku, 1.0 - coeffs[0].f, coeffs[0]}}};
        for (std::size_t j = 0; j < hf.future.at(ku).size(); ++j) {
            p.pairs.push_back(hf.future[ku][j]);
            con.terms.push_back({p.pairs.size() - 1, 1.0 - coeffs[j + 1].f, coeffs[j + 1]});
        }
        p.constraints.push_back(std::move(con));
    }
    return p;
}

/// Condition matrices of the round-`first` tail problem. At the last round this
/// is the reduced form without future terms.
inline ConditionMatrices build_harq_condition_matrices(const HarqForms& hf, const ScenarioConfig& cfg,
                                                       const ComplexVector& u_tail, const std::vector<double>& lambda)
{
    return build_condition_matrices(
        harq_round_problem(hf, cfg, std::vector<double>(static_cast<std::size_t>(cfg.users()), 0.0)), u_tail, lambda);
}

/// Last-round condition matrices written out directly from the realized
/// round-`round` channels; `lambda` has one entry per constrained user.
inline ConditionMatrices build_last_round_condition_matrices(const ChannelSet& cs, const ScenarioConfig& cfg, int round,
                                                             const ComplexVector& u, const std::vector<double>& lambda)
{
    const int N = cs.antennas(), K = cs.users();
    if (u.size() != static_cast<Eigen::Index>(N) * K)
        throw std::invalid_argument("build_last_round_condition_matrices: precoder must span one round");
    if (static_cast<int>(lambda.size()) != cfg.K_s)
        throw std::invalid_argument("build_last_round_condition_matrices: one multiplier per constrained user");
    ConditionMatrices cm{BlockDiagMatrix(N, K), BlockDiagMatrix(N, K)};
    for (int k = 0; k < K; ++k) {
        double weight = 1.0;
        if (cfg.constrained(k)) {
            const auto c = log_bound_coeffs(cfg.anchor(k, round), cfg.m, cfg.epsilon.at(static_cast<std::size_t>(k)));
            weight = lambda[static_cast<std::size_t>(k - cfg.K_t)] * (1.0 - c.f);
        }
        if (weight == 0.0)
            continue;
        const ComplexVector& h = cs.h(k, round);
        const double s = cfg.noise_ratio(k);
        // u^H D u = sum_i |h^H u_i|^2 + s, u^H E u drops i = k.
        double all = 0.0, own = 0.0;
        for (int i = 0; i < K; ++i) {
            const double g = std::norm(h.dot(precoder_block(u, N, K, i)));
            all += g;
            if (i == k)
                own = g;
        }
        const double qd = all + s * u.squaredNorm();
        const double qe = qd - own;
        const ComplexMatrix hh = h * h.adjoint();
        for (int i = 0; i < K; ++i) {
            ComplexMatrix d = hh;
            d.diagonal().array() += s;
            ComplexMatrix e = d;
            if (i == k)
                e -= hh;
            cm.a.block(i) += (2.0 * weight / qd) * d;
            cm.b.block(i) += (2.0 * weight / qe) * e;
        }
        cm.log_scale_a += weight * std::log(qd);
        cm.log_scale_b += weight * std::log(qe);
    }
    return cm;
}

/// Per-round record of a HARQ solve.
struct HarqPlan {
    std::vector<ComplexVector> round_precoders; ///< u*(t), unit norm (zero if the round block vanished)
    std::vector<double> q;                      ///< share of round t in its tail precoder
    std::vector<std::vector<double>> realized;  ///< R-bar_k(t), zero for tolerant users
    RoundWeighting weighting = RoundWeighting::amplitude;
};

/// Cascade q(0), (1-q(0))q(1), ... applied to the stored round precoders, then
/// normalized. Power weighting applies the square root of the same cascade.
inline ComplexVector recombine_rounds(const HarqPlan& plan)
{
    const std::size_t T = plan.round_precoders.size();
    if (T == 0 || plan.q.size() != T)
        throw std::invalid_argument("recombine_rounds: need one precoder and one q per round");
    const Eigen::Index slot = plan.round_precoders.front().size();
    ComplexVector u(slot * static_cast<Eigen::Index>(T));
    double rest = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (plan.round_precoders[t].size() != slot)
            throw std::invalid_argument("recombine_rounds: round precoders differ in size");
        const double c = plan.q[t] * rest;
        rest *= 1.0 - plan.q[t];
        const double w = plan.weighting == RoundWeighting::power ? std::sqrt(c) : c;
        u.segment(slot * static_cast<Eigen::Index>(t), slot) = w * plan.round_precoders[t];
    }
    return normalized(u);
}

struct HarqRoundResult {
    GpiOutcome outcome;
    GpiProblem problem;
    ComplexVector round_precoder; ///< leading block, unit norm
    double q = 1.0;
    std::vector<double> realized; ///< R-bar_k at this round
};

/// One round of the recursion: solves the tail problem from `u0` and extracts
/// the leading block.
inline HarqRoundResult harq_gpi_round(const ChannelSet& cs, const ScenarioConfig& cfg, int first,
                                      const std::vector<double>& carried, const ComplexVector& u0)
{
    const int N = cs.antennas(), K = cs.users(), T = cfg.T;
    const auto hf = build_harq_quadratic_forms(cs, cfg, first, T);
    HarqRoundResult r;
    r.problem = harq_round_problem(hf, cfg, carried);
    r.outcome = solve_gpi(r.problem, u0, SolverSettings::from(cfg));

    const ComplexVector lead = precoder_slot(r.outcome.u, N, K, 0);
    const double share = lead.norm() / r.outcome.u.norm();
    r.q = first == T - 1 ? 1.0 : (cfg.q_weighting == RoundWeighting::power ? share * share : share);
    r.round_precoder = share > 0.0 ? ComplexVector(lead / lead.norm()) : ComplexVector::Zero(lead.size());

    r.realized.assign(static_cast<std::size_t>(K), 0.0);
    for (int k = cfg.K_t; k < K; ++k) {
        const auto c = log_bound_coeffs(cfg.anchor(k, first), cfg.m, cfg.epsilon.at(static_cast<std::size_t>(k)));
        r.realized[static_cast<std::size_t>(k)] =
            bound_from_quotient(hf.realized[static_cast<std::size_t>(k)].quotient(r.outcome.u), c);
    }
    return r;
}

struct HarqSolve {
    SolveResult result;
    HarqPlan plan;
};

/// RZF of round t repeated over `slots` rounds, unit norm overall.
inline ComplexVector replicated_rzf(const ChannelSet& cs, const ScenarioConfig& cfg, int t, int slots)
{
    const ComplexVector r = rzf(cs, cfg.P, cfg.mean_sigma2(), t);
    ComplexVector u(r.size() * slots);
    for (int s = 0; s < slots; ++s)
        u.segment(r.size() * s, r.size()) = r;
    return u / std::sqrt(static_cast<double>(slots));
}

/// Tolerant users: accumulated Shannon rate of the stacked precoder over all rounds.
inline double harq_tolerant_rate(const ChannelSet& cs, const ScenarioConfig& cfg, const ComplexVector& u, int k)
{
    double r = 0.0;
    for (double g : round_sinrs(cs, cfg, u, k, cfg.T))
        r += shannon_se(g);
    return r;
}

inline HarqSolve harq_gpi_solve(const ChannelSet& cs, const ScenarioConfig& cfg)
{
    cfg.validate();
    const int N = cs.antennas(), K = cs.users(), T = cfg.T;
    if (cs.rounds() < T)
        throw std::invalid_argument("harq_gpi_solve: channel set has fewer rounds than T");

    HarqSolve out;
    out.plan.weighting = cfg.q_weighting;
    auto& res = out.result;
    std::vector<double> carried(static_cast<std::size_t>(K), 0.0);
    bool all_rounds_ok = true;
    ComplexVector start = replicated_rzf(cs, cfg, 0, T);

    for (int t = 0; t < T; ++t) {
        auto r = harq_gpi_round(cs, cfg, t, carried, start);
        all_rounds_ok = all_rounds_ok && r.outcome.feasible;
        res.outer_iterations += r.outcome.outer_iterations;
        res.inner_iterations += r.outcome.inner_iterations;
        res.stationarity_residual = std::max(res.stationarity_residual, r.outcome.residual);
        res.inner_converged = res.inner_converged && r.outcome.inner_converged;
        for (const auto& h : r.outcome.multiplier_history)
            res.multiplier_history.push_back(per_user(r.problem, h, K));
        res.multipliers = per_user(r.problem, r.outcome.multipliers, K);
        res.log_phi = r.outcome.log_phi;

        for (int k = 0; k < K; ++k)
            carried[static_cast<std::size_t>(k)] += r.realized[static_cast<std::size_t>(k)];
        out.plan.round_precoders.push_back(r.round_precoder);
        out.plan.q.push_back(r.q);
        out.plan.realized.push_back(r.realized);

        if (t + 1 < T) {
            const Eigen::Index slot = static_cast<Eigen::Index>(N) * K;
            const ComplexVector rest = r.outcome.u.tail(r.outcome.u.size() - slot);
            start = rest.norm() > 1e-12 ? normalized(rest) : replicated_rzf(cs, cfg, t + 1, T - t - 1);
        }
    }

    res.precoder = recombine_rounds(out.plan);
    bool met = true;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (cfg.constrained(k)) {
            res.per_user_rates.push_back(carried[ku]);
            met = met && carried[ku] >= cfg.rate_target(k);
        } else {
            res.per_user_rates.push_back(harq_tolerant_rate(cs, cfg, res.precoder, k));
        }
    }
    res.feasible = all_rounds_ok && met;
    return out;
}

/// Full-knowledge problem over all T rounds: maximize the tolerant rates of every
/// round subject to sum_t R~_{k,t} >= D_s / delta_k.
inline GpiProblem perfect_gpi_problem(const ChannelSet& cs, const ScenarioConfig& cfg)
{
    const int K = cfg.users(), T = cfg.T;
    const auto forms = build_perfect_quadratic_forms(cs, cfg, T);
    GpiProblem p;
    for (int k = 0; k < K; ++k) {
        const auto ku = static_cast<std::size_t>(k);
        if (!cfg.constrained(k)) {
            for (int t = 0; t < T; ++t) {
                p.pairs.push_back(forms[ku][static_cast<std::size_t>(t)]);
                p.objective.push_back(p.pairs.size() - 1);
            }
            continue;
        }
        Constraint con{k, cfg.rate_target(k), 0.0, {}};
        const auto coeffs = harq_coeffs(cfg, k, 0, T);
        for (int t = 0; t < T; ++t) {
            const auto& c = coeffs[static_cast<std::size_t>(t)];
            if (c.f >= 1.0)
                throw VacuousBoundError("user " + std::to_string(k) + ": log-linear bound is vacuous (f = " +
                                        std::to_string(c.f) + ")");
            p.pairs.push_back(forms[ku][static_cast<std::size_t>(t)]);
            con.terms.push_back({p.pairs.size() - 1, 1.0 - c.f, c});
        }
        p.constraints.push_back(std::move(con));
    }
    return p;
}

inline SolveResult perfect_gpi_solve(const ChannelSet& cs, const ScenarioConfig& cfg)
{
    cfg.validate();
    const int K = cfg.users(), T = cfg.T;
    if (cs.rounds() < T)
        throw std::invalid_argument("perfect_gpi_solve: channel set has fewer rounds than T");
    const auto problem = perfect_gpi_problem(cs, cfg);

    const int N = cs.antennas();
    const Eigen::Index slot = static_cast<Eigen::Index>(N) * K;
    ComplexVector u0(slot * T);
    for (int t = 0; t < T; ++t)
        u0.segment(slot * t, slot) = rzf(cs, cfg.P, cfg.mean_sigma2(), t);

    auto r = to_solve_result(problem, solve_gpi(problem, normalized(u0), SolverSettings::from(cfg)), K);
    for (int k = 0; k < K; ++k) {
        if (!cfg.constrained(k)) {
            r.per_user_rates.push_back(harq_tolerant_rate(cs, cfg, r.precoder, k));
            continue;
        }
        r.per_user_rates.push_back(problem.constraint_value(static_cast<std::size_t>(k - cfg.K_t), r.precoder));
    }
    return r;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_HARQ_GPI_HPP
