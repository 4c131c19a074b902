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


#ifndef MIMO_GPI_DELAY_GPI_HPP
#define MIMO_GPI_DELAY_GPI_HPP

#include "baselines.hpp"
#include "gpi.hpp"

namespace mimo_gpi {

/// Output of every precoder optimization in this library.
struct SolveResult {
    ComplexVector precoder;
    bool feasible = false;
    /// Tolerant users: achieved spectral efficiency. Constrained users: the
    /// lower bound the constraint was checked against.
    std::vector<double> per_user_rates;
    /// One multiplier per user; zero for tolerant users.
    std::vector<double> multipliers;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double stationarity_residual = 0.0;
    bool inner_converged = true;
    std::vector<std::vector<double>> multiplier_history;
    double log_phi = 0.0;
};

enum class DelayMode {
    finite,    ///< finite-blocklength bound in both the condition and the check
    infinite,  ///< f = g = 0 inside the condition matrices; finite m when checking feasibility
    imperfect, ///< estimated channels and the error-aware forms
};

inline GpiProblem delay_gpi_problem(const QuadraticForms& qf, const ScenarioConfig& cfg, DelayMode mode)
{
    GpiProblem p;
    p.pairs = qf.users;
    for (int k = 0; k < cfg.users(); ++k) {
        if (!cfg.constrained(k)) {
            p.objective.push_back(static_cast<std::size_t>(k));
            continue;
        }
        const auto c = log_bound_coeffs(cfg.anchor(k, 0), cfg.m, cfg.epsilon.at(static_cast<std::size_t>(k)));
        if (c.f >= 1.0)
            throw VacuousBoundError("user " + std::to_string(k) + ": log-linear bound is vacuous (f = " +
                                    std::to_string(c.f) + ")");
        const double e = mode == DelayMode::infinite ? 1.0 : 1.0 - c.f;
        p.constraints.push_back({k, cfg.rate_target(k), 0.0, {{static_cast<std::size_t>(k), e, c}}});
    }
    return p;
}

/// Condition matrices of the single-shot problem at (u, lambda). `lambda` holds
/// one entry per constrained user.
inline ConditionMatrices build_condition_matrices(const QuadraticForms& qf, const ScenarioConfig& cfg,
                                                  const ComplexVector& u, const std::vector<double>& lambda,
                                                  DelayMode mode = DelayMode::finite)
{
    return build_condition_matrices(delay_gpi_problem(qf, cfg, mode), u, lambda);
}

/// Copy of `cs` whose channels are the CSIT estimates.
inline ChannelSet estimated_channels(const ChannelSet& cs)
{
    ChannelSet out = cs;
    for (int t = 0; t < cs.rounds(); ++t)
        for (int k = 0; k < cs.users(); ++k) {
            auto& uc = out.at(k, t);
            if (!uc.h_est)
                throw std::invalid_argument("estimated_channels: channel set carries no estimates");
            uc.h = *uc.h_est;
        }
    return out;
}

/// Spreads per-constraint multipliers back onto user indices.
inline std::vector<double> per_user(const GpiProblem& p, const std::vector<double>& lambda, int users)
{
    std::vector<double> out(static_cast<std::size_t>(users), 0.0);
    for (std::size_t c = 0; c < p.constraints.size(); ++c)
        out[static_cast<std::size_t>(p.constraints[c].user)] = lambda.at(c);
    return out;
}

inline SolveResult to_solve_result(const GpiProblem& p, GpiOutcome o, int users)
{
    SolveResult r;
    r.feasible = o.feasible;
    r.multipliers = per_user(p, o.multipliers, users);
    for (const auto& h : o.multiplier_history)
        r.multiplier_history.push_back(per_user(p, h, users));
    r.outer_iterations = o.outer_iterations;
    r.inner_iterations = o.inner_iterations;
    r.stationarity_residual = o.residual;
    r.inner_converged = o.inner_converged;
    r.log_phi = o.log_phi;
    r.precoder = std::move(o.u);
    return r;
}

/// Delay-constrained sum-SE maximization from an RZF start.
inline SolveResult delay_gpi_solve(const ChannelSet& cs, const ScenarioConfig& cfg, DelayMode mode = DelayMode::finite)
{
    cfg.validate();
    const bool imperfect = mode == DelayMode::imperfect;
    const auto qf = build_quadratic_forms(cs, cfg, imperfect ? CsitMode::imperfect : CsitMode::perfect);
    const auto problem = delay_gpi_problem(qf, cfg, mode);
    const ComplexVector u0 = imperfect ? rzf(estimated_channels(cs), cfg.P, cfg.mean_sigma2())
                                       : rzf(cs, cfg.P, cfg.mean_sigma2());

    auto r = to_solve_result(problem, solve_gpi(problem, u0, SolverSettings::from(cfg)), cfg.users());
    for (int k = 0; k < cfg.users(); ++k) {
        const auto& pair = qf.users[static_cast<std::size_t>(k)];
        if (!cfg.constrained(k))
            r.per_user_rates.push_back(pair.log2_quotient(r.precoder));
        else
            r.per_user_rates.push_back(bound_from_quotient(
                pair.quotient(r.precoder),
                log_bound_coeffs(cfg.anchor(k, 0), cfg.m, cfg.epsilon.at(static_cast<std::size_t>(k)))));
    }
    return r;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_DELAY_GPI_HPP
