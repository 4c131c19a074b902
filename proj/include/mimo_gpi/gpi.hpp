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

#ifndef MIMO_GPI_GPI_HPP
#define MIMO_GPI_GPI_HPP

// Generalized power iteration with Lagrangian latency constraints.
//
// Every precoding problem in this library has the same shape:
//
//   maximize   sum_{obj} log2(u^H N_i u / u^H D_i u)
//   subject to carried_c + sum_{terms of c} [(1 - f_j) log2(u^H N_j u / u^H D_j u) - g_j] >= target_c
//   over unit-norm u.
//
// Its first-order condition is the self-referential pencil A(u,l) u = phi B(u,l) u,
//
//   A = prod(u^H N u)^e * { sum_obj 2 N / u^H N u + sum_c l_c sum_j 2 e_j N_j / u^H N_j u }
//
// and B the same with the denominators. The product prefactors only rescale the
// pencil, so they are carried as logarithms and never multiplied out; the
// iteration u <- B^-1 A u is invariant to that scale.

#include "numerics.hpp"
#include "rates.hpp"

#include <optional>

namespace mimo_gpi {

/// One log-quotient term of a constraint.
struct ConstraintTerm {
    std::size_t pair = 0;       ///< index into GpiProblem::pairs
    double matrix_exponent = 1; ///< exponent used in the condition matrices (1 - f, or 1 for m = infinity)
    LogBoundCoeffs coeffs;        ///< coefficients used when evaluating the constraint
};

struct Constraint {
    int user = 0;
    double target = 0.0;  ///< D_s / delta_k
    double carried = 0.0; ///< rate already secured outside this problem
    std::vector<ConstraintTerm> terms;
};

struct GpiProblem {
    std::vector<QuotientPair> pairs;
    std::vector<std::size_t> objective; ///< pairs entering the objective with unit weight
    std::vector<Constraint> constraints;

    Eigen::Index dim() const { return pairs.empty() ? 0 : pairs.front().num.dim(); }

    /// Left-hand side of constraint c at u.
    double constraint_value(std::size_t c, const ComplexVector& u) const
    {
        const auto& con = constraints.at(c);
        double v = con.carried;
        for (const auto& t : con.terms)
            v += bound_from_quotient(pairs.at(t.pair).quotient(u), t.coeffs);
        return v;
    }

    /// target - value, positive when violated.
    std::vector<double> violations(const ComplexVector& u) const
    {
        std::vector<double> out;
        for (std::size_t c = 0; c < constraints.size(); ++c)
            out.push_back(constraints[c].target - constraint_value(c, u));
        return out;
    }

    double objective_value(const ComplexVector& u) const
    {
        double s = 0.0;
        for (auto i : objective)
            s += pairs.at(i).log2_quotient(u);
        return s;
    }
};

/// The pencil at a given (u, lambda), with its scalar prefactors kept as logs.
struct ConditionMatrices {
    BlockDiagMatrix a; ///< bracketed sum of the numerator side
    BlockDiagMatrix b; ///< bracketed sum of the denominator side
    double log_scale_a = 0.0;
    double log_scale_b = 0.0;

    /// phi(u, lambda) = prefactor_a / prefactor_b.
    double log_phi() const { return log_scale_a - log_scale_b; }

    /// Full matrices exp(log_scale) * bracket. Overflows for large problems; for tests.
    ComplexMatrix full_a() const { return std::exp(log_scale_a) * a.to_dense(); }
    ComplexMatrix full_b() const { return std::exp(log_scale_b) * b.to_dense(); }

    /// ||A u - phi B u|| / ||A u|| with phi the Rayleigh quotient u^H A u / u^H B u.
    /// Scale-free, so computed on the brackets.
    double stationarity_residual(const ComplexVector& u) const
    {
        const ComplexVector au = a.apply(u);
        const ComplexVector bu = b.apply(u);
        const double ratio = u.dot(au).real() / u.dot(bu).real();
        return (au - ratio * bu).norm() / au.norm();
    }
};

inline ConditionMatrices build_condition_matrices(const GpiProblem& p, const ComplexVector& u,
                                                  const std::vector<double>& lambda)
{
    if (lambda.size() != p.constraints.size())
        throw std::invalid_argument("build_condition_matrices: one multiplier per constraint required");
    if (p.pairs.empty())
        throw std::invalid_argument("build_condition_matrices: empty problem");
    const auto& ref = p.pairs.front().num;
    ConditionMatrices cm{BlockDiagMatrix(ref.block_size(), ref.block_count()),
                         BlockDiagMatrix(ref.block_size(), ref.block_count())};

    auto add = [&](std::size_t pair, double weight) {
        if (weight == 0.0)
            return;
        const auto& qp = p.pairs.at(pair);
        const double qn = qp.num.quad(u);
        const double qd = qp.den.quad(u);
        cm.a.add_scaled(qp.num, 2.0 * weight / qn);
        cm.b.add_scaled(qp.den, 2.0 * weight / qd);
        cm.log_scale_a += weight * std::log(qn);
        cm.log_scale_b += weight * std::log(qd);
    };
    for (auto i : p.objective)
        add(i, 1.0);
    for (std::size_t c = 0; c < p.constraints.size(); ++c) {
        if (lambda[c] < 0.0)
            throw std::invalid_argument("build_condition_matrices: multipliers must be nonnegative");
        for (const auto& t : p.constraints[c].terms)
            add(t.pair, lambda[c] * t.matrix_exponent);
    }
    return cm;
}

/// Projected subgradient step: lambda_c <- max(0, lambda_c + step * max(0, violation_c)).
inline std::vector<double> update_multipliers(const std::vector<double>& lambda, const std::vector<double>& violations,
                                              double step)
{
    if (!(step > 0.0))
        throw std::invalid_argument("update_multipliers: step must be positive");
    if (lambda.size() != violations.size())
        throw std::invalid_argument("update_multipliers: size mismatch");
    std::vector<double> out(lambda.size());
    for (std::size_t i = 0; i < lambda.size(); ++i)
        out[i] = std::max(0.0, lambda[i] + step * std::max(0.0, violations[i]));
    return out;
}

struct InnerResult {
    ComplexVector u;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0; ///< stationarity residual at the returned u
};

/// Inner loop: u <- normalize(B(u)^-1 A(u) u) until ||u_j - u_{j-1}|| <= tol or
/// `max_iter` updates have been made.
inline InnerResult gpi_inner(const GpiProblem& p, const std::vector<double>& lambda, const ComplexVector& u0,
                             double tol, int max_iter)
{
    if (u0.size() != p.dim())
        throw std::invalid_argument("gpi_inner: initial precoder has the wrong dimension");
    InnerResult r;
    r.u = normalized(u0);
    for (int j = 1; j <= max_iter; ++j) {
        const auto cm = build_condition_matrices(p, r.u, lambda);
        ComplexVector next = normalized(block_diag_solve(cm.b, cm.a.apply(r.u)));
        const double step = (next - r.u).norm();
        r.u = std::move(next);
        r.iterations = j;
        if (step <= tol) {
            r.converged = true;
            break;
        }
    }
    r.residual = build_condition_matrices(p, r.u, lambda).stationarity_residual(r.u);
    return r;
}

struct SolverSettings {
    double tol = 0.05;
    double step = 0.1;
    int max_outer = 50;
    int max_inner = 1000;
    /// Multiplier updates past this count double the step each time.
    int stall_limit = 10;
    /// Start every inner loop from the initial precoder instead of the previous iterate.
    bool restart_inner = true;

    static SolverSettings from(const ScenarioConfig& c) { return {c.xi, c.alpha, c.N_c, c.N_p, 10, true}; }
};

struct GpiOutcome {
    ComplexVector u;
    bool feasible = false;
    bool inner_converged = true;
    std::vector<double> multipliers;
    std::vector<std::vector<double>> multiplier_history; ///< lambda after every outer update, starting at lambda^(0)
    int outer_iterations = 0;
    int inner_iterations = 0;
    double residual = 0.0;
    double log_phi = 0.0;
};

/// Outer multiplier loop around gpi_inner.
///
/// Starts from lambda = 0 (the unconstrained problem), then raises multipliers
/// of violated constraints until every constraint holds or `max_outer` updates
/// have been spent. Each inner loop starts from u0 unless restart_inner is off.
/// An inner loop that hits its cap ends the solve as a failure.
inline GpiOutcome solve_gpi(const GpiProblem& p, const ComplexVector& u0, const SolverSettings& s)
{
    GpiOutcome out;
    std::vector<double> lambda(p.constraints.size(), 0.0);
    out.multiplier_history.push_back(lambda);
    double step = s.step;

    auto run_inner = [&](const ComplexVector& start) {
        auto r = gpi_inner(p, lambda, start, s.tol, s.max_inner);
        out.inner_iterations += r.iterations;
        out.u = std::move(r.u);
        out.residual = r.residual;
        out.inner_converged = r.converged;
        return r.converged;
    };

    bool ok = run_inner(u0);
    while (ok) {
        const auto viol = p.violations(out.u);
        double total = 0.0;
        for (double v : viol)
            total += std::max(0.0, v);
        if (total <= 0.0) {
            out.feasible = true;
            break;
        }
        if (out.outer_iterations >= s.max_outer)
            break;

        if (out.outer_iterations >= s.stall_limit)
            step *= 2.0;
        lambda = update_multipliers(lambda, viol, step);
        out.multiplier_history.push_back(lambda);
        ++out.outer_iterations;
        ok = run_inner(s.restart_inner ? u0 : out.u);
    }
    out.multipliers = lambda;
    out.log_phi = build_condition_matrices(p, out.u, lambda).log_phi();
    return out;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_GPI_HPP
