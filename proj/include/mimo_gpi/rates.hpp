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

#ifndef MIMO_GPI_RATES_HPP
#define MIMO_GPI_RATES_HPP

#include "channel.hpp"
#include "config.hpp"
#include "numerics.hpp"

#include <limits>

namespace mimo_gpi {

/// The anchor SINR makes the log-linear bound vacuous (f >= 1).
class VacuousBoundError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------------
// Precoder layout
//
// A network precoder stacks per-user N-vectors, user-major inside a round and
// round-major across rounds: block (slot, k) starts at (slot * K + k) * N.

inline auto precoder_block(ComplexVector& u, int N, int K, int k, int slot = 0)
{
    return u.segment((static_cast<Eigen::Index>(slot) * K + k) * N, N);
}
inline auto precoder_block(const ComplexVector& u, int N, int K, int k, int slot = 0)
{
    return u.segment((static_cast<Eigen::Index>(slot) * K + k) * N, N);
}

/// Network-wide slice of round `slot` (dimension N*K).
inline auto precoder_slot(const ComplexVector& u, int N, int K, int slot)
{
    return u.segment(static_cast<Eigen::Index>(slot) * K * N, static_cast<Eigen::Index>(K) * N);
}

inline ComplexVector normalized(ComplexVector u)
{
    const double n = u.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("normalized: zero vector");
    return u / n;
}

// ------------------------------------------------------------------------
// Scalar rates

/// SINR of user k: |h^H u_k|^2 / (sum_{i != k} |h^H u_i|^2 + noise_ratio),
/// where u holds K stacked N-vectors for the round and noise_ratio = sigma_k^2 / P.
inline double sinr(const ComplexVector& h, const ComplexVector& u_round, int K, int k, double noise_ratio)
{
    const auto N = static_cast<int>(h.size());
    if (u_round.size() != static_cast<Eigen::Index>(N) * K)
        throw std::invalid_argument("sinr: precoder dimension mismatch");
    double signal = 0.0, interference = 0.0;
    for (int i = 0; i < K; ++i) {
        const double g = std::norm(h.dot(precoder_block(u_round, N, K, i)));
        (i == k ? signal : interference) += g;
    }
    return signal / (interference + noise_ratio);
}

/// SINR of user k in round t of `cs`; `slot` selects the round's block of a stacked precoder.
inline double sinr(const ChannelSet& cs, const ComplexVector& u, int k, int t, double noise_ratio, int slot = 0)
{
    const int N = cs.antennas(), K = cs.users();
    return sinr(cs.h(k, t), precoder_slot(u, N, K, slot), K, k, noise_ratio);
}

inline double shannon_se(double gamma) { return std::log2(1.0 + gamma); }

/// Channel dispersion V(gamma) = 2 gamma / (1 + gamma) * (log2 e)^2.
inline double dispersion(double gamma) { return 2.0 * gamma / (1.0 + gamma) * kLog2e * kLog2e; }

/// Finite-blocklength spectral efficiency. May be negative.
inline double fbl_se(double gamma, double m, double eps)
{
    return shannon_se(gamma) - std::sqrt(dispersion(gamma) / m) * qfunc_inv(eps);
}

// ------------------------------------------------------------------------
// Log-linear bound on sqrt(2x / (1 + x))

inline double log_bound_rho(double anchor) { return 1.0 / std::sqrt(2.0 * anchor * (1.0 + anchor)); }
inline double log_bound_eta(double anchor)
{
    return std::sqrt(2.0 * anchor / (1.0 + anchor)) - log_bound_rho(anchor) * std::log1p(anchor);
}
/// H(x) = sqrt(2x / (1 + x)).
inline double log_bound_lhs(double x) { return std::sqrt(2.0 * x / (1.0 + x)); }
/// G(x, anchor) = rho(anchor) ln(1 + x) + eta(anchor); never below H(x).
inline double log_bound_rhs(double x, double anchor) { return log_bound_rho(anchor) * std::log1p(x) + log_bound_eta(anchor); }

struct LogBoundCoeffs {
    double rho = 0.0;
    double eta = 0.0;
    double f = 0.0; ///< Q^-1(eps) rho / sqrt(m)
    double g = 0.0; ///< Q^-1(eps) eta log2(e) / sqrt(m), bits
};

inline LogBoundCoeffs log_bound_coeffs(double anchor, double m, double eps)
{
    if (!(anchor > 0.0))
        throw std::invalid_argument("log_bound_coeffs: anchor SINR must be positive");
    LogBoundCoeffs c;
    c.rho = log_bound_rho(anchor);
    c.eta = log_bound_eta(anchor);
    const double q = qfunc_inv(eps) / std::sqrt(m);
    c.f = q * c.rho;
    c.g = q * c.eta * kLog2e;
    return c;
}

/// (1 - f) log2(quotient) - g. Throws VacuousBoundError for f >= 1.
inline double bound_from_quotient(double quotient, const LogBoundCoeffs& c)
{
    if (c.f >= 1.0)
        throw VacuousBoundError("log-linear bound is vacuous: f = " + std::to_string(c.f) + " >= 1");
    return (1.0 - c.f) * std::log2(quotient) - c.g;
}

/// Upper bound on the latency D_s / R; infinity when R <= 0.
inline double latency_upper_bound(double rate, double payload_bits)
{
    if (!(rate > 0.0))
        return std::numeric_limits<double>::infinity();
    return payload_bits / rate;
}

// ------------------------------------------------------------------------
// Quadratic forms

/// Numerator/denominator pair of one Rayleigh quotient u^H num u / u^H den u.
struct QuotientPair {
    BlockDiagMatrix num;
    BlockDiagMatrix den;

    double quotient(const ComplexVector& u) const { return num.quad(u) / den.quad(u); }
    double log2_quotient(const ComplexVector& u) const { return std::log2(quotient(u)); }
};

/// Builds the pair for user k on a stacked layout of `slots` rounds x K users.
///
/// num = blockdiag over the users of round `slot` of `all_users` + noise_ratio * I,
/// den = num with `own` removed from user k's block of that slot.
inline QuotientPair slot_quotient(int N, int K, int slots, int slot, int k, const ComplexMatrix& all_users,
                                  const ComplexMatrix& own, double noise_ratio)
{
    QuotientPair qp{BlockDiagMatrix::identity(N, static_cast<Eigen::Index>(K) * slots, noise_ratio),
                    BlockDiagMatrix::identity(N, static_cast<Eigen::Index>(K) * slots, noise_ratio)};
    for (int i = 0; i < K; ++i) {
        const Eigen::Index b = static_cast<Eigen::Index>(slot) * K + i;
        qp.num.block(b) += all_users;
        qp.den.block(b) += all_users;
        if (i == k)
            qp.den.block(b) -= own;
    }
    return qp;
}

enum class CsitMode { perfect, imperfect };

/// A_k / B_k for every user of one round (the round-`t` channels of `cs`).
struct QuadraticForms {
    std::vector<QuotientPair> users;

    const BlockDiagMatrix& A(int k) const { return users.at(static_cast<std::size_t>(k)).num; }
    const BlockDiagMatrix& B(int k) const { return users.at(static_cast<std::size_t>(k)).den; }
};

/// A_k = blockdiag(h_k h_k^H, ...) + (sigma_k^2 / P) I, B_k = A_k minus user k's block.
/// Imperfect mode uses the estimate h_est and adds Phi_k to every block of both.
inline QuadraticForms build_quadratic_forms(const ChannelSet& cs, const ScenarioConfig& cfg,
                                            CsitMode mode = CsitMode::perfect, int t = 0)
{
    const int N = cs.antennas(), K = cs.users();
    if (cfg.users() != K || cfg.N != N)
        throw std::invalid_argument("build_quadratic_forms: config does not match channel set");
    QuadraticForms qf;
    qf.users.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        const auto& uc = cs.at(k, t);
        if (mode == CsitMode::perfect) {
            const ComplexMatrix hh = uc.h * uc.h.adjoint();
            qf.users.push_back(slot_quotient(N, K, 1, 0, k, hh, hh, cfg.noise_ratio(k)));
        } else {
            if (!uc.h_est || !uc.err_cov)
                throw std::invalid_argument("build_quadratic_forms: imperfect mode needs channel estimates");
            const ComplexMatrix hh = *uc.h_est * uc.h_est->adjoint();
            qf.users.push_back(slot_quotient(N, K, 1, 0, k, hh + *uc.err_cov, hh, cfg.noise_ratio(k)));
        }
    }
    return qf;
}

/// Log-linear lower bound (1 - f) log2(u^H A u / u^H B u) - g on the finite-blocklength rate.
inline double lower_bound_se(const QuadraticForms& qf, const ComplexVector& u, int k, const LogBoundCoeffs& c)
{
    return bound_from_quotient(qf.users.at(static_cast<std::size_t>(k)).quotient(u), c);
}

inline double lower_bound_se(const ChannelSet& cs, const ScenarioConfig& cfg, const ComplexVector& u, int k,
                             const LogBoundCoeffs& c)
{
    return bound_from_quotient(1.0 + sinr(cs, u, k, 0, cfg.noise_ratio(k)), c);
}

// ------------------------------------------------------------------------
// IR-HARQ forms

/// Quadratic forms of the round-`first` tail problem over rounds first..T-1.
///
/// The tail precoder stacks T - first rounds. `realized[k]` (D/E) puts the
/// realized channel outer product in slot 0; `future[k][j]` (D~/E~) puts the
/// covariance C_k(first + 1 + j) in slot j + 1. Every matrix carries the noise
/// ratio on the whole diagonal.
struct HarqForms {
    int first = 0;
    int horizon = 1;
    std::vector<QuotientPair> realized;
    std::vector<std::vector<QuotientPair>> future;

    int slots() const { return horizon - first; }
};

inline HarqForms build_harq_quadratic_forms(const ChannelSet& cs, const ScenarioConfig& cfg, int first, int horizon)
{
    const int N = cs.antennas(), K = cs.users();
    if (!(first >= 0 && first < horizon && horizon <= cs.rounds()))
        throw std::invalid_argument("build_harq_quadratic_forms: need 0 <= first < horizon <= rounds");
    HarqForms hf;
    hf.first = first;
    hf.horizon = horizon;
    const int slots = horizon - first;
    for (int k = 0; k < K; ++k) {
        const auto& h = cs.h(k, first);
        const ComplexMatrix hh = h * h.adjoint();
        hf.realized.push_back(slot_quotient(N, K, slots, 0, k, hh, hh, cfg.noise_ratio(k)));
        std::vector<QuotientPair> fut;
        for (int t = first + 1; t < horizon; ++t) {
            const auto& c = cs.cov(k, t);
            if (c.rows() != N || c.cols() != N)
                throw std::invalid_argument("build_harq_quadratic_forms: missing covariance for round " +
                                            std::to_string(t));
            fut.push_back(slot_quotient(N, K, slots, t - first, k, c, c, cfg.noise_ratio(k)));
        }
        hf.future.push_back(std::move(fut));
    }
    return hf;
}

/// D_k(t)/E_k(t) for every round over the full N*K*T layout, all with realized channels.
inline std::vector<std::vector<QuotientPair>> build_perfect_quadratic_forms(const ChannelSet& cs,
                                                                            const ScenarioConfig& cfg, int horizon)
{
    const int N = cs.antennas(), K = cs.users();
    std::vector<std::vector<QuotientPair>> out(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
        for (int t = 0; t < horizon; ++t) {
            const ComplexMatrix hh = cs.h(k, t) * cs.h(k, t).adjoint();
            out[static_cast<std::size_t>(k)].push_back(slot_quotient(N, K, horizon, t, k, hh, hh, cfg.noise_ratio(k)));
        }
    return out;
}

/// Per-round SINRs of user k for a stacked precoder over `horizon` rounds.
/// `power_fraction` scales P (the per-round baselines transmit at P / T^2).
inline std::vector<double> round_sinrs(const ChannelSet& cs, const ScenarioConfig& cfg, const ComplexVector& u_ir,
                                       int k, int horizon, double power_fraction = 1.0)
{
    std::vector<double> g;
    for (int t = 0; t < horizon; ++t)
        g.push_back(sinr(cs, u_ir, k, t, cfg.noise_ratio(k) / power_fraction, t));
    return g;
}

/// Accumulated IR-HARQ spectral efficiency of user k.
///
/// Tolerant users: sum_t log2(1 + gamma_k(t)). Constrained users additionally
/// lose sqrt(sum_t V(gamma_k(t)) / m) Q^-1(eps_k).
inline double harq_accumulated_se(const ChannelSet& cs, const ScenarioConfig& cfg, const ComplexVector& u_ir, int k,
                                  int horizon, double power_fraction = 1.0)
{
    double rate = 0.0, disp = 0.0;
    for (double g : round_sinrs(cs, cfg, u_ir, k, horizon, power_fraction)) {
        rate += shannon_se(g);
        disp += dispersion(g);
    }
    if (cfg.constrained(k))
        rate -= std::sqrt(disp / cfg.m) * qfunc_inv(cfg.epsilon.at(static_cast<std::size_t>(k)));
    return rate;
}

/// Per-round log-linear bound coefficients of constrained user k, rounds first..horizon-1.
inline std::vector<LogBoundCoeffs> harq_coeffs(const ScenarioConfig& cfg, int k, int first, int horizon)
{
    std::vector<LogBoundCoeffs> out;
    for (int t = first; t < horizon; ++t)
        out.push_back(log_bound_coeffs(cfg.anchor(k, t), cfg.m, cfg.epsilon.at(static_cast<std::size_t>(k))));
    return out;
}

/// Realized bound of round `first` plus covariance-based approximations of the
/// later rounds: R~_{k,first} + sum_{t > first} R^_{k,t}.
inline double harq_lower_bound_se(const HarqForms& hf, const ComplexVector& u_tail, int k,
                                  const std::vector<LogBoundCoeffs>& coeffs)
{
    if (static_cast<int>(coeffs.size()) != hf.slots())
        throw std::invalid_argument("harq_lower_bound_se: need one coefficient set per round in the horizon");
    const auto ku = static_cast<std::size_t>(k);
    double r = bound_from_quotient(hf.realized.at(ku).quotient(u_tail), coeffs[0]);
    for (std::size_t j = 0; j < hf.future.at(ku).size(); ++j)
        r += bound_from_quotient(hf.future[ku][j].quotient(u_tail), coeffs[j + 1]);
    return r;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_RATES_HPP
