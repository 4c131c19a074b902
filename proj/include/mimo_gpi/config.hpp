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

#ifndef MIMO_GPI_CONFIG_HPP
#define MIMO_GPI_CONFIG_HPP

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimo_gpi {

/// How the per-round share q(t) of a HARQ tail precoder is measured and recombined.
enum class RoundWeighting {
    amplitude, ///< q = |u(t)| / |u_tail|, blocks scaled by the literal cascade q(1), (1-q(1))q(2), ...
    power,     ///< q = |u(t)|^2 / |u_tail|^2, blocks scaled by sqrt of the same cascade
};

/// Every network and solver parameter of one scenario.
///
/// Users 0..K_t-1 are delay-tolerant, K_t..K_t+K_s-1 delay-constrained. Per-user
/// arrays span all K_t+K_s users; entries of `delta` and `gamma_tilde` that
/// belong to tolerant users are ignored. Powers are linear; `P / sigma2` is the
/// only link-budget knob because covariances have unit diagonal.
struct ScenarioConfig {
    int N = 8;
    int K_t = 3;
    int K_s = 2;
    double P = 100.0;
    std::vector<double> sigma2{1.0, 1.0, 1.0, 1.0, 1.0};
    double m = 100.0;
    std::vector<double> epsilon{1e-5, 1e-5, 1e-5, 1e-5, 1e-5};
    /// Latency requirement in symbols per bandwidth (spectral-efficiency normalized).
    std::vector<double> delta{0.0, 0.0, 0.0, 250.0, 450.0};
    /// Payload in bits.
    double D_s = 256.0;
    std::vector<double> w{1.0, 1.0, 1.0, 3.0, 3.0};
    /// Anchor SINR per user and round: gamma_tilde[k][t].
    std::vector<std::vector<double>> gamma_tilde{{}, {}, {}, {2.38}, {1.35}};
    int T = 1;
    double Delta = std::numbers::pi / 6.0;

    double xi = 0.05;
    double alpha = 0.1;
    int N_c = 50;
    int N_p = 1000;

    RoundWeighting q_weighting = RoundWeighting::amplitude;
    /// Re-draw each user's AoA every HARQ round instead of keeping one covariance per drop.
    bool redraw_aoa_per_round = false;
    /// Imperfect-CSIT error covariance scale: Phi_k = csit_error * I.
    double csit_error = 0.0;

    int users() const { return K_t + K_s; }
    bool constrained(int k) const { return k >= K_t; }
    double noise_ratio(int k) const { return sigma2.at(static_cast<std::size_t>(k)) / P; }
    /// Rate target D_s / delta_k for a constrained user.
    double rate_target(int k) const { return D_s / delta.at(static_cast<std::size_t>(k)); }
    double anchor(int k, int round) const
    {
        const auto& g = gamma_tilde.at(static_cast<std::size_t>(k));
        if (g.empty())
            throw std::invalid_argument("gamma_tilde missing for user " + std::to_string(k));
        return g.size() == 1 ? g.front() : g.at(static_cast<std::size_t>(round));
    }

    void set_snr_db(double snr_db) { P = mean_sigma2() * std::pow(10.0, snr_db / 10.0); }
    double snr_db() const { return 10.0 * std::log10(P / mean_sigma2()); }
    double mean_sigma2() const
    {
        double s = 0.0;
        for (double v : sigma2)
            s += v;
        return s / static_cast<double>(sigma2.size());
    }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const
    {
        auto fail = [](const std::string& what) { throw std::invalid_argument("ScenarioConfig: " + what); };
        if (N < 1)
            fail("N must be >= 1");
        if (K_t < 0 || K_s < 0 || users() < 1)
            fail("need K_t, K_s >= 0 and at least one user");
        if (!(P > 0.0))
            fail("P must be positive");
        if (!(m >= 1.0))
            fail("m must be >= 1");
        if (T < 1)
            fail("T must be >= 1");
        if (!(D_s > 0.0))
            fail("D_s must be positive");
        if (!(Delta > 0.0 && Delta <= std::numbers::pi / 2.0))
            fail("Delta must lie in (0, pi/2]");
        if (!(xi > 0.0) || !(alpha > 0.0) || N_c < 1 || N_p < 1)
            fail("solver tolerances and caps must be positive");
        if (csit_error < 0.0)
            fail("csit_error must be >= 0");
        const auto K = static_cast<std::size_t>(users());
        for (const auto* arr : {&sigma2, &epsilon, &delta, &w})
            if (arr->size() != K)
                fail("per-user arrays must have length K_t + K_s = " + std::to_string(K));
        if (gamma_tilde.size() != K)
            fail("gamma_tilde must have one entry per user");
        for (std::size_t k = 0; k < K; ++k) {
            if (!(sigma2[k] > 0.0))
                fail("sigma2 must be positive");
            if (!(w[k] >= 0.0))
                fail("weights must be nonnegative");
            if (!constrained(static_cast<int>(k)))
                continue;
            if (!(epsilon[k] > 0.0 && epsilon[k] < 0.5))
                fail("epsilon must lie in (0, 0.5) for constrained users");
            if (!(delta[k] > 0.0))
                fail("delta must be positive for constrained users");
            const auto& g = gamma_tilde[k];
            if (g.size() != 1 && g.size() != static_cast<std::size_t>(T))
                fail("gamma_tilde of a constrained user needs 1 or T entries");
            for (double v : g)
                if (!(v > 0.0))
                    fail("gamma_tilde must be positive");
        }
    }
};

/// Reference scenario with two constrained users (delta = 250, 450).
inline ScenarioConfig reference_config()
{
    ScenarioConfig c;
    c.validate();
    return c;
}

/// Two-round IR-HARQ scenario: delta = (210, 320), anchors 1.7 / 1.15 in every round.
inline ScenarioConfig harq_config(int rounds = 2)
{
    ScenarioConfig c;
    c.T = rounds;
    c.delta = {0.0, 0.0, 0.0, 210.0, 320.0};
    if (rounds == 3)
        c.gamma_tilde = {{}, {}, {}, {1.45}, {1.05}};
    else
        c.gamma_tilde = {{}, {}, {}, {1.7}, {1.15}};
    c.validate();
    return c;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_CONFIG_HPP
