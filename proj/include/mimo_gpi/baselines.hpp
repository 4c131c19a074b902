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

#ifndef MIMO_GPI_BASELINES_HPP
#define MIMO_GPI_BASELINES_HPP

#include "channel.hpp"
#include "rates.hpp"

namespace mimo_gpi {

/// Channel matrix of round t, one column per user (N x K).
inline ComplexMatrix channel_matrix(const ChannelSet& cs, int t = 0)
{
    ComplexMatrix H(cs.antennas(), cs.users());
    for (int k = 0; k < cs.users(); ++k)
        H.col(k) = cs.h(k, t);
    return H;
}

/// Maximum ratio transmission: u_k proportional to h_k, stacked and normalized to unit norm.
inline ComplexVector mrt(const ChannelSet& cs, int t = 0)
{
    const ComplexMatrix H = channel_matrix(cs, t);
    if (H.norm() == 0.0)
        throw std::invalid_argument("mrt: all channels are zero");
    return Eigen::Map<const ComplexVector>(H.data(), H.size()) / H.norm();
}

/// Regularized zero forcing: columns of (H H^H + (sigma^2/P) I)^-1 H, stacked and
/// normalized to unit norm.
inline ComplexVector rzf(const ChannelSet& cs, double P, double sigma2, int t = 0)
{
    if (!(P > 0.0) || !(sigma2 > 0.0))
        throw std::invalid_argument("rzf: P and sigma2 must be positive");
    const ComplexMatrix H = channel_matrix(cs, t);
    ComplexMatrix W;
    if (H.cols() <= H.rows()) {
        // Same matrix via (H H^H + a I)^-1 H = H (H^H H + a I)^-1, on the smaller Gram matrix.
        ComplexMatrix G = H.adjoint() * H;
        G.diagonal().array() += sigma2 / P;
        W = H * G.ldlt().solve(ComplexMatrix::Identity(H.cols(), H.cols()));
    } else {
        ComplexMatrix G = H * H.adjoint();
        G.diagonal().array() += sigma2 / P;
        W = G.ldlt().solve(H);
    }
    const double n = W.norm();
    if (!(n > 0.0))
        throw std::invalid_argument("rzf: all channels are zero");
    return Eigen::Map<const ComplexVector>(W.data(), W.size()) / n;
}

enum class BaselineKind { mrt, rzf };

/// Independent per-round baseline over `horizon` rounds at per-round power
/// P * power_fraction; each round's slice has unit norm.
inline ComplexVector per_round_baseline(const ChannelSet& cs, const ScenarioConfig& cfg, BaselineKind kind, int horizon,
                                        double power_fraction)
{
    const Eigen::Index slot = static_cast<Eigen::Index>(cs.antennas()) * cs.users();
    ComplexVector u(slot * horizon);
    for (int t = 0; t < horizon; ++t)
        u.segment(slot * t, slot) =
            kind == BaselineKind::mrt ? mrt(cs, t) : rzf(cs, cfg.P * power_fraction, cfg.mean_sigma2(), t);
    return u;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_BASELINES_HPP
