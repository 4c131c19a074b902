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


#ifndef MIMO_GPI_TESTS_TEST_UTIL_HPP
#define MIMO_GPI_TESTS_TEST_UTIL_HPP

#include <mimo_gpi/mimo_gpi.hpp>

namespace mimo_gpi::testing {

inline ComplexVector random_vector(Eigen::Index n, Rng& rng) { return standard_complex_gaussian(n, rng); }

inline ComplexMatrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng)
{
    ComplexMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        m.col(j) = standard_complex_gaussian(r, rng);
    return m;
}

/// Hermitian positive definite with eigenvalues bounded away from zero.
inline ComplexMatrix random_pd(Eigen::Index n, Rng& rng)
{
    const ComplexMatrix g = random_matrix(n, n, rng);
    ComplexMatrix a = g * g.adjoint();
    a.diagonal().array() += 0.5;
    return a;
}

/// Single-round channel set with i.i.d. CN(0, I) channels.
inline ChannelSet iid_channels(int N, int K, Rng& rng, int rounds = 1)
{
    ChannelSet cs(N, K, rounds);
    for (int t = 0; t < rounds; ++t)
        for (int k = 0; k < K; ++k) {
            cs.at(k, t).h = standard_complex_gaussian(N, rng);
            cs.at(k, t).cov = ComplexMatrix::Identity(N, N);
        }
    return cs;
}

inline ScenarioConfig small_config(int N, int K_t, int K_s)
{
    ScenarioConfig c;
    c.N = N;
    c.K_t = K_t;
    c.K_s = K_s;
    const auto K = static_cast<std::size_t>(K_t + K_s);
    c.sigma2.assign(K, 1.0);
    c.epsilon.assign(K, 1e-5);
    c.w.assign(K, 1.0);
    c.delta.assign(K, 0.0);
    c.gamma_tilde.assign(K, {});
    for (std::size_t k = static_cast<std::size_t>(K_t); k < K; ++k) {
        c.delta[k] = 400.0;
        c.gamma_tilde[k] = {1.5};
    }
    c.validate();
    return c;
}

/// One-ring drop of the scenario in `cfg` from a fixed seed.
inline ChannelSet drop(const ScenarioConfig& cfg, std::uint64_t seed)
{
    Rng rng(seed);
    return sample_drop(cfg, cfg.T, rng);
}

inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// 1 - |<a,b>| / (|a||b|): zero when the directions agree up to a phase.
inline double direction_gap(const ComplexVector& a, const ComplexVector& b)
{
    return 1.0 - std::abs(a.dot(b)) / (a.norm() * b.norm());
}

} // namespace mimo_gpi::testing

#endif // MIMO_GPI_TESTS_TEST_UTIL_HPP
