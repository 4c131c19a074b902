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


#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace mimo_gpi;
using namespace mimo_gpi::testing;

TEST(Mrt, SingleUserMatchedFilter)
{
    Rng rng(1);
    const auto cs = iid_channels(6, 1, rng);
    const ComplexVector u = mrt(cs);
    EXPECT_LT((u - cs.h(0) / cs.h(0).norm()).norm(), 1e-14);
    for (int i = 0; i < 100; ++i)
        EXPECT_LE(sinr(cs, normalized(random_vector(6, rng)), 0, 0, 1.0), sinr(cs, u, 0, 0, 1.0) + 1e-12);
}

TEST(Mrt, UnitNormAndIdenticalDirections)
{
    Rng rng(2);
    auto cs = iid_channels(4, 3, rng);
    cs.at(1, 0).h = cs.h(0);
    const ComplexVector u = mrt(cs);
    EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    EXPECT_LT((precoder_block(u, 4, 3, 0) - precoder_block(u, 4, 3, 1)).norm(), 1e-15);

    ChannelSet zero(4, 2, 1);
    zero.at(0, 0).h = ComplexVector::Zero(4);
    zero.at(1, 0).h = ComplexVector::Zero(4);
    EXPECT_THROW(mrt(zero), std::invalid_argument);
}

TEST(Rzf, ApproachesMrtAtLowSnr)
{
    Rng rng(3);
    const auto cs = iid_channels(8, 5, rng);
    const ComplexVector r = rzf(cs, 1.0, 1e9);
    const ComplexVector m = mrt(cs);
    EXPECT_NEAR(r.norm(), 1.0, 1e-12);
    EXPECT_LT((r - m).norm(), 1e-6);
}

TEST(Rzf, ZeroForcingLimitMatchesPseudoInverse)
{
    Rng rng(4);
    const int N = 8, K = 5;
    const auto cs = iid_channels(N, K, rng);
    const ComplexVector u = rzf(cs, 1e12, 1.0);
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < K; ++i)
            if (i != k) {
                EXPECT_LE(std::abs(cs.h(k).dot(precoder_block(u, N, K, i))), 1e-6 * cs.h(k).norm());
            }

    const ComplexMatrix H = channel_matrix(cs);
    const ComplexMatrix pinv = H * (H.adjoint() * H).inverse();
    const ComplexVector ref = Eigen::Map<const ComplexVector>(pinv.data(), pinv.size()).normalized();
    EXPECT_LT((u - ref).norm(), 1e-6);
}

TEST(Rzf, ScaleConsistency)
{
    Rng rng(5);
    const auto cs = iid_channels(4, 3, rng);
    const double c = 2.7;
    ChannelSet scaled = cs;
    for (int k = 0; k < 3; ++k)
        scaled.at(k, 0).h *= c;
    const ComplexVector a = rzf(cs, 10.0, 1.0);
    const ComplexVector b = rzf(scaled, 10.0, c * c);
    EXPECT_LT((a - b).norm(), 1e-9);
    EXPECT_THROW(rzf(cs, 0.0, 1.0), std::invalid_argument);
}

TEST(PerRound, SlicesAreIndependentUnitNorm)
{
    auto cfg = harq_config(2);
    const auto cs = drop(cfg, 6);
    const auto u = per_round_baseline(cs, cfg, BaselineKind::rzf, 2, 0.25);
    const int slot = cfg.N * cfg.users();
    ASSERT_EQ(u.size(), 2 * slot);
    for (int t = 0; t < 2; ++t) {
        EXPECT_NEAR(u.segment(t * slot, slot).norm(), 1.0, 1e-12);
        EXPECT_LT((u.segment(t * slot, slot) - rzf(cs, cfg.P * 0.25, cfg.mean_sigma2(), t)).norm(), 1e-15);
    }
    const auto m = per_round_baseline(cs, cfg, BaselineKind::mrt, 2, 0.25);
    EXPECT_LT((m.segment(slot, slot) - mrt(cs, 1)).norm(), 1e-15);
}
