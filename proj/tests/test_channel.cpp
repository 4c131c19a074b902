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

namespace {

constexpr double kPi = std::numbers::pi;

/// Plain midpoint rule with `points` samples for entry (n, m).
cd midpoint_entry(const AntennaGeometry& g, double theta, double spread, int n, int m, int points)
{
    const auto& rn = g.positions[static_cast<std::size_t>(n)];
    const auto& rm = g.positions[static_cast<std::size_t>(m)];
    const double dx = rn[0] - rm[0], dy = rn[1] - rm[1];
    const double h = 2.0 * spread / points;
    cd s = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = theta - spread + (i + 0.5) * h;
        s += std::polar(1.0, -2.0 * kPi * (std::cos(x) * dx + std::sin(x) * dy));
    }
    return s / static_cast<double>(points);
}

} // namespace

TEST(Geometry, UniformCircularSpacing)
{
    for (int n : {2, 3, 8, 16}) {
        const auto g = AntennaGeometry::uniform_circular(n);
        ASSERT_EQ(g.antenna_count(), n);
        for (int i = 0; i < n; ++i) {
            const auto& a = g.positions[static_cast<std::size_t>(i)];
            const auto& b = g.positions[static_cast<std::size_t>((i + 1) % n)];
            EXPECT_NEAR(std::hypot(a[0] - b[0], a[1] - b[1]), 0.5, 1e-12);
            EXPECT_NEAR(std::hypot(a[0], a[1]), g.radius_factor, 1e-12);
        }
    }
}

TEST(OneRing, MatchesMidpointOracle)
{
    const auto g = AntennaGeometry::uniform_circular(2);
    const ComplexMatrix c = one_ring_covariance(g, {0.0, kPi / 6.0});
    EXPECT_LT(std::abs(c(0, 1) - midpoint_entry(g, 0.0, kPi / 6.0, 0, 1, 10000)), 1e-8);

    const auto g8 = AntennaGeometry::uniform_circular(8);
    const ComplexMatrix c8 = one_ring_covariance(g8, {1.3, 0.4});
    for (int m = 1; m < 8; ++m)
        EXPECT_LT(std::abs(c8(0, m) - midpoint_entry(g8, 1.3, 0.4, 0, m, 10000)), 1e-8);
}

TEST(OneRing, HermitianUnitDiagonalPsd)
{
    const auto g = AntennaGeometry::uniform_circular(8);
    Rng rng(9);
    std::uniform_real_distribution<double> aoa(0.0, 2.0 * kPi), spread(0.01, kPi / 2.0);
    for (int i = 0; i < 20; ++i) {
        const ComplexMatrix c = one_ring_covariance(g, {aoa(rng), spread(rng)});
        EXPECT_LT(max_abs_diff(c, c.adjoint()), 1e-14);
        for (int n = 0; n < 8; ++n)
            EXPECT_EQ(c(n, n), cd(1.0, 0.0));
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * 8);
    }
}

TEST(OneRing, NarrowSpreadIsRankOne)
{
    const auto g = AntennaGeometry::uniform_circular(8);
    const ComplexMatrix c = one_ring_covariance(g, {0.7, 1e-9});
    EXPECT_LT((c.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-8);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
    EXPECT_NEAR(es.eigenvalues().maxCoeff(), 8.0, 1e-6);
    const ComplexVector a = steering_vector(g, 0.7);
    EXPECT_LT(max_abs_diff(c, a * a.adjoint()), 1e-7);
}

TEST(OneRing, RotationInvariance)
{
    const auto g = AntennaGeometry::uniform_circular(6);
    const double phi = 0.83;
    AntennaGeometry rot = g;
    for (auto& p : rot.positions)
        p = {std::cos(phi) * p[0] - std::sin(phi) * p[1], std::sin(phi) * p[0] + std::cos(phi) * p[1]};
    const ComplexMatrix a = one_ring_covariance(g, {1.1, 0.3});
    const ComplexMatrix b = one_ring_covariance(rot, {1.1 + phi, 0.3});
    EXPECT_LT(max_abs_diff(a, b), 1e-8);
}

TEST(OneRing, RejectsBadSpread)
{
    const auto g = AntennaGeometry::uniform_circular(4);
    EXPECT_THROW(one_ring_covariance(g, {0.0, 0.0}), std::invalid_argument);
    EXPECT_THROW(one_ring_covariance(g, {0.0, 2.0}), std::invalid_argument);
}

TEST(SampleDrop, DeterministicForFixedSeed)
{
    auto cfg = reference_config();
    cfg.T = 2;
    const auto a = drop(cfg, 99), b = drop(cfg, 99);
    ASSERT_EQ(a.rounds(), 2);
    for (int t = 0; t < 2; ++t)
        for (int k = 0; k < cfg.users(); ++k) {
            EXPECT_EQ(a.h(k, t), b.h(k, t));
            EXPECT_EQ(a.cov(k, t), b.cov(k, t));
        }
    EXPECT_NE(drop(cfg, 100).h(0, 0), a.h(0, 0));
}

TEST(SampleDrop, CovarianceSharedAcrossRoundsByDefault)
{
    auto cfg = reference_config();
    cfg.T = 3;
    const auto cs = drop(cfg, 5);
    EXPECT_EQ(cs.users() * cs.rounds(), 15);
    for (int k = 0; k < 5; ++k) {
        EXPECT_EQ(cs.cov(k, 2), cs.cov(k, 0));
        EXPECT_NE(cs.h(k, 1), cs.h(k, 0));
        EXPECT_GT(cs.at(k, 0).aoa, 0.0);
        EXPECT_LE(cs.at(k, 0).aoa, 2.0 * kPi);
    }
    cfg.redraw_aoa_per_round = true;
    const auto re = drop(cfg, 5);
    EXPECT_NE(re.at(0, 1).aoa, re.at(0, 0).aoa);
}

TEST(SampleDrop, NarrowSpreadChannelFollowsSteeringVector)
{
    auto cfg = small_config(8, 1, 0);
    cfg.Delta = 1e-9;
    const auto cs = drop(cfg, 21);
    const auto g = AntennaGeometry::uniform_circular(8);
    EXPECT_LT(direction_gap(cs.h(0), steering_vector(g, cs.at(0, 0).aoa)), 1e-10);
}

TEST(SampleDrop, RoundsAreUncorrelated)
{
    auto cfg = small_config(2, 1, 0);
    cfg.T = 2;
    Rng rng(77);
    cd cross = 0.0;
    double p0 = 0.0, p1 = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto cs = sample_drop(cfg, 2, rng);
        cross += std::conj(cs.h(0, 0)(0)) * cs.h(0, 1)(0);
        p0 += std::norm(cs.h(0, 0)(0));
        p1 += std::norm(cs.h(0, 1)(0));
    }
    EXPECT_LT(std::abs(cross) / std::sqrt(p0 * p1), 0.05);
    EXPECT_NEAR(p0 / 10000.0, 1.0, 0.05);
}

TEST(CsitError, ZeroCovarianceKeepsChannel)
{
    Rng rng(1);
    const auto cs = iid_channels(4, 3, rng);
    const std::vector<ComplexMatrix> phi(3, ComplexMatrix::Zero(4, 4));
    const auto est = apply_csit_error(cs, phi, rng);
    ASSERT_TRUE(est.has_estimates());
    for (int k = 0; k < 3; ++k)
        EXPECT_EQ(*est.at(k, 0).h_est, cs.h(k));
}

TEST(CsitError, EstimatePlusErrorIsChannel)
{
    Rng rng(2);
    const auto cs = iid_channels(4, 2, rng);
    const std::vector<ComplexMatrix> phi(2, 0.3 * ComplexMatrix::Identity(4, 4));
    Rng a(8), b(8);
    const auto est = apply_csit_error(cs, phi, a);
    for (int k = 0; k < 2; ++k) {
        const ComplexVector e = sample_complex_gaussian(phi[static_cast<std::size_t>(k)], b);
        EXPECT_LT((*est.at(k, 0).h_est + e - cs.h(k)).norm(), 1e-14);
        EXPECT_EQ(*est.at(k, 0).err_cov, phi[static_cast<std::size_t>(k)]);
    }
}

TEST(CsitError, ErrorCovarianceMonteCarlo)
{
    Rng rng(4);
    ChannelSet cs(3, 1, 1);
    cs.at(0, 0).h = ComplexVector::Zero(3);
    cs.at(0, 0).cov = ComplexMatrix::Identity(3, 3);
    const std::vector<ComplexMatrix> phi(1, ComplexMatrix::Identity(3, 3));
    ComplexMatrix acc = ComplexMatrix::Zero(3, 3);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const ComplexVector e = -*apply_csit_error(cs, phi, rng).at(0, 0).h_est;
        acc += e * e.adjoint();
    }
    acc /= static_cast<double>(n);
    EXPECT_LT(max_abs_diff(acc, ComplexMatrix::Identity(3, 3)), 0.05);
}

TEST(CsitError, DimensionMismatchThrows)
{
    Rng rng(3);
    const auto cs = iid_channels(4, 2, rng);
    EXPECT_THROW(apply_csit_error(cs, std::vector<ComplexMatrix>(1, ComplexMatrix::Identity(4, 4)), rng),
                 std::invalid_argument);
    EXPECT_THROW(apply_csit_error(cs, std::vector<ComplexMatrix>(2, ComplexMatrix::Identity(3, 3)), rng),
                 std::invalid_argument);
}
