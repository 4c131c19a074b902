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

#ifndef MIMO_GPI_CHANNEL_HPP
#define MIMO_GPI_CHANNEL_HPP

#include "config.hpp"
#include "numerics.hpp"

#include <array>
#include <optional>

namespace mimo_gpi {

class QuadratureError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Base-station array. Positions are in wavelengths (the wavelength is 1).
struct AntennaGeometry {
    std::vector<std::array<double, 2>> positions;
    double radius_factor = 0.0;

    int antenna_count() const { return static_cast<int>(positions.size()); }

    /// Uniform circular array whose neighbouring elements sit half a wavelength apart.
    static AntennaGeometry uniform_circular(int n)
    {
        if (n < 1)
            throw std::invalid_argument("uniform_circular: need at least one antenna");
        AntennaGeometry g;
        const double step = 2.0 * std::numbers::pi / n;
        const double c = 1.0 - std::cos(step), s = std::sin(step);
        g.radius_factor = n == 1 ? 0.0 : 0.5 / std::sqrt(c * c + s * s);
        g.positions.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            g.positions[static_cast<std::size_t>(i)] = {g.radius_factor * std::cos(step * i),
                                                        g.radius_factor * std::sin(step * i)};
        return g;
    }
};

struct UserGeometry {
    double aoa = 0.0;            ///< radians, (0, 2*pi]
    double angular_spread = 0.0; ///< radians, (0, pi/2]
};

/// Plane-wave response exp(-j 2 pi Psi(theta) . r_n) of the array.
inline ComplexVector steering_vector(const AntennaGeometry& geom, double theta)
{
    ComplexVector a(geom.antenna_count());
    for (int n = 0; n < geom.antenna_count(); ++n) {
        const auto& r = geom.positions[static_cast<std::size_t>(n)];
        a(n) = std::polar(1.0, -2.0 * std::numbers::pi * (std::cos(theta) * r[0] + std::sin(theta) * r[1]));
    }
    return a;
}

/// One-ring spatial covariance: entry (n,m) is the average over x in
/// [theta - Delta, theta + Delta] of exp(-j 2 pi Psi(x) . (r_n - r_m)).
///
/// All off-diagonal entries are integrated together with a composite midpoint
/// rule on 3^j panels (each refinement reuses the previous samples) and Richardson
/// extrapolation on top. Refinement stops once successive extrapolated estimates
/// agree to 1e-9 in every entry; 3^10 panels is the cap. The diagonal is exactly 1.
inline ComplexMatrix one_ring_covariance(const AntennaGeometry& geom, const UserGeometry& user)
{
    const int n_ant = geom.antenna_count();
    if (n_ant < 1)
        throw std::invalid_argument("one_ring_covariance: empty geometry");
    if (!(user.angular_spread > 0.0 && user.angular_spread <= std::numbers::pi / 2.0))
        throw std::invalid_argument("one_ring_covariance: angular spread must lie in (0, pi/2]");

    constexpr double kTol = 1e-9;
    constexpr int kMaxLevel = 10;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;

    struct Pair {
        int n, m;
        double dx, dy;
    };
    std::vector<Pair> pairs;
    for (int n = 0; n < n_ant; ++n)
        for (int m = n + 1; m < n_ant; ++m) {
            const auto& rn = geom.positions[static_cast<std::size_t>(n)];
            const auto& rm = geom.positions[static_cast<std::size_t>(m)];
            pairs.push_back({n, m, kTwoPi * (rn[0] - rm[0]), kTwoPi * (rn[1] - rm[1])});
        }

    ComplexMatrix c = ComplexMatrix::Identity(n_ant, n_ant);
    if (pairs.empty())
        return c;

    const double lo = user.aoa - user.angular_spread;
    const double width = 2.0 * user.angular_spread;
    const std::size_t np = pairs.size();

    // sums[p] accumulates integrand samples over every midpoint visited so far.
    std::vector<cd> sums(np, cd(0.0, 0.0));
    auto add_samples = [&](long panels, bool skip_old) {
        const double h = width / static_cast<double>(panels);
        for (long i = 0; i < panels; ++i) {
            if (skip_old && i % 3 == 1)
                continue; // centre of an old panel: already summed
            const double x = lo + (static_cast<double>(i) + 0.5) * h;
            const double cx = std::cos(x), sx = std::sin(x);
            for (std::size_t p = 0; p < np; ++p)
                sums[p] += std::polar(1.0, -(cx * pairs[p].dx + sx * pairs[p].dy));
        }
    };

    // Romberg table rows: row[j] holds the j-th extrapolation for the current level.
    std::vector<std::vector<cd>> prev_row, row;
    long panels = 3;
    add_samples(panels, false);
    for (int level = 1; level <= kMaxLevel; ++level) {
        if (level > 1) {
            panels *= 3;
            add_samples(panels, true);
        }
        row.assign(static_cast<std::size_t>(level), std::vector<cd>(np));
        for (std::size_t p = 0; p < np; ++p)
            row[0][p] = sums[p] / static_cast<double>(panels);
        double factor = 1.0;
        for (int j = 1; j < level; ++j) {
            factor *= 9.0;
            for (std::size_t p = 0; p < np; ++p)
                row[static_cast<std::size_t>(j)][p] =
                    (factor * row[static_cast<std::size_t>(j - 1)][p] - prev_row[static_cast<std::size_t>(j - 1)][p]) /
                    (factor - 1.0);
        }
        if (level >= 3) {
            const auto& best = row.back();
            const auto& last = prev_row.back();
            double diff = 0.0;
            for (std::size_t p = 0; p < np; ++p)
                diff = std::max(diff, std::abs(best[p] - last[p]));
            if (diff < kTol) {
                for (std::size_t p = 0; p < np; ++p) {
                    c(pairs[p].n, pairs[p].m) = best[p];
                    c(pairs[p].m, pairs[p].n) = std::conj(best[p]);
                }
                return c;
            }
        }
        prev_row = row;
    }
    throw QuadratureError("one_ring_covariance: quadrature did not converge within 3^10 panels");
}

/// Channel of one user in one transmission round.
struct UserChannel {
    ComplexVector h;
    ComplexMatrix cov;
    double aoa = 0.0;
    std::optional<ComplexVector> h_est;   ///< h - e when CSIT is imperfect
    std::optional<ComplexMatrix> err_cov; ///< covariance Phi of the estimation error
};

/// Per-round, per-user channels of one Monte-Carlo drop.
class ChannelSet {
  public:
    ChannelSet() = default;
    ChannelSet(int antennas, int users, int rounds)
        : antennas_(antennas), users_(users),
          rounds_(static_cast<std::size_t>(rounds), std::vector<UserChannel>(static_cast<std::size_t>(users)))
    {
        if (antennas < 1 || users < 1 || rounds < 1)
            throw std::invalid_argument("ChannelSet: dimensions must be positive");
    }

    /// Single-round set from explicit channel vectors; covariances default to h h^H.
    static ChannelSet from_vectors(const std::vector<ComplexVector>& hs)
    {
        if (hs.empty())
            throw std::invalid_argument("ChannelSet::from_vectors: no users");
        ChannelSet cs(static_cast<int>(hs.front().size()), static_cast<int>(hs.size()), 1);
        for (std::size_t k = 0; k < hs.size(); ++k) {
            if (hs[k].size() != hs.front().size())
                throw std::invalid_argument("ChannelSet::from_vectors: inconsistent dimensions");
            cs.at(static_cast<int>(k), 0).h = hs[k];
            cs.at(static_cast<int>(k), 0).cov = hs[k] * hs[k].adjoint();
        }
        return cs;
    }

    int antennas() const { return antennas_; }
    int users() const { return users_; }
    int rounds() const { return static_cast<int>(rounds_.size()); }

    UserChannel& at(int k, int t) { return rounds_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(k)); }
    const UserChannel& at(int k, int t) const
    {
        return rounds_.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(k));
    }
    const ComplexVector& h(int k, int t = 0) const { return at(k, t).h; }
    const ComplexMatrix& cov(int k, int t = 0) const { return at(k, t).cov; }
    bool has_estimates() const
    {
        for (const auto& r : rounds_)
            for (const auto& u : r)
                if (!u.h_est || !u.err_cov)
                    return false;
        return true;
    }

    /// Copy holding only round t, as a single-round set.
    ChannelSet round(int t) const
    {
        ChannelSet out(antennas_, users_, 1);
        out.rounds_[0] = rounds_.at(static_cast<std::size_t>(t));
        return out;
    }

  private:
    int antennas_ = 0;
    int users_ = 0;
    std::vector<std::vector<UserChannel>> rounds_;
};

/// Draws one Monte-Carlo drop: AoAs uniform on (0, 2 pi], one-ring covariances,
/// and independent channel realizations h_k(t) ~ CN(0, C_k(t)) per round.
inline ChannelSet sample_drop(const ScenarioConfig& cfg, int rounds, Rng& rng)
{
    if (rounds < 1)
        throw std::invalid_argument("sample_drop: rounds must be >= 1");
    const auto geom = AntennaGeometry::uniform_circular(cfg.N);
    const int K = cfg.users();
    ChannelSet cs(cfg.N, K, rounds);
    std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
    auto draw_aoa = [&] {
        const double a = uni(rng);
        return a == 0.0 ? 2.0 * std::numbers::pi : a;
    };

    for (int t = 0; t < rounds; ++t) {
        for (int k = 0; k < K; ++k) {
            auto& uc = cs.at(k, t);
            if (t == 0 || cfg.redraw_aoa_per_round) {
                uc.aoa = draw_aoa();
                uc.cov = one_ring_covariance(geom, {uc.aoa, cfg.Delta});
            } else {
                uc.aoa = cs.at(k, 0).aoa;
                uc.cov = cs.at(k, 0).cov;
            }
        }
        for (int k = 0; k < K; ++k)
            cs.at(k, t).h = sample_complex_gaussian(cs.at(k, t).cov, rng);
    }
    return cs;
}

/// Adds imperfect-CSIT estimates: e_k ~ CN(0, Phi_k), h_est = h - e_k, in every round.
inline ChannelSet apply_csit_error(ChannelSet cs, const std::vector<ComplexMatrix>& phi, Rng& rng)
{
    if (static_cast<int>(phi.size()) != cs.users())
        throw std::invalid_argument("apply_csit_error: need one error covariance per user");
    for (const auto& p : phi)
        if (p.rows() != cs.antennas() || p.cols() != cs.antennas())
            throw std::invalid_argument("apply_csit_error: error covariance dimension mismatch");
    for (int t = 0; t < cs.rounds(); ++t)
        for (int k = 0; k < cs.users(); ++k) {
            auto& uc = cs.at(k, t);
            const auto& pk = phi[static_cast<std::size_t>(k)];
            const ComplexVector e = sample_complex_gaussian(pk, rng);
            uc.h_est = uc.h - e;
            uc.err_cov = pk;
        }
    return cs;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_CHANNEL_HPP
