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

#ifndef MIMO_GPI_NUMERICS_HPP
#define MIMO_GPI_NUMERICS_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mimo_gpi {

using cd = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Random stream used by every sampling routine. Seeded explicitly; one stream per thread.
using Rng = std::mt19937_64;

inline constexpr double kLog2e = std::numbers::log2e;

class SingularMatrixError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotPsdError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------------
// Gaussian tail

/// Q(x) = P[Z > x] for a standard normal Z.
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Inverse of the Gaussian tail: returns x with Q(x) = p.
///
/// Bracketed bisection narrows x to a unit-width interval, then Newton steps on
/// log Q(x) - log p finish the job. Working in the log domain keeps the relative
/// error in p controlled far into the tail (p down to ~1e-300).
inline double qfunc_inv(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("qfunc_inv: probability must lie in (0,1), got " + std::to_string(p));
    if (p == 0.5)
        return 0.0;
    if (p > 0.5)
        return -qfunc_inv(1.0 - p);

    // Q is decreasing; for p < 0.5 the root is in (0, 38].
    double lo = 0.0, hi = 38.5;
    while (hi - lo > 0.5) {
        const double mid = 0.5 * (lo + hi);
        if (qfunc(mid) > p)
            lo = mid;
        else
            hi = mid;
    }

    const double log_p = std::log(p);
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double q = qfunc(x);
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        // d/dx log Q(x) = -pdf/Q
        const double step = (std::log(q) - log_p) / (-pdf / q);
        x -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x)))
            break;
    }
    return x;
}

// ------------------------------------------------------------------------
// Block-diagonal Hermitian matrices

/// Square block-diagonal matrix with `count` square blocks of equal size.
///
/// Every matrix the precoding problems touch (A_k, B_k, D_k(t), the GPI
/// pencil) has this layout: one N x N block per user per round. Off-block
/// entries are structurally zero and never stored.
class BlockDiagMatrix {
  public:
    BlockDiagMatrix() = default;

    BlockDiagMatrix(Eigen::Index block_size, Eigen::Index count)
        : block_size_(block_size), blocks_(static_cast<std::size_t>(count), ComplexMatrix::Zero(block_size, block_size))
    {
        if (block_size <= 0 || count <= 0)
            throw std::invalid_argument("BlockDiagMatrix: block size and count must be positive");
    }

    static BlockDiagMatrix identity(Eigen::Index block_size, Eigen::Index count, double scale = 1.0)
    {
        BlockDiagMatrix m(block_size, count);
        for (auto& b : m.blocks_)
            b.diagonal().setConstant(scale);
        return m;
    }

    Eigen::Index block_size() const { return block_size_; }
    Eigen::Index block_count() const { return static_cast<Eigen::Index>(blocks_.size()); }
    Eigen::Index dim() const { return block_size_ * block_count(); }

    ComplexMatrix& block(Eigen::Index i) { return blocks_.at(static_cast<std::size_t>(i)); }
    const ComplexMatrix& block(Eigen::Index i) const { return blocks_.at(static_cast<std::size_t>(i)); }

    ComplexVector apply(const ComplexVector& v) const
    {
        check_dim(v);
        ComplexVector out(dim());
        for (Eigen::Index i = 0; i < block_count(); ++i)
            out.segment(i * block_size_, block_size_).noalias() = block(i) * v.segment(i * block_size_, block_size_);
        return out;
    }

    /// Real part of v^H M v. Exact for Hermitian M up to rounding.
    double quad(const ComplexVector& v) const
    {
        check_dim(v);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < block_count(); ++i) {
            const auto seg = v.segment(i * block_size_, block_size_);
            acc += seg.dot(block(i) * seg).real();
        }
        return acc;
    }

    /// this += scale * other
    void add_scaled(const BlockDiagMatrix& other, double scale)
    {
        if (other.block_size_ != block_size_ || other.block_count() != block_count())
            throw std::invalid_argument("BlockDiagMatrix::add_scaled: layout mismatch");
        for (std::size_t i = 0; i < blocks_.size(); ++i)
            blocks_[i] += scale * other.blocks_[i];
    }

    ComplexMatrix to_dense() const
    {
        ComplexMatrix d = ComplexMatrix::Zero(dim(), dim());
        for (Eigen::Index i = 0; i < block_count(); ++i)
            d.block(i * block_size_, i * block_size_, block_size_, block_size_) = block(i);
        return d;
    }

    /// Largest |M - M^H| entry relative to the largest |M| entry.
    double hermitian_defect() const
    {
        double num = 0.0, den = 0.0;
        for (const auto& b : blocks_) {
            num = std::max(num, (b - b.adjoint()).cwiseAbs().maxCoeff());
            den = std::max(den, b.cwiseAbs().maxCoeff());
        }
        return den > 0.0 ? num / den : num;
    }

  private:
    void check_dim(const ComplexVector& v) const
    {
        if (v.size() != dim())
            throw std::invalid_argument("BlockDiagMatrix: vector dimension " + std::to_string(v.size()) +
                                        " does not match matrix dimension " + std::to_string(dim()));
    }

    Eigen::Index block_size_ = 0;
    std::vector<ComplexMatrix> blocks_;
};

/// Solves M x = v block by block.
///
/// Each block is factored on its own (Cholesky, falling back to a Hermitian
/// eigendecomposition when a block is not positive definite), so the cost is
/// O(count * block^3) rather than O((count * block)^3). Throws
/// SingularMatrixError when the smallest block eigenvalue magnitude is not
/// above 1e-12 times the largest one.
inline ComplexVector block_diag_solve(const BlockDiagMatrix& m, const ComplexVector& v)
{
    if (v.size() != m.dim())
        throw std::invalid_argument("block_diag_solve: dimension mismatch");

    constexpr double kRelSingular = 1e-12;
    const Eigen::Index bs = m.block_size();
    ComplexVector x(m.dim());

    std::vector<Eigen::LLT<ComplexMatrix>> chol(static_cast<std::size_t>(m.block_count()));
    bool all_pd = true;
    double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m.block_count(); ++i) {
        auto& c = chol[static_cast<std::size_t>(i)];
        c.compute(m.block(i));
        if (c.info() != Eigen::Success) {
            all_pd = false;
            break;
        }
        const Eigen::VectorXd piv = c.matrixLLT().diagonal().real().cwiseAbs2();
        max_pivot = std::max(max_pivot, piv.maxCoeff());
        min_pivot = std::min(min_pivot, piv.minCoeff());
    }

    // Pivot ratio is an upper bound on the eigenvalue ratio. Well above the
    // threshold the Cholesky path is trusted; otherwise decide on eigenvalues.
    if (all_pd && min_pivot > 1e-6 * max_pivot) {
        for (Eigen::Index i = 0; i < m.block_count(); ++i)
            x.segment(i * bs, bs) = chol[static_cast<std::size_t>(i)].solve(v.segment(i * bs, bs));
        return x;
    }

    std::vector<Eigen::SelfAdjointEigenSolver<ComplexMatrix>> eig(static_cast<std::size_t>(m.block_count()));
    double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m.block_count(); ++i) {
        auto& e = eig[static_cast<std::size_t>(i)];
        e.compute(m.block(i));
        const Eigen::VectorXd mag = e.eigenvalues().cwiseAbs();
        lmax = std::max(lmax, mag.maxCoeff());
        lmin = std::min(lmin, mag.minCoeff());
    }
    if (!(lmax > 0.0) || lmin <= kRelSingular * lmax)
        throw SingularMatrixError("block_diag_solve: block is numerically singular (|lambda|min/|lambda|max = " +
                                  std::to_string(lmax > 0.0 ? lmin / lmax : 0.0) + ")");
    for (Eigen::Index i = 0; i < m.block_count(); ++i) {
        const auto& e = eig[static_cast<std::size_t>(i)];
        const ComplexVector rhs = e.eigenvectors().adjoint() * v.segment(i * bs, bs);
        x.segment(i * bs, bs) = e.eigenvectors() * rhs.cwiseQuotient(e.eigenvalues().cast<cd>());
    }
    return x;
}

// ------------------------------------------------------------------------
// Gaussian sampling

/// Returns a factor F with F F^H = C for a Hermitian PSD C.
///
/// Cholesky when C is positive definite; otherwise the eigendecomposition
/// V diag(sqrt(max(lambda,0))). Throws NotPsdError if an eigenvalue is below
/// -1e-10 * trace(C).
inline ComplexMatrix psd_factor(const ComplexMatrix& c)
{
    if (c.rows() != c.cols())
        throw std::invalid_argument("psd_factor: matrix must be square");
    const double tr = c.trace().real();
    if (c.cwiseAbs().maxCoeff() == 0.0)
        return ComplexMatrix::Zero(c.rows(), c.cols());

    Eigen::LLT<ComplexMatrix> llt(c);
    if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd d = llt.matrixLLT().diagonal().real();
        if (d.minCoeff() > 1e-7 * d.maxCoeff())
            return llt.matrixL();
    }

    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(c);
    const Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() < -1e-10 * std::abs(tr))
        throw NotPsdError("psd_factor: matrix is not positive semidefinite (min eigenvalue " +
                          std::to_string(lam.minCoeff()) + ")");
    const Eigen::VectorXd root = lam.cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.cast<cd>().asDiagonal();
}

/// Unit circularly-symmetric complex Gaussian vector: each entry CN(0,1).
inline ComplexVector standard_complex_gaussian(Eigen::Index n, Rng& rng)
{
    std::normal_distribution<double> nd(0.0, std::numbers::sqrt2 / 2.0);
    ComplexVector w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = nd(rng);
        const double im = nd(rng);
        w(i) = cd(re, im);
    }
    return w;
}

/// Draws z ~ CN(0, C).
inline ComplexVector sample_complex_gaussian(const ComplexMatrix& c, Rng& rng)
{
    const ComplexMatrix f = psd_factor(c);
    return f * standard_complex_gaussian(c.cols(), rng);
}

/// Mixes a master seed and a stream index into an independent 64-bit seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace mimo_gpi

#endif // MIMO_GPI_NUMERICS_HPP
