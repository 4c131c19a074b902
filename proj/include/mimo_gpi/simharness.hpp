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


#ifndef MIMO_GPI_SIMHARNESS_HPP
#define MIMO_GPI_SIMHARNESS_HPP

#include "harq_gpi.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace mimo_gpi {

enum class Scheme { delay_gpi, infinite_gpi, imperfect_gpi, harq_gpi, perfect_gpi, mrt, rzf };

inline constexpr std::array kAllSchemes{Scheme::delay_gpi,   Scheme::infinite_gpi, Scheme::imperfect_gpi,
                                        Scheme::harq_gpi,    Scheme::perfect_gpi,  Scheme::mrt,
                                        Scheme::rzf};

inline std::string scheme_name(Scheme s)
{
    switch (s) {
    case Scheme::delay_gpi:
        return "delay-gpi";
    case Scheme::infinite_gpi:
        return "infinite-gpi";
    case Scheme::imperfect_gpi:
        return "imperfect-gpi";
    case Scheme::harq_gpi:
        return "harq-gpi";
    case Scheme::perfect_gpi:
        return "perfect-gpi";
    case Scheme::mrt:
        return "mrt";
    case Scheme::rzf:
        return "rzf";
    }
    throw std::invalid_argument("scheme_name: unknown scheme");
}

inline Scheme parse_scheme(const std::string& name)
{
    for (auto s : kAllSchemes)
        if (scheme_name(s) == name)
            return s;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

inline bool is_baseline(Scheme s) { return s == Scheme::mrt || s == Scheme::rzf; }

struct ExperimentSpec {
    ScenarioConfig scenario;
    std::vector<Scheme> schemes{Scheme::delay_gpi, Scheme::mrt, Scheme::rzf};
    std::vector<double> snr_grid{20.0};
    int drops = 100;
    std::uint64_t master_seed = 1;
    std::string output_path = "results";
    int threads = 1;
    /// Wall-clock columns are written as 0 unless set, so by default the files depend on the spec alone.
    bool record_timing = false;

    void validate() const
    {
        scenario.validate();
        if (drops < 1)
            throw std::invalid_argument("ExperimentSpec: drops must be >= 1");
        if (snr_grid.empty() || schemes.empty())
            throw std::invalid_argument("ExperimentSpec: snr grid and scheme list must be non-empty");
        if (threads < 1)
            throw std::invalid_argument("ExperimentSpec: threads must be >= 1");
    }
};

struct DropRecord {
    int drop = 0;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::delay_gpi;
    double snr_db = 0.0;
    bool feasible = false;
    std::vector<int> pc_flags; ///< one per constrained user
    std::vector<double> rates; ///< one per user
    double sum_se = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double wall_ms = 0.0;
    std::string error;
};

/// Weighted, failure-gated sum spectral efficiency of one record.
///
/// GPI schemes score sum_{tolerant} w_k R_k + sum_{constrained} w_k D_s / delta_k
/// when feasible and 0 otherwise. Baselines always score the tolerant part and add
/// w_k D_s / delta_k for each constrained user whose flag is set.
inline double sum_se_metric(Scheme scheme, bool feasible, const std::vector<int>& pc_flags,
                            const std::vector<double>& rates, const ScenarioConfig& cfg)
{
    const bool baseline = is_baseline(scheme);
    if (!baseline && !feasible)
        return 0.0;
    if (static_cast<int>(rates.size()) != cfg.users() || static_cast<int>(pc_flags.size()) != cfg.K_s)
        throw std::invalid_argument("sum_se_metric: rate or flag vector has the wrong length");
    double r = 0.0;
    for (int k = 0; k < cfg.users(); ++k) {
        const double w = cfg.w[static_cast<std::size_t>(k)];
        if (!cfg.constrained(k))
            r += w * rates[static_cast<std::size_t>(k)];
        else if (!baseline || pc_flags[static_cast<std::size_t>(k - cfg.K_t)])
            r += w * cfg.rate_target(k);
    }
    return r;
}

/// Per-round baseline evaluated the way the metric needs it: tolerant users get
/// their accumulated Shannon rate, constrained users the sum of per-round
/// finite-blocklength rates (the log-linear bound with the anchor at the achieved SINR).
inline DropRecord evaluate_baseline(const ChannelSet& cs, const ScenarioConfig& cfg, Scheme scheme)
{
    const int T = cfg.T;
    const double frac = 1.0 / (static_cast<double>(T) * T);
    const ComplexVector u =
        per_round_baseline(cs, cfg, scheme == Scheme::mrt ? BaselineKind::mrt : BaselineKind::rzf, T, frac);
    DropRecord rec;
    rec.scheme = scheme;
    rec.feasible = true;
    for (int k = 0; k < cfg.users(); ++k) {
        const auto g = round_sinrs(cs, cfg, u, k, T, frac);
        double r = 0.0;
        if (!cfg.constrained(k)) {
            for (double x : g)
                r += shannon_se(x);
        } else {
            for (double x : g)
                r += fbl_se(x, cfg.m, cfg.epsilon[static_cast<std::size_t>(k)]);
            const int ok = r >= cfg.rate_target(k) ? 1 : 0;
            rec.pc_flags.push_back(ok);
            rec.feasible = rec.feasible && ok;
        }
        rec.rates.push_back(r);
    }
    return rec;
}

/// Runs one scheme on one drop's channels. Solver exceptions become an
/// infeasible record carrying the message.
inline DropRecord run_scheme(const ChannelSet& cs, const ChannelSet* cs_est, const ScenarioConfig& cfg, Scheme scheme)
{
    DropRecord rec;
    try {
        if (is_baseline(scheme)) {
            rec = evaluate_baseline(cs, cfg, scheme);
        } else {
            SolveResult r;
            switch (scheme) {
            case Scheme::delay_gpi:
                r = delay_gpi_solve(cs, cfg, DelayMode::finite);
                break;
            case Scheme::infinite_gpi:
                r = delay_gpi_solve(cs, cfg, DelayMode::infinite);
                break;
            case Scheme::imperfect_gpi:
                if (!cs_est)
                    throw std::invalid_argument("imperfect-gpi needs channel estimates");
                r = delay_gpi_solve(*cs_est, cfg, DelayMode::imperfect);
                break;
            case Scheme::harq_gpi:
                r = harq_gpi_solve(cs, cfg).result;
                break;
            case Scheme::perfect_gpi:
                r = perfect_gpi_solve(cs, cfg);
                break;
            default:
                break;
            }
            rec.feasible = r.feasible;
            rec.rates = r.per_user_rates;
            rec.pc_flags.assign(static_cast<std::size_t>(cfg.K_s), r.feasible ? 1 : 0);
            rec.outer_iterations = r.outer_iterations;
            rec.inner_iterations = r.inner_iterations;
        }
        rec.scheme = scheme;
        rec.sum_se = sum_se_metric(scheme, rec.feasible, rec.pc_flags, rec.rates, cfg);
    } catch (const std::exception& e) {
        rec = DropRecord{};
        rec.scheme = scheme;
        rec.pc_flags.assign(static_cast<std::size_t>(cfg.K_s), 0);
        rec.rates.assign(static_cast<std::size_t>(cfg.users()), 0.0);
        rec.error = e.what();
    }
    return rec;
}

inline bool needs_estimates(const std::vector<Scheme>& schemes)
{
    return std::find(schemes.begin(), schemes.end(), Scheme::imperfect_gpi) != schemes.end();
}

/// Channels of drop `index`: one-ring drop from the drop seed, plus CSIT
/// estimates from an independent stream when requested.
inline std::pair<ChannelSet, std::optional<ChannelSet>> drop_channels(const ScenarioConfig& cfg, std::uint64_t seed,
                                                                      bool with_estimates)
{
    Rng rng(seed);
    ChannelSet cs = sample_drop(cfg, cfg.T, rng);
    if (!with_estimates)
        return {std::move(cs), std::nullopt};
    Rng err(derive_seed(seed, 1));
    const std::vector<ComplexMatrix> phi(static_cast<std::size_t>(cfg.users()),
                                         cfg.csit_error * ComplexMatrix::Identity(cfg.N, cfg.N));
    auto est = apply_csit_error(cs, phi, err);
    return {std::move(cs), std::move(est)};
}

/// All records of one drop, SNR-major then scheme order.
inline std::vector<DropRecord> run_drop(const ExperimentSpec& spec, int drop, bool record_timing)
{
    const std::uint64_t seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(drop));
    const auto [cs, est] = drop_channels(spec.scenario, seed, needs_estimates(spec.schemes));
    std::vector<DropRecord> out;
    for (double snr : spec.snr_grid) {
        ScenarioConfig cfg = spec.scenario;
        cfg.set_snr_db(snr);
        for (auto s : spec.schemes) {
            const auto t0 = std::chrono::steady_clock::now();
            auto rec = run_scheme(cs, est ? &*est : nullptr, cfg, s);
            const auto t1 = std::chrono::steady_clock::now();
            rec.drop = drop;
            rec.seed = seed;
            rec.snr_db = snr;
            rec.wall_ms = record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
            out.push_back(std::move(rec));
        }
    }
    return out;
}

struct SummaryRow {
    std::string scheme;
    double snr_db = 0.0;
    double mean_sum_se = 0.0;
    double feas_rate = 0.0;
    double mean_outer = 0.0;
    double mean_inner = 0.0;
    double wall_ms = 0.0; ///< mean wall-clock time per drop
};

struct ExperimentResult {
    std::vector<DropRecord> records;
    std::vector<SummaryRow> summary;
};

/// One row per (scheme, SNR) cell, in spec order.
inline std::vector<SummaryRow> summarize(const ExperimentSpec& spec, const std::vector<DropRecord>& records)
{
    std::vector<SummaryRow> rows;
    for (auto s : spec.schemes)
        for (double snr : spec.snr_grid) {
            SummaryRow row{scheme_name(s), snr};
            int n = 0;
            for (const auto& r : records) {
                if (r.scheme != s || r.snr_db != snr)
                    continue;
                ++n;
                row.mean_sum_se += r.sum_se;
                row.feas_rate += r.feasible ? 1.0 : 0.0;
                row.mean_outer += r.outer_iterations;
                row.mean_inner += r.inner_iterations;
                row.wall_ms += r.wall_ms;
            }
            if (n > 0) {
                const double d = n;
                row.mean_sum_se /= d;
                row.feas_rate /= d;
                row.mean_outer /= d;
                row.mean_inner /= d;
                row.wall_ms /= d;
            }
            rows.push_back(row);
        }
    return rows;
}

/// Runs every drop on a pool of `spec.threads` workers. Drop i always uses
/// seed derive_seed(master_seed, i), and records are returned in drop order
/// whatever the scheduling.
inline ExperimentResult run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    std::vector<std::vector<DropRecord>> per_drop(static_cast<std::size_t>(spec.drops));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int i = next++; i < spec.drops; i = next++) {
            try {
                per_drop[static_cast<std::size_t>(i)] = run_drop(spec, i, spec.record_timing);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const int n = std::min(spec.threads, spec.drops);
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);

    ExperimentResult res;
    for (auto& d : per_drop)
        for (auto& r : d)
            res.records.push_back(std::move(r));
    res.summary = summarize(spec, res.records);
    return res;
}

// ------------------------------------------------------------------------
// CSV

inline constexpr const char* kDropsHeader = "drop,seed,scheme,snr_db,feasible,pc_flags,rates,sum_se";
inline constexpr const char* kSummaryHeader = "scheme,snr_db,mean_sum_se,feas_rate,mean_outer,mean_inner,wall_ms";

inline std::string format_number(double v)
{
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os << std::setprecision(12) << v;
    return os.str();
}

template <typename T>
std::string join(const std::vector<T>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ';';
        if constexpr (std::is_same_v<T, double>)
            s += format_number(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

inline std::string drops_csv(const std::vector<DropRecord>& records)
{
    std::string out = std::string(kDropsHeader) + "\n";
    for (const auto& r : records)
        out += std::to_string(r.drop) + "," + std::to_string(r.seed) + "," + scheme_name(r.scheme) + "," +
               format_number(r.snr_db) + "," + (r.feasible ? "1" : "0") + "," + join(r.pc_flags) + "," +
               join(r.rates) + "," + format_number(r.sum_se) + "\n";
    return out;
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows)
{
    std::string out = std::string(kSummaryHeader) + "\n";
    for (const auto& r : rows)
        out += r.scheme + "," + format_number(r.snr_db) + "," + format_number(r.mean_sum_se) + "," +
               format_number(r.feas_rate) + "," + format_number(r.mean_outer) + "," + format_number(r.mean_inner) +
               "," + format_number(r.wall_ms) + "\n";
    return out;
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << text;
    if (!f)
        throw std::runtime_error("write to " + p.string() + " failed");
}

/// Writes `drops.csv` and `summary.csv` into directory `dir`, creating it if needed.
inline void write_results(const std::vector<DropRecord>& records, const std::vector<SummaryRow>& summary,
                          const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "drops.csv", drops_csv(records));
    write_text(dir / "summary.csv", summary_csv(summary));
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

inline std::vector<SummaryRow> read_summary(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f)
        throw std::runtime_error("cannot open " + p.string());
    std::string line;
    if (!std::getline(f, line) || line != kSummaryHeader)
        throw std::runtime_error(p.string() + ": unexpected header");
    std::vector<SummaryRow> rows;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        const auto c = split(line, ',');
        if (c.size() != 7)
            throw std::runtime_error(p.string() + ": malformed row '" + line + "'");
        rows.push_back({c[0], std::stod(c[1]), std::stod(c[2]), std::stod(c[3]), std::stod(c[4]), std::stod(c[5]),
                        std::stod(c[6])});
    }
    return rows;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_SIMHARNESS_HPP
