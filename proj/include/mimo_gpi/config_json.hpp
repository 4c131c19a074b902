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


#ifndef MIMO_GPI_CONFIG_JSON_HPP
#define MIMO_GPI_CONFIG_JSON_HPP

#include "simharness.hpp"

#include <json.hpp>

#include <set>

namespace mimo_gpi {

using nlohmann::json;

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
T get(const json& j, const char* key)
{
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

/// Scalar broadcast to every user, or an explicit per-user array.
inline std::vector<double> per_user_array(const json& j, const char* key, int users)
{
    if (j.at(key).is_number())
        return std::vector<double>(static_cast<std::size_t>(users), get<double>(j, key));
    return get<std::vector<double>>(j, key);
}

} // namespace detail

inline const std::set<std::string>& scenario_keys()
{
    static const std::set<std::string> keys{"N",       "K_t",   "K_s", "P",     "sigma2", "m",
                                            "epsilon", "delta", "D_s", "w",     "gamma_tilde",
                                            "T",       "Delta", "xi",  "alpha", "N_c",    "N_p",
                                            "q_weighting", "redraw_aoa_per_round", "csit_error"};
    return keys;
}

inline const std::set<std::string>& experiment_keys()
{
    static const std::set<std::string> keys{"snr_grid", "drops", "master_seed", "schemes"};
    return keys;
}

/// Reads a scenario. Absent keys keep their defaults; unknown keys are an error
/// unless listed in `extra`.
inline ScenarioConfig scenario_from_json(const json& j, const std::set<std::string>& extra = {})
{
    using detail::get;
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!scenario_keys().contains(key) && !extra.contains(key))
            throw ConfigError("unknown config key '" + key + "'");

    ScenarioConfig c;
    if (j.contains("N"))
        c.N = get<int>(j, "N");
    if (j.contains("K_t"))
        c.K_t = get<int>(j, "K_t");
    if (j.contains("K_s"))
        c.K_s = get<int>(j, "K_s");
    const int K = c.users();
    const auto resize = [K](std::vector<double>& v) { v.resize(static_cast<std::size_t>(std::max(K, 0)), v.empty() ? 0.0 : v.back()); };
    resize(c.sigma2);
    resize(c.epsilon);
    resize(c.w);
    c.delta.resize(static_cast<std::size_t>(std::max(K, 0)), 0.0);
    c.gamma_tilde.resize(static_cast<std::size_t>(std::max(K, 0)));

    if (j.contains("P"))
        c.P = get<double>(j, "P");
    if (j.contains("sigma2"))
        c.sigma2 = detail::per_user_array(j, "sigma2", K);
    if (j.contains("m"))
        c.m = get<double>(j, "m");
    if (j.contains("epsilon"))
        c.epsilon = detail::per_user_array(j, "epsilon", K);
    if (j.contains("delta"))
        c.delta = get<std::vector<double>>(j, "delta");
    if (j.contains("D_s"))
        c.D_s = get<double>(j, "D_s");
    if (j.contains("w"))
        c.w = detail::per_user_array(j, "w", K);
    if (j.contains("gamma_tilde")) {
        const auto& g = j.at("gamma_tilde");
        if (!g.is_array())
            throw ConfigError("config key 'gamma_tilde' must be an array");
        c.gamma_tilde.clear();
        for (const auto& e : g) {
            if (e.is_number())
                c.gamma_tilde.push_back({e.get<double>()});
            else if (e.is_null())
                c.gamma_tilde.emplace_back();
            else
                c.gamma_tilde.push_back(e.get<std::vector<double>>());
        }
    }
    if (j.contains("T"))
        c.T = get<int>(j, "T");
    if (j.contains("Delta"))
        c.Delta = get<double>(j, "Delta");
    if (j.contains("xi"))
        c.xi = get<double>(j, "xi");
    if (j.contains("alpha"))
        c.alpha = get<double>(j, "alpha");
    if (j.contains("N_c"))
        c.N_c = get<int>(j, "N_c");
    if (j.contains("N_p"))
        c.N_p = get<int>(j, "N_p");
    if (j.contains("q_weighting")) {
        const auto q = get<std::string>(j, "q_weighting");
        if (q == "amplitude")
            c.q_weighting = RoundWeighting::amplitude;
        else if (q == "power")
            c.q_weighting = RoundWeighting::power;
        else
            throw ConfigError("q_weighting must be 'amplitude' or 'power'");
    }
    if (j.contains("redraw_aoa_per_round"))
        c.redraw_aoa_per_round = get<bool>(j, "redraw_aoa_per_round");
    if (j.contains("csit_error"))
        c.csit_error = get<double>(j, "csit_error");

    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

/// Scenario plus the experiment keys (snr_grid, drops, master_seed, schemes).
inline ExperimentSpec experiment_from_json(const json& j)
{
    using detail::get;
    ExperimentSpec spec;
    spec.scenario = scenario_from_json(j, experiment_keys());
    if (j.contains("snr_grid"))
        spec.snr_grid = get<std::vector<double>>(j, "snr_grid");
    if (j.contains("drops"))
        spec.drops = get<int>(j, "drops");
    if (j.contains("master_seed"))
        spec.master_seed = get<std::uint64_t>(j, "master_seed");
    if (j.contains("schemes")) {
        spec.schemes.clear();
        for (const auto& s : get<std::vector<std::string>>(j, "schemes")) {
            try {
                spec.schemes.push_back(parse_scheme(s));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
    }
    spec.validate();
    return spec;
}

inline json load_json_file(const std::filesystem::path& p)
{
    std::ifstream f(p);
    if (!f)
        throw ConfigError("cannot open config " + p.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
}

inline json to_json(const SolveResult& r)
{
    json j;
    std::vector<std::array<double, 2>> u;
    for (Eigen::Index i = 0; i < r.precoder.size(); ++i)
        u.push_back({r.precoder(i).real(), r.precoder(i).imag()});
    j["precoder"] = u;
    j["feasible"] = r.feasible;
    j["per_user_rates"] = r.per_user_rates;
    j["multipliers"] = r.multipliers;
    j["outer_iterations"] = r.outer_iterations;
    j["inner_iterations"] = r.inner_iterations;
    j["stationarity_residual"] = r.stationarity_residual;
    j["inner_converged"] = r.inner_converged;
    return j;
}

} // namespace mimo_gpi

#endif // MIMO_GPI_CONFIG_JSON_HPP
