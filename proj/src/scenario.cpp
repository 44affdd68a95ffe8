// SPDX-License-Identifier: Apache-2.0

#include "relaybf/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "relaybf/errors.hpp"
#include "relaybf/rng.hpp"

namespace relaybf {

namespace {

void require_positive(const std::vector<double>& v, const char* field) {
    for (double x : v) {
        if (!(x > 0.0)) {
            throw NonpositiveParameterError(std::string(field) +
                                            " must be strictly positive");
        }
    }
}

} // namespace

void validate_config(const NetworkConfig& config) {
    if (config.num_relay_antennas < 1)
        throw DimensionMismatchError("num_relay_antennas must be >= 1");
    if (config.num_groups < 1)
        throw DimensionMismatchError("num_groups must be >= 1");
    if (static_cast<int>(config.group_sizes.size()) != config.num_groups)
        throw DimensionMismatchError("group_sizes must have length num_groups");
    for (int mk : config.group_sizes) {
        if (mk < 1) throw DimensionMismatchError("group_sizes entries must be >= 1");
    }
    if (static_cast<int>(config.tx_powers.size()) != config.num_groups)
        throw DimensionMismatchError("tx_powers must have length num_groups");
    if (static_cast<int>(config.relay_noise_vars.size()) != config.num_relay_antennas)
        throw DimensionMismatchError("relay_noise_vars must have length num_relay_antennas");
    if (static_cast<int>(config.user_noise_vars.size()) != config.num_users())
        throw DimensionMismatchError("user_noise_vars must have length sum(group_sizes)");

    require_positive(config.tx_powers, "tx_powers");
    require_positive(config.relay_noise_vars, "relay_noise_vars");
    require_positive(config.user_noise_vars, "user_noise_vars");
    if (!(config.total_power_budget > 0.0))
        throw NonpositiveParameterError("total_power_budget must be strictly positive");
    if (config.per_antenna_budgets) {
        if (static_cast<int>(config.per_antenna_budgets->size()) != config.num_relay_antennas)
            throw DimensionMismatchError(
                "per_antenna_budgets must have length num_relay_antennas");
        require_positive(*config.per_antenna_budgets, "per_antenna_budgets");
    }
}

ChannelRealization generate_channels(const NetworkConfig& config, std::uint64_t seed) {
    validate_config(config);
    const int L = config.num_relay_antennas;
    ChannelRealization ch;
    ch.seed = seed;
    ch.f.resize(config.num_groups);
    for (int j = 0; j < config.num_groups; ++j) {
        auto s = RngStream::derive(seed, RngStream::kTagChannelUplink, j);
        ch.f[j].resize(L);
        for (int l = 0; l < L; ++l) ch.f[j][l] = s.next_cnormal();
    }
    const int M = config.num_users();
    ch.g.resize(M);
    for (int u = 0; u < M; ++u) {
        auto s = RngStream::derive(seed, RngStream::kTagChannelDownlink, u);
        ch.g[u].resize(L);
        for (int l = 0; l < L; ++l) ch.g[u][l] = s.next_cnormal();
    }
    return ch;
}

namespace {

using nlohmann::json;

std::vector<double> as_double_vec(const json& j, const char* key) {
    if (!j.at(key).is_array())
        throw DimensionMismatchError(std::string(key) + " must be an array");
    return j.at(key).get<std::vector<double>>();
}

} // namespace

NetworkConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    NetworkConfig c;
    c.num_relay_antennas = j.at("num_relay_antennas").get<int>();
    c.num_groups = j.at("num_groups").get<int>();
    c.group_sizes = j.at("group_sizes").get<std::vector<int>>();
    c.tx_powers = as_double_vec(j, "tx_powers");
    c.relay_noise_vars = as_double_vec(j, "relay_noise_vars");
    c.user_noise_vars = as_double_vec(j, "user_noise_vars");
    c.total_power_budget = j.at("total_power_budget").get<double>();
    if (j.contains("per_antenna_budgets") && !j.at("per_antenna_budgets").is_null())
        c.per_antenna_budgets = as_double_vec(j, "per_antenna_budgets");
    const std::string topo = j.value("topology", std::string("MIMO"));
    if (topo == "MIMO") {
        c.topology = Topology::MIMO;
    } else if (topo == "Distributed") {
        c.topology = Topology::Distributed;
    } else {
        throw DimensionMismatchError("topology must be \"MIMO\" or \"Distributed\"");
    }
    return c;
}

NetworkConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const NetworkConfig& config) {
    json j;
    j["num_relay_antennas"] = config.num_relay_antennas;
    j["num_groups"] = config.num_groups;
    j["group_sizes"] = config.group_sizes;
    j["tx_powers"] = config.tx_powers;
    j["relay_noise_vars"] = config.relay_noise_vars;
    j["user_noise_vars"] = config.user_noise_vars;
    j["total_power_budget"] = config.total_power_budget;
    if (config.per_antenna_budgets) {
        j["per_antenna_budgets"] = *config.per_antenna_budgets;
    } else {
        j["per_antenna_budgets"] = nullptr;
    }
    j["topology"] = config.topology == Topology::MIMO ? "MIMO" : "Distributed";
    return j.dump(2);
}

} // namespace relaybf
