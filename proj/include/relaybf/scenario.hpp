// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace relaybf {

enum class Topology { MIMO, Distributed };

/// Static description of the relay network: antenna/relay count, multicast
/// group layout, transmit powers, noise levels and relay power budgets.
/// All powers are linear watts (0 dB = 1 W).
struct NetworkConfig {
    int num_relay_antennas = 0;                 ///< L
    int num_groups = 0;                         ///< G
    std::vector<int> group_sizes;               ///< m_k, length G
    std::vector<double> tx_powers;              ///< P_j, length G
    std::vector<double> relay_noise_vars;       ///< sigma_l^2, length L
    std::vector<double> user_noise_vars;        ///< sigma_{k,i}^2, length M, group-major
    double total_power_budget = 0.0;            ///< P0_bar
    std::optional<std::vector<double>> per_antenna_budgets; ///< Pl_bar, length L
    Topology topology = Topology::MIMO;

    int num_users() const {
        int m = 0;
        for (int mk : group_sizes) m += mk;
        return m;
    }

    /// Flat user index of user i (0-based) in group k (0-based).
    int user_index(int k, int i) const {
        int base = 0;
        for (int g = 0; g < k; ++g) base += group_sizes[g];
        return base + i;
    }

    /// Dimension of the beamforming weight vector: L^2 for a MIMO relay
    /// (the vectorized L x L weighting matrix), L for distributed relays.
    int weight_dim() const {
        return topology == Topology::MIMO
                   ? num_relay_antennas * num_relay_antennas
                   : num_relay_antennas;
    }
};

/// One quasi-static channel draw: uplink vectors f_j (transmitter j to the
/// relay antennas) and downlink vectors g_{k,i} (relay antennas to each
/// user), stored in flat group-major user order.
struct ChannelRealization {
    std::vector<Eigen::VectorXcd> f; ///< length G, each of length L
    std::vector<Eigen::VectorXcd> g; ///< length M, each of length L
    std::uint64_t seed = 0;
};

/// Throws DimensionMismatchError or NonpositiveParameterError naming the
/// offending field; returns normally iff every invariant holds.
void validate_config(const NetworkConfig& config);

/// Draws all channel entries i.i.d. CN(0,1) (real/imaginary parts each of
/// variance 1/2).  Pure function of (config, seed): per-vector substreams
/// make the result independent of evaluation order.
ChannelRealization generate_channels(const NetworkConfig& config, std::uint64_t seed);

/// Parse a NetworkConfig from its JSON document (keys are the field names).
NetworkConfig config_from_json_text(const std::string& text);
NetworkConfig load_config(const std::string& path);
std::string config_to_json_text(const NetworkConfig& config);

} // namespace relaybf
