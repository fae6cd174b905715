// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <fstream>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>

#include "swiptbf/channel.hpp"
#include "swiptbf/model.hpp"
#include "swiptbf/units.hpp"

namespace swiptbf {

/// Malformed input files; carries a short location hint.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

/// Scalar broadcast or per-user array.
inline VectorXd per_user(const json& j, const char* key, int k_users,
                         std::optional<double> fallback = std::nullopt) {
    if (!j.contains(key)) {
        if (fallback) return VectorXd::Constant(k_users, *fallback);
        throw ParseError(std::string("missing field '") + key + "'");
    }
    const json& v = j.at(key);
    if (v.is_number()) return VectorXd::Constant(k_users, v.get<double>());
    if (!v.is_array() || static_cast<int>(v.size()) != k_users)
        throw ParseError(std::string("field '") + key + "' must be a number or an array of " +
                         std::to_string(k_users));
    VectorXd out(k_users);
    for (int i = 0; i < k_users; ++i) out[i] = v[i].get<double>();
    return out;
}

}  // namespace detail

/// Instance files hold the channel matrix as (re, im) pairs in row-major
/// order and the receiver parameters. Power fields are written in dBm and,
/// for bit-exact round trips, also in watts; the watt values win when both
/// are present (a dBm -> W -> dBm trip costs an ulp).
inline nlohmann::json instance_to_json(const SystemInstance& inst) {
    nlohmann::json j;
    j["num_antennas"] = inst.num_antennas;
    j["num_users"] = inst.num_users;
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < inst.num_antennas; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < inst.num_users; ++c)
            row.push_back({inst.channels(r, c).real(), inst.channels(r, c).imag()});
        rows.push_back(std::move(row));
    }
    j["channels"] = std::move(rows);
    for (int k = 0; k < inst.num_users; ++k) {
        j["antenna_noise_dbm"].push_back(watts_to_dbm(inst.antenna_noise[k]));
        j["antenna_noise_watts"].push_back(inst.antenna_noise[k]);
        j["id_noise_dbm"].push_back(watts_to_dbm(inst.id_noise[k]));
        j["id_noise_watts"].push_back(inst.id_noise[k]);
        j["eh_efficiency"].push_back(inst.eh_efficiency[k]);
    }
    return j;
}

inline SystemInstance instance_from_json(const nlohmann::json& j) {
    try {
        const int nt = j.at("num_antennas").get<int>();
        const int k_users = j.at("num_users").get<int>();
        const auto& rows = j.at("channels");
        if (!rows.is_array() || static_cast<int>(rows.size()) != nt)
            throw ParseError("'channels' must have num_antennas rows");
        MatrixXcd H(nt, k_users);
        for (int r = 0; r < nt; ++r) {
            const auto& row = rows[r];
            if (!row.is_array() || static_cast<int>(row.size()) != k_users)
                throw ParseError("'channels' row " + std::to_string(r) +
                                 " must have num_users entries");
            for (int c = 0; c < k_users; ++c)
                H(r, c) = {row[c].at(0).get<double>(), row[c].at(1).get<double>()};
        }
        VectorXd sigma2(k_users), delta2(k_users);
        if (j.contains("antenna_noise_watts"))
            sigma2 = detail::per_user(j, "antenna_noise_watts", k_users);
        else
            sigma2 = detail::per_user(j, "antenna_noise_dbm", k_users)
                         .unaryExpr([](double d) { return dbm_to_watts(d); });
        if (j.contains("id_noise_watts"))
            delta2 = detail::per_user(j, "id_noise_watts", k_users);
        else
            delta2 = detail::per_user(j, "id_noise_dbm", k_users)
                         .unaryExpr([](double d) { return dbm_to_watts(d); });
        const VectorXd zeta = detail::per_user(j, "eh_efficiency", k_users);
        return SystemInstance(std::move(H), std::move(sigma2), std::move(delta2), zeta);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("instance: ") + e.what());
    }
}

/// Targets appear either inside an instance file or in a config; dB / dBm at
/// this boundary, converted exactly once.
inline Targets targets_from_json(const nlohmann::json& j, int k_users) {
    try {
        const VectorXd gamma = detail::per_user(j, "sinr_db", k_users)
                                   .unaryExpr([](double d) { return db_to_linear(d); });
        const VectorXd e = detail::per_user(j, "harvest_dbm", k_users)
                               .unaryExpr([](double d) { return dbm_to_watts(d); });
        return Targets(gamma, e);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("targets: ") + e.what());
    }
}

inline ChannelConfig channel_from_json(const nlohmann::json& j) {
    try {
        ChannelConfig cfg;
        cfg.num_antennas = j.at("num_antennas").get<int>();
        cfg.user_directions_deg = j.at("user_directions_deg").get<std::vector<double>>();
        if (j.contains("rician_factor_db")) cfg.rician_factor_db = j.at("rician_factor_db");
        if (j.contains("los_amplitude")) cfg.los_amplitude = j.at("los_amplitude");
        if (j.contains("nlos_variance")) cfg.nlos_variance = j.at("nlos_variance");
        if (j.contains("element_spacing_ratio"))
            cfg.element_spacing_ratio = j.at("element_spacing_ratio");
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("channel: ") + e.what());
    }
}

inline LinkParams link_from_json(const nlohmann::json& j) {
    try {
        LinkParams link;
        if (j.contains("antenna_noise_dbm"))
            link.antenna_noise_w = dbm_to_watts(j.at("antenna_noise_dbm").get<double>());
        if (j.contains("id_noise_dbm"))
            link.id_noise_w = dbm_to_watts(j.at("id_noise_dbm").get<double>());
        if (j.contains("eh_efficiency")) link.eh_efficiency = j.at("eh_efficiency").get<double>();
        return link;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("link: ") + e.what());
    }
}

inline void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace swiptbf
