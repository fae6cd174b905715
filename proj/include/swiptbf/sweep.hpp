// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "swiptbf/channel.hpp"
#include "swiptbf/errors.hpp"
#include "swiptbf/io.hpp"
#include "swiptbf/model.hpp"
#include "swiptbf/sdr_solver.hpp"
#include "swiptbf/sinr_solver.hpp"
#include "swiptbf/units.hpp"
#include "swiptbf/zf_solver.hpp"

namespace swiptbf {

enum class SweepAxis { SinrTarget, HarvestTarget, NumAntennas };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::SinrTarget: return "sinr_target_db";
        case SweepAxis::HarvestTarget: return "harvest_target_dbm";
        case SweepAxis::NumAntennas: return "num_antennas";
    }
    return "?";
}

/// One Monte-Carlo experiment: a parameter axis, fixed values for the other
/// knobs, a seeded channel ensemble and the set of methods to compare.
struct SweepConfig {
    ChannelConfig channel;
    LinkParams link;
    double sinr_target_db = 10.0;     // fixed unless swept
    double harvest_target_dbm = -10.0;
    SweepAxis axis = SweepAxis::SinrTarget;
    std::vector<double> axis_values;  // dB, dBm or antenna counts
    int num_draws = 100;
    std::vector<SolveMethod> methods = {SolveMethod::SdrOptimal, SolveMethod::ZeroForcing,
                                        SolveMethod::SinrOptimal};
    double time_limit_s = 0.0;  // 0 = unlimited; overruns are flagged, not killed
    int threads = 0;            // 0 = hardware concurrency
    // Wall time varies run to run; recording it breaks byte-identical CSV
    // output, so it is opt-in.
    bool record_timing = false;

    void validate() const {
        channel.validate();
        if (axis_values.empty()) throw std::invalid_argument("sweep: axis_values is empty");
        if (num_draws < 1) throw std::invalid_argument("sweep: num_draws must be >= 1");
        if (methods.empty()) throw std::invalid_argument("sweep: no methods requested");
        if (axis == SweepAxis::NumAntennas)
            for (double v : axis_values)
                if (v < 1.0 || v != std::floor(v))
                    throw std::invalid_argument("sweep: antenna counts must be positive integers");
    }
};

enum class RecordStatus { Optimal, Infeasible, Inapplicable, Failed, Timeout };

inline const char* to_string(RecordStatus s) {
    switch (s) {
        case RecordStatus::Optimal: return "optimal";
        case RecordStatus::Infeasible: return "infeasible";
        case RecordStatus::Inapplicable: return "inapplicable";
        case RecordStatus::Failed: return "failed";
        case RecordStatus::Timeout: return "timeout";
    }
    return "?";
}

struct SweepRecord {
    double axis_value = 0.0;
    int draw = 0;
    SolveMethod method = SolveMethod::SdrOptimal;
    RecordStatus status = RecordStatus::Failed;
    double total_power_w = 0.0;   // valid when status == Optimal
    double wall_time_s = 0.0;
    double max_violation = 0.0;   // <= 1e-6 whenever status == Optimal
};

/// Deterministic order: axis-major, draw-minor, method-minor, regardless of
/// how many worker threads ran the cells.
inline std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
    config.validate();
    const int num_values = static_cast<int>(config.axis_values.size());
    const int num_methods = static_cast<int>(config.methods.size());
    const int cells = num_values * config.num_draws;
    std::vector<SweepRecord> records(static_cast<std::size_t>(cells) * num_methods);

    const auto solve_cell = [&](int cell) {
        const int value_idx = cell / config.num_draws;
        const int draw = cell % config.num_draws;
        const double axis_value = config.axis_values[value_idx];

        ChannelConfig ch = config.channel;
        double gamma_db = config.sinr_target_db;
        double e_dbm = config.harvest_target_dbm;
        switch (config.axis) {
            case SweepAxis::SinrTarget: gamma_db = axis_value; break;
            case SweepAxis::HarvestTarget: e_dbm = axis_value; break;
            case SweepAxis::NumAntennas: ch.num_antennas = static_cast<int>(axis_value); break;
        }
        const SystemInstance inst =
            generate_instance(ch, config.link, static_cast<std::uint64_t>(draw));
        const Targets targets(VectorXd::Constant(inst.num_users, db_to_linear(gamma_db)),
                              VectorXd::Constant(inst.num_users, dbm_to_watts(e_dbm)));

        for (int m = 0; m < num_methods; ++m) {
            SweepRecord rec;
            rec.axis_value = axis_value;
            rec.draw = draw;
            rec.method = config.methods[m];
            const auto start = std::chrono::steady_clock::now();
            try {
                JbpsSolution sol;
                switch (rec.method) {
                    case SolveMethod::SdrOptimal: sol = solve_jbps_optimal(inst, targets); break;
                    case SolveMethod::ZeroForcing: sol = solve_zf(inst, targets); break;
                    case SolveMethod::SinrOptimal: sol = solve_sinr_opt(inst, targets); break;
                }
                rec.max_violation = max_violation(check_solution(inst, targets, sol, 1e-6));
                rec.total_power_w = sol.total_power;
                rec.status =
                    rec.max_violation <= 1e-6 ? RecordStatus::Optimal : RecordStatus::Failed;
            } catch (const InfeasibleError&) {
                rec.status = RecordStatus::Infeasible;
            } catch (const ZfInapplicable&) {
                rec.status = RecordStatus::Inapplicable;
            } catch (const SolverError&) {
                rec.status = RecordStatus::Failed;
            }
            rec.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (config.time_limit_s > 0.0 && rec.wall_time_s > config.time_limit_s &&
                rec.status == RecordStatus::Optimal)
                rec.status = RecordStatus::Timeout;
            records[static_cast<std::size_t>(cell) * num_methods + m] = rec;
        }
    };

    int workers = config.threads > 0 ? config.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, cells));
    if (workers == 1) {
        for (int cell = 0; cell < cells; ++cell) solve_cell(cell);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int cell = next.fetch_add(1); cell < cells; cell = next.fetch_add(1))
                    solve_cell(cell);
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

struct AggregateRow {
    double axis_value = 0.0;
    SolveMethod method = SolveMethod::SdrOptimal;
    int num_draws = 0;
    int num_optimal = 0;
    int num_failed = 0;  // anything that is not Optimal
    bool has_mean = false;
    double mean_power_w = 0.0;   // over Optimal draws, linear watts
    double mean_power_dbm = 0.0; // dBm of the linear mean
    double std_power_w = 0.0;    // population standard deviation
    double mean_time_s = 0.0;
};

/// Group records by (axis value, method). Powers are averaged in linear
/// watts and converted to dBm afterwards; averaging dB values would not be
/// a mean transmit power.
inline std::vector<AggregateRow> aggregate(const std::vector<SweepRecord>& records) {
    std::vector<AggregateRow> rows;
    const auto find_row = [&](double value, SolveMethod m) -> AggregateRow& {
        for (auto& r : rows)
            if (r.axis_value == value && r.method == m) return r;
        rows.push_back({});
        rows.back().axis_value = value;
        rows.back().method = m;
        return rows.back();
    };
    for (const auto& rec : records) {
        AggregateRow& row = find_row(rec.axis_value, rec.method);
        ++row.num_draws;
        if (rec.status == RecordStatus::Optimal) {
            ++row.num_optimal;
            row.mean_power_w += rec.total_power_w;
            row.std_power_w += rec.total_power_w * rec.total_power_w;
            row.mean_time_s += rec.wall_time_s;
        } else {
            ++row.num_failed;
        }
    }
    for (auto& row : rows) {
        if (row.num_optimal > 0) {
            row.has_mean = true;
            row.mean_power_w /= row.num_optimal;
            row.mean_time_s /= row.num_optimal;
            row.std_power_w =
                std::sqrt(std::max(0.0, row.std_power_w / row.num_optimal -
                                            row.mean_power_w * row.mean_power_w));
            row.mean_power_dbm = watts_to_dbm(row.mean_power_w);
        } else {
            row.mean_power_w = row.std_power_w = row.mean_time_s = 0.0;
        }
    }
    return rows;
}

namespace detail {

inline std::string fmt12(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

/// Per-record CSV. Columns: axis_name, axis_value, draw, method, status,
/// power_dbm, power_watts, time_s, max_violation. Twelve significant digits,
/// "\n" newlines; power cells are empty unless the solve succeeded.
inline void write_records_csv(const std::vector<SweepRecord>& records, SweepAxis axis,
                              const std::string& path, bool record_timing = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "axis_name,axis_value,draw,method,status,power_dbm,power_watts,time_s,max_violation\n";
    for (const auto& r : records) {
        out << axis_name(axis) << ',' << detail::fmt12(r.axis_value) << ',' << r.draw << ','
            << method_name(r.method) << ',' << to_string(r.status) << ',';
        if (r.status == RecordStatus::Optimal || r.status == RecordStatus::Timeout)
            out << detail::fmt12(watts_to_dbm(r.total_power_w)) << ','
                << detail::fmt12(r.total_power_w) << ',';
        else
            out << ",,";
        out << detail::fmt12(record_timing ? r.wall_time_s : 0.0) << ','
            << detail::fmt12(r.max_violation) << '\n';
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

/// Aggregate CSV. Columns: axis_name, axis_value, method, draws, optimal,
/// failed, mean_power_dbm, mean_power_watts, std_power_watts, mean_time_s;
/// mean cells are empty for all-failure groups.
inline void write_aggregate_csv(const std::vector<AggregateRow>& rows, SweepAxis axis,
                                const std::string& path, bool record_timing = false) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << "axis_name,axis_value,method,draws,optimal,failed,mean_power_dbm,mean_power_watts,"
           "std_power_watts,mean_time_s\n";
    for (const auto& r : rows) {
        out << axis_name(axis) << ',' << detail::fmt12(r.axis_value) << ','
            << method_name(r.method) << ',' << r.num_draws << ',' << r.num_optimal << ','
            << r.num_failed << ',';
        if (r.has_mean)
            out << detail::fmt12(r.mean_power_dbm) << ',' << detail::fmt12(r.mean_power_w) << ','
                << detail::fmt12(r.std_power_w) << ','
                << detail::fmt12(record_timing ? r.mean_time_s : 0.0) << '\n';
        else
            out << ",,,\n";
    }
    if (!out) throw std::runtime_error(path + ": write failed");
}

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    try {
        SweepConfig cfg;
        cfg.channel = channel_from_json(j.at("channel"));
        if (j.contains("link")) cfg.link = link_from_json(j.at("link"));
        if (j.contains("targets")) {
            const auto& t = j.at("targets");
            if (t.contains("sinr_db")) cfg.sinr_target_db = t.at("sinr_db").get<double>();
            if (t.contains("harvest_dbm"))
                cfg.harvest_target_dbm = t.at("harvest_dbm").get<double>();
        }
        const auto& s = j.at("sweep");
        const std::string axis = s.at("axis").get<std::string>();
        if (axis == "sinr_target_db")
            cfg.axis = SweepAxis::SinrTarget;
        else if (axis == "harvest_target_dbm")
            cfg.axis = SweepAxis::HarvestTarget;
        else if (axis == "num_antennas")
            cfg.axis = SweepAxis::NumAntennas;
        else
            throw ParseError("sweep.axis must be sinr_target_db, harvest_target_dbm or "
                             "num_antennas");
        cfg.axis_values = s.at("values").get<std::vector<double>>();
        if (s.contains("num_draws")) cfg.num_draws = s.at("num_draws").get<int>();
        if (s.contains("methods")) {
            cfg.methods.clear();
            for (const auto& m : s.at("methods")) {
                const std::string name = m.get<std::string>();
                if (name == "optimal")
                    cfg.methods.push_back(SolveMethod::SdrOptimal);
                else if (name == "zf")
                    cfg.methods.push_back(SolveMethod::ZeroForcing);
                else if (name == "sinr-opt")
                    cfg.methods.push_back(SolveMethod::SinrOptimal);
                else
                    throw ParseError("unknown method '" + name + "'");
            }
        }
        if (s.contains("time_limit_s")) cfg.time_limit_s = s.at("time_limit_s").get<double>();
        if (s.contains("threads")) cfg.threads = s.at("threads").get<int>();
        if (s.contains("record_timing")) cfg.record_timing = s.at("record_timing").get<bool>();
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("sweep config: ") + e.what());
    }
}

}  // namespace swiptbf
