// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: feasibility checks, single-instance solves,
// method comparison and Monte-Carlo sweeps.
//
// Exit codes: 0 success / feasible, 2 infeasible, 3 solver failure,
// 4 malformed input.

#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "swiptbf/feasibility.hpp"
#include "swiptbf/io.hpp"
#include "swiptbf/sdr_solver.hpp"
#include "swiptbf/sinr_solver.hpp"
#include "swiptbf/sweep.hpp"
#include "swiptbf/units.hpp"
#include "swiptbf/zf_solver.hpp"

namespace {

using namespace swiptbf;

struct ProblemInput {
    std::string instance_path;
    std::string channel_path;
    std::uint64_t draw = 0;
    std::vector<double> sinr_db;
    std::vector<double> harvest_dbm;

    void add_options(CLI::App* cmd, bool with_targets = true) {
        auto* inst = cmd->add_option("--instance", instance_path, "instance JSON file");
        auto* chan = cmd->add_option("--channel", channel_path,
                                     "config JSON with a 'channel' section; the instance is "
                                     "generated from it");
        cmd->add_option("--draw", draw, "channel draw index (with --channel)")->needs(chan);
        inst->excludes(chan);
        if (with_targets) {
            cmd->add_option("--sinr-db", sinr_db,
                            "per-user SINR targets in dB (one value broadcasts)");
            cmd->add_option("--harvest-dbm", harvest_dbm,
                            "per-user harvested-power targets in dBm (one value broadcasts)");
        }
    }

    SystemInstance load_instance(nlohmann::json* file_json = nullptr) const {
        if (!instance_path.empty()) {
            nlohmann::json j = detail::load_json(instance_path);
            if (file_json) *file_json = j;
            return instance_from_json(j);
        }
        if (channel_path.empty()) throw ParseError("need --instance or --channel");
        nlohmann::json j = detail::load_json(channel_path);
        if (file_json) *file_json = j;
        const ChannelConfig cfg = channel_from_json(j.at("channel"));
        const LinkParams link =
            j.contains("link") ? link_from_json(j.at("link")) : LinkParams{};
        return generate_instance(cfg, link, draw);
    }

    static VectorXd broadcast(const std::vector<double>& v, int k_users, const char* what) {
        if (v.size() == 1) return VectorXd::Constant(k_users, v[0]);
        if (static_cast<int>(v.size()) == k_users)
            return Eigen::Map<const VectorXd>(v.data(), k_users);
        throw ParseError(std::string(what) + ": give one value or one per user");
    }

    Targets load_targets(const SystemInstance& inst, const nlohmann::json& file_json) const {
        const int K = inst.num_users;
        VectorXd gamma, e;
        if (!sinr_db.empty())
            gamma = broadcast(sinr_db, K, "--sinr-db")
                        .unaryExpr([](double d) { return db_to_linear(d); });
        if (!harvest_dbm.empty())
            e = broadcast(harvest_dbm, K, "--harvest-dbm")
                    .unaryExpr([](double d) { return dbm_to_watts(d); });
        if (gamma.size() == 0 || e.size() == 0) {
            if (!file_json.contains("targets"))
                throw ParseError("no targets: pass --sinr-db/--harvest-dbm or add a 'targets' "
                                 "section to the input file");
            const Targets from_file = targets_from_json(file_json.at("targets"), K);
            if (gamma.size() == 0) gamma = from_file.sinr;
            if (e.size() == 0) e = from_file.harvest;
        }
        return Targets(gamma, e);
    }
};

void print_solution(const SystemInstance& inst, const Targets& targets, const JbpsSolution& sol,
                    bool as_json, const SdrRelaxationSolution* rel) {
    if (as_json) {
        nlohmann::json j;
        j["method"] = method_name(sol.method);
        j["total_power_watts"] = sol.total_power;
        j["total_power_dbm"] = watts_to_dbm(sol.total_power);
        for (int k = 0; k < inst.num_users; ++k) {
            j["ps_ratios"].push_back(sol.ps_ratios[k]);
            j["sinr_db"].push_back(linear_to_db(sol.per_user_sinr[k]));
            j["harvest_dbm"].push_back(watts_to_dbm(sol.per_user_harvest[k]));
        }
        const ConstraintReport rep = check_solution(inst, targets, sol);
        j["feasible"] = rep.feasible;
        j["max_violation"] = max_violation(rep);
        if (rel) {
            j["relaxation_objective_watts"] = rel->objective;
            j["dual_objective_watts"] = rel->certificate.dual_objective;
            j["kkt"]["complementarity"] = rel->certificate.complementarity;
            j["kkt"]["psd_violation"] = rel->certificate.psd_violation;
            j["kkt"]["tightness"] = rel->certificate.tightness;
            j["kkt"]["stationarity"] = rel->certificate.stationarity;
            for (int k = 0; k < inst.num_users; ++k) {
                j["kkt"]["lambda"].push_back(rel->certificate.lambda[k]);
                j["kkt"]["mu"].push_back(rel->certificate.mu[k]);
            }
        }
        std::printf("%s\n", j.dump(2).c_str());
        return;
    }
    std::printf("method          %s\n", method_name(sol.method));
    std::printf("total power     %.9f dBm  (%.6e W)\n", watts_to_dbm(sol.total_power),
                sol.total_power);
    std::printf("%-4s %-14s %-14s %-14s\n", "user", "ps_ratio", "sinr_db", "harvest_dbm");
    for (int k = 0; k < inst.num_users; ++k)
        std::printf("%-4d %-14.8g %-14.8f %-14.8f\n", k, sol.ps_ratios[k],
                    linear_to_db(sol.per_user_sinr[k]), watts_to_dbm(sol.per_user_harvest[k]));
    const ConstraintReport rep = check_solution(inst, targets, sol);
    std::printf("feasible        %s (max violation %.3e)\n", rep.feasible ? "yes" : "no",
                max_violation(rep));
    if (rel) {
        const KktReport kkt = verify_kkt(*rel, rel->certificate, inst, targets);
        std::printf("relaxation      objective %.6e W, certified dual bound %.6e W\n",
                    rel->objective, rel->certificate.dual_objective);
        std::printf("certificate     complementarity %.2e, psd violation %.2e, tightness %.2e\n",
                    rel->certificate.complementarity, rel->certificate.psd_violation,
                    rel->certificate.tightness);
        std::printf("kkt checks      %s (dual psd %d, complementarity %d, tightness %d, "
                    "duals>0 %d, rank %d)\n",
                    kkt.all_passed() ? "pass" : "FAIL", kkt.dual_psd, kkt.complementarity,
                    kkt.primal_tight, kkt.duals_positive, kkt.dual_rank);
    }
}

int cmd_feasibility(const ProblemInput& input) {
    nlohmann::json file_json;
    const SystemInstance inst = input.load_instance(&file_json);
    VectorXd gamma;
    if (!input.sinr_db.empty())
        gamma = ProblemInput::broadcast(input.sinr_db, inst.num_users, "--sinr-db")
                    .unaryExpr([](double d) { return db_to_linear(d); });
    else if (file_json.contains("targets"))
        gamma = targets_from_json(file_json.at("targets"), inst.num_users).sinr;
    else
        throw ParseError("feasibility: pass --sinr-db or provide targets in the file");

    const FeasibilityReport rep = is_feasible(gamma, inst.channels);
    std::printf("target load     %.12g   (sum gamma/(1+gamma))\n", rep.target_load);
    std::printf("effective rank  %d\n", rep.rank);
    std::printf("margin          %.12g\n", rep.margin);
    std::printf("verdict         %s\n", rep.feasible ? "feasible" : "infeasible");
    return rep.feasible ? 0 : 2;
}

int cmd_solve(const ProblemInput& input, const std::string& method, double tol, bool as_json) {
    nlohmann::json file_json;
    const SystemInstance inst = input.load_instance(&file_json);
    const Targets targets = input.load_targets(inst, file_json);

    SdrSolveOptions opt;
    if (tol > 0.0) opt.kkt_tol = tol;
    if (method == "optimal") {
        const SdrRelaxationSolution rel = solve_relaxation(inst, targets, opt);
        if (rel.status == SdrStatus::Infeasible) {
            std::fprintf(stderr, "infeasible: %s\n", rel.message.c_str());
            return 2;
        }
        if (rel.status != SdrStatus::Optimal) {
            std::fprintf(stderr, "solver failure: %s\n", rel.message.c_str());
            return 3;
        }
        MatrixXcd V(inst.num_antennas, inst.num_users);
        for (int k = 0; k < inst.num_users; ++k)
            V.col(k) = extract_rank_one(rel.X[k], opt.rank_one_tol).v;
        const JbpsSolution sol =
            make_solution(inst, std::move(V), rel.ps_ratios, SolveMethod::SdrOptimal);
        print_solution(inst, targets, sol, as_json, &rel);
        return 0;
    }
    const JbpsSolution sol =
        method == "zf" ? solve_zf(inst, targets) : solve_sinr_opt(inst, targets);
    print_solution(inst, targets, sol, as_json, nullptr);
    return 0;
}

int cmd_compare(const ProblemInput& input) {
    nlohmann::json file_json;
    const SystemInstance inst = input.load_instance(&file_json);
    const Targets targets = input.load_targets(inst, file_json);

    struct Row {
        const char* name;
        bool ok = false;
        std::string error;
        double power = 0.0;
    };
    Row rows[3] = {{"optimal"}, {"zf"}, {"sinr-opt"}};
    for (int i = 0; i < 3; ++i) {
        try {
            JbpsSolution sol;
            if (i == 0)
                sol = solve_jbps_optimal(inst, targets);
            else if (i == 1)
                sol = solve_zf(inst, targets);
            else
                sol = solve_sinr_opt(inst, targets);
            rows[i].ok = true;
            rows[i].power = sol.total_power;
        } catch (const SolverError& e) {
            rows[i].error = e.what();
        }
    }
    std::printf("%-10s %-16s %-14s %s\n", "method", "power_dbm", "power_watts", "gap_vs_optimal");
    for (const Row& r : rows) {
        if (!r.ok) {
            std::printf("%-10s %-16s %-14s (%s)\n", r.name, "-", "-", r.error.c_str());
            continue;
        }
        std::string gap = "-";
        if (rows[0].ok && rows[0].power > 0.0) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%+.4e", r.power / rows[0].power - 1.0);
            gap = buf;
        }
        std::printf("%-10s %-16.9f %-14.6e %s\n", r.name, watts_to_dbm(r.power), r.power,
                    gap.c_str());
    }
    return rows[0].ok ? 0 : 3;
}

int cmd_sweep(const std::string& config_path, const std::string& records_path,
              const std::string& aggregate_path) {
    const SweepConfig config = sweep_config_from_json(detail::load_json(config_path));
    const std::vector<SweepRecord> records = run_sweep(config);
    write_records_csv(records, config.axis, records_path, config.record_timing);
    write_aggregate_csv(aggregate(records), config.axis, aggregate_path, config.record_timing);
    int failures = 0;
    for (const auto& r : records)
        if (r.status == RecordStatus::Failed || r.status == RecordStatus::Timeout) ++failures;
    std::printf("%zu records -> %s, aggregate -> %s (%d failures)\n", records.size(),
                records_path.c_str(), aggregate_path.c_str(), failures);
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint beamforming / power-splitting design toolkit"};
    app.require_subcommand(1);

    ProblemInput feas_in, solve_in, cmp_in;
    std::string method = "optimal", config_path, records_path = "records.csv",
                aggregate_path = "aggregate.csv";
    double tol = 0.0;
    bool as_json = false;

    auto* feas = app.add_subcommand("feasibility", "closed-form feasibility test");
    feas_in.add_options(feas, false);
    feas->add_option("--sinr-db", feas_in.sinr_db, "per-user SINR targets in dB");

    auto* solve = app.add_subcommand("solve", "solve one instance");
    solve_in.add_options(solve);
    solve->add_option("--method", method, "optimal | zf | sinr-opt")
        ->check(CLI::IsMember({"optimal", "zf", "sinr-opt"}));
    solve->add_option("--tol", tol, "relative solve tolerance (optimal method)");
    solve->add_flag("--json", as_json, "machine-readable output");

    auto* cmp = app.add_subcommand("compare", "run all three methods side by side");
    cmp_in.add_options(cmp);

    auto* sweep = app.add_subcommand("sweep", "seeded Monte-Carlo sweep to CSV");
    sweep->add_option("--config", config_path, "sweep config JSON")->required();
    sweep->add_option("--out-records", records_path, "per-record CSV path");
    sweep->add_option("--out-aggregate", aggregate_path, "aggregate CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (feas->parsed()) return cmd_feasibility(feas_in);
        if (solve->parsed()) return cmd_solve(solve_in, method, tol, as_json);
        if (cmp->parsed()) return cmd_compare(cmp_in);
        if (sweep->parsed()) return cmd_sweep(config_path, records_path, aggregate_path);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 4;
    } catch (const InfeasibleError& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 2;
    } catch (const ZfInapplicable& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
