#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hardyw/analysis.hpp"
#include "hardyw/lhv.hpp"
#include "hardyw/optimize.hpp"
#include "hardyw/serialize.hpp"

namespace hardyw::cli {

inline constexpr const char* tool_version = "hardyw 0.1.0";

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1; // numerical failure or failed invariant
inline constexpr int exit_usage = 2;   // unknown flags / malformed values

namespace detail {

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Every JSON payload embeds the run manifest: identical (command, options,
// seed) must give an identical numerical payload; the two timestamps are the
// only fields allowed to differ between runs.
struct Manifest {
    std::string command;
    std::map<std::string, std::string> options;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;

    void write(JsonWriter& w) const {
        w.key("manifest").begin_object();
        w.kv("command", command);
        w.key("options").begin_object();
        for (const auto& [k, v] : options) w.kv(k, v);
        w.end_object();
        w.kv("seed", seed);
        w.kv("tool_version", tool_version);
        w.kv("started_at", started_at);
        w.kv("finished_at", finished_at);
        w.end_object();
    }
};

struct CommonOpts {
    std::string output; // empty = stdout
    std::uint64_t seed = 0;
    int threads = 0;
};

inline void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--output", c.output, "Write the payload to PATH instead of stdout");
    cmd->add_option("--seed", c.seed, "RNG seed (default 0)");
    cmd->add_option("--threads", c.threads,
                    "Worker thread cap, 0 = all cores (results are identical "
                    "for any value)");
}

inline void add_optimizer(CLI::App* cmd, OptOptions& o) {
    cmd->add_option("--starts", o.starts, "Multistart restarts");
    cmd->add_option("--max-iters", o.max_iters, "Simplex iterations per start");
    cmd->add_option("--f-tol", o.f_tol, "Objective tolerance");
    cmd->add_option("--penalty-initial", o.penalty_initial, "Initial penalty weight");
    cmd->add_option("--penalty-growth", o.penalty_growth, "Penalty growth factor");
    cmd->add_option("--residual-target", o.residual_target,
                    "Constraint residual target (generic path)");
    cmd->add_flag("--planar-only", o.planar_only, "Restrict w-vectors to the x-axis");
}

inline void emit(const CommonOpts& c, const std::string& payload) {
    if (c.output.empty()) {
        std::fwrite(payload.data(), 1, payload.size(), stdout);
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + c.output);
    f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

inline std::vector<double> parse_number_list(const std::string& csv, const char* flag) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size() || item.empty())
            throw CLI::ValidationError(flag, "malformed number: '" + item + "'");
        vals.push_back(v);
    }
    if (vals.empty()) throw CLI::ValidationError(flag, "empty list");
    return vals;
}

inline void write_opt_result(JsonWriter& w, const OptResult& r, bool with_w_free) {
    w.key("result").begin_object();
    w.kv("best_probability", r.best_probability);
    w.kv("residual_max", r.residual_max);
    w.kv("starts_converged", r.starts_converged);
    w.kv("evaluations", r.evaluations);
    w.kv("max_eval_probability", r.max_eval_probability);
    w.kv("best_start", r.best_start);
    w.key("config");
    write_hardy_config(w, r.config);
    if (with_w_free) {
        w.key("w_free").begin_array();
        for (const Vec2& v : r.w_free) {
            w.begin_array().value(v.x).value(v.y).end_array();
        }
        w.end_array();
    }
    w.end_object();
}

} // namespace detail

// Entry point behind the binary; also called in-process by tests.
inline int run(std::vector<std::string> args) {
    using namespace detail;

    CLI::App app{"Hardy violation toolkit for W and GHZ states"};
    app.require_subcommand(1);

    // ---- optimize ----
    auto* optimize = app.add_subcommand(
        "optimize", "Maximize the Hardy violation probability for one state");
    CommonOpts opt_common;
    OptOptions opt_opts;
    std::string family;
    std::string amplitudes_csv;
    int opt_n = 0;
    optimize->add_option("--family", family, "State family: w | ghz")->required();
    optimize->add_option("--amplitudes", amplitudes_csv,
                         "Comma-separated W amplitudes (family w)");
    optimize->add_option("-n,--qubits", opt_n,
                         "Qubit count (required for ghz; uniform amplitudes for w)");
    add_common(optimize, opt_common);
    add_optimizer(optimize, opt_opts);

    // ---- table ----
    auto* table = app.add_subcommand(
        "table", "Perfect-W violation probabilities for a range of N (CSV)");
    CommonOpts table_common;
    OptOptions table_opts;
    int n_min = 3, n_max = 10;
    table->add_option("--n-min", n_min, "Smallest qubit count")->required();
    table->add_option("--n-max", n_max, "Largest qubit count")->required();
    add_common(table, table_common);
    add_optimizer(table, table_opts);

    // ---- scan ----
    auto* scan = app.add_subcommand(
        "scan", "Optimized violation over the 3-qubit amplitude sphere (CSV)");
    CommonOpts scan_common;
    OptOptions scan_opts;
    AmplitudeGridSpec grid;
    scan->add_option("--resolution", grid.resolution, "Grid points per axis");
    scan->add_option("--margin", grid.margin, "Radians trimmed at the axis ends");
    add_common(scan, scan_common);
    add_optimizer(scan, scan_opts);

    // ---- verify-bound ----
    auto* verify = app.add_subcommand(
        "verify-bound", "Sample feasible N=3 configurations against the 1/9 bound");
    CommonOpts verify_common;
    std::uint64_t samples = 100000;
    verify->add_option("--samples", samples, "Number of feasible samples");
    add_common(verify, verify_common);

    // ---- asymptotic ----
    auto* asym = app.add_subcommand(
        "asymptotic", "Closed-form scalar construction for large N (CSV)");
    CommonOpts asym_common;
    std::string n_list = "3,10,100,1000";
    asym->add_option("--n-list", n_list, "Comma-separated qubit counts");
    add_common(asym, asym_common);

    // ---- lhv-check ----
    auto* lhv = app.add_subcommand(
        "lhv-check", "Enumerate deterministic local strategies");
    CommonOpts lhv_common;
    int lhv_n = 3;
    bool drop_last = false;
    lhv->add_option("-n,--qubits", lhv_n, "Qubit count")->required();
    lhv->add_flag("--drop-last-constraint", drop_last,
                  "Diagnostic: ignore the all-D constraint");
    add_common(lhv, lhv_common);

    // ---- oracle-check ----
    auto* oracle = app.add_subcommand(
        "oracle-check", "Compare the closed-form probability against the oracle");
    CommonOpts oracle_common;
    std::uint64_t cases = 1000;
    oracle->add_option("--cases", cases, "Random instances");
    add_common(oracle, oracle_common);

    // ---- compare ----
    auto* compare = app.add_subcommand(
        "compare", "W vs GHZ optimized violation probabilities (CSV)");
    CommonOpts compare_common;
    OptOptions compare_opts;
    int cmp_min = 3, cmp_max = 8;
    compare->add_option("--n-min", cmp_min, "Smallest qubit count")->required();
    compare->add_option("--n-max", cmp_max, "Largest qubit count")->required();
    add_common(compare, compare_common);
    add_optimizer(compare, compare_opts);

    try {
        std::reverse(args.begin(), args.end()); // CLI11 consumes a reversed vector
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return exit_usage;
    }

    auto capture = [](std::initializer_list<std::pair<std::string, std::string>> kv) {
        return std::map<std::string, std::string>(kv.begin(), kv.end());
    };

    try {
        if (optimize->parsed()) {
            opt_opts.seed = opt_common.seed;
            opt_opts.threads = opt_common.threads;
            Manifest m;
            m.command = "optimize";
            m.seed = opt_common.seed;
            m.started_at = utc_timestamp();
            OptResult res;
            bool w_family = false;
            if (family == "w") {
                w_family = true;
                Amplitudes a =
                    amplitudes_csv.empty()
                        ? Amplitudes::uniform(opt_n)
                        : Amplitudes(parse_number_list(amplitudes_csv, "--amplitudes"));
                m.options = capture({{"family", "w"},
                                     {"amplitudes", amplitudes_csv.empty()
                                                        ? "uniform(" + std::to_string(opt_n) + ")"
                                                        : amplitudes_csv},
                                     {"starts", std::to_string(opt_opts.starts)}});
                res = maximize_w_violation(a, opt_opts);
            } else if (family == "ghz") {
                if (opt_n < 2) throw validation_error("optimize --family ghz needs -n");
                m.options = capture({{"family", "ghz"},
                                     {"n", std::to_string(opt_n)},
                                     {"starts", std::to_string(opt_opts.starts)}});
                res = maximize_generic(build_ghz_state(opt_n), opt_opts);
            } else {
                std::cerr << "unknown --family: " << family << "\n";
                return exit_usage;
            }
            m.finished_at = utc_timestamp();
            JsonWriter w;
            w.begin_object();
            m.write(w);
            write_opt_result(w, res, w_family);
            w.end_object();
            emit(opt_common, std::move(w).str() + "\n");
            return exit_ok;
        }

        if (table->parsed()) {
            table_opts.seed = table_common.seed;
            table_opts.threads = table_common.threads;
            const auto rows = perfect_w_table(n_min, n_max, table_opts);
            CsvWriter csv({"n", "probability"});
            for (const auto& [n, p] : rows) csv.row(n, p);
            emit(table_common, csv.str());
            return exit_ok;
        }

        if (scan->parsed()) {
            scan_opts.seed = scan_common.seed;
            scan_opts.threads = scan_common.threads;
            const ScanResult res = scan_amplitudes(grid, scan_opts);
            CsvWriter csv({"alpha", "beta", "probability"});
            for (const ScanCell& cell : res.cells) {
                if (cell.ok)
                    csv.row(cell.alpha, cell.beta, cell.probability);
                else
                    csv.row(cell.alpha, cell.beta, std::string("nan"));
            }
            emit(scan_common, csv.str());
            return exit_ok;
        }

        if (verify->parsed()) {
            Manifest m;
            m.command = "verify-bound";
            m.seed = verify_common.seed;
            m.options = capture({{"samples", std::to_string(samples)}});
            m.started_at = utc_timestamp();
            const BoundReport rep =
                sample_feasible_bound_check(samples, verify_common.seed,
                                            verify_common.threads);
            m.finished_at = utc_timestamp();
            const bool ok = rep.violations_of_ninth == 0 &&
                            rep.max_probability_seen <= 1.0 / 9.0 + 1e-9 &&
                            rep.max_pairwise_dot_sum <= 1e-12;
            JsonWriter w;
            w.begin_object();
            m.write(w);
            w.key("report").begin_object();
            w.kv("samples", rep.samples);
            w.kv("max_probability_seen", rep.max_probability_seen);
            w.kv("violations_of_ninth", rep.violations_of_ninth);
            w.kv("max_pairwise_dot_sum", rep.max_pairwise_dot_sum);
            w.kv("bound_holds", ok);
            w.end_object();
            w.end_object();
            emit(verify_common, std::move(w).str() + "\n");
            return ok ? exit_ok : exit_failure;
        }

        if (asym->parsed()) {
            std::vector<std::int64_t> ns;
            for (double v : parse_number_list(n_list, "--n-list"))
                ns.push_back(static_cast<std::int64_t>(v));
            const auto entries = asymptotic_scaling_check(ns);
            CsvWriter csv({"n", "probability", "n_times_p"});
            for (const auto& e : entries)
                csv.row(static_cast<int>(e.n), e.probability, e.n_times_p);
            emit(asym_common, csv.str());
            return exit_ok;
        }

        if (lhv->parsed()) {
            Manifest m;
            m.command = "lhv-check";
            m.seed = lhv_common.seed;
            m.options = capture({{"n", std::to_string(lhv_n)},
                                 {"drop_last_constraint", drop_last ? "true" : "false"}});
            m.started_at = utc_timestamp();
            const LhvReport rep = lhv_paradox_check(lhv_n, drop_last);
            m.finished_at = utc_timestamp();
            JsonWriter w;
            w.begin_object();
            m.write(w);
            w.key("report").begin_object();
            w.kv("n", rep.n);
            w.kv("strategies_total", rep.strategies_total);
            w.kv("strategies_satisfying_constraints",
                 rep.strategies_satisfying_constraints);
            w.kv("max_target_probability", rep.max_target_probability);
            w.kv("paradox_confirmed", rep.paradox_confirmed);
            w.end_object();
            w.end_object();
            emit(lhv_common, std::move(w).str() + "\n");
            if (drop_last) return exit_ok; // diagnostic asks a different question
            return rep.paradox_confirmed ? exit_ok : exit_failure;
        }

        if (oracle->parsed()) {
            Manifest m;
            m.command = "oracle-check";
            m.seed = oracle_common.seed;
            m.options = capture({{"cases", std::to_string(cases)}});
            m.started_at = utc_timestamp();
            double max_diff = 0.0, max_diff_quadratic = 0.0;
            for (std::uint64_t c = 0; c < cases; ++c) {
                Rng rng(oracle_common.seed, c);
                const int n = 2 + static_cast<int>(rng.below(7)); // N in 2..8
                std::vector<double> raw(n);
                double s2 = 0.0;
                for (double& v : raw) {
                    v = rng.uniform(0.1, 1.0);
                    s2 += v * v;
                }
                for (double& v : raw) v /= std::sqrt(s2);
                const Amplitudes a{std::move(raw)};
                std::vector<MeasurementSetting> settings(n);
                std::vector<Vec2> t(n);
                for (int i = 0; i < n; ++i) {
                    settings[i] = {rng.uniform(0.0, half_pi - 0.05),
                                   rng.uniform(0.0, two_pi)};
                    t[i] = finite_xy(rep_vector(settings[i])) * a[i];
                }
                const std::vector<Outcome> plus(n, Outcome::plus);
                const StateVector psi = build_w_state(a);
                const double p_geo = geo_joint_probability(a, t);
                const double p_sv = joint_probability_statevector(psi, settings, plus);
                max_diff = std::max(max_diff, std::abs(p_geo - p_sv));
                if (n == 3) {
                    const double p_q = quadratic_form_probability(a, settings, plus);
                    max_diff_quadratic =
                        std::max(max_diff_quadratic, std::abs(p_q - p_sv));
                }
            }
            m.finished_at = utc_timestamp();
            const bool ok = max_diff <= 1e-10 && max_diff_quadratic <= 1e-10;
            JsonWriter w;
            w.begin_object();
            m.write(w);
            w.key("report").begin_object();
            w.kv("cases", cases);
            w.kv("max_abs_diff", max_diff);
            w.kv("max_abs_diff_quadratic", max_diff_quadratic);
            w.kv("threshold", 1e-10);
            w.kv("pass", ok);
            w.end_object();
            w.end_object();
            emit(oracle_common, std::move(w).str() + "\n");
            return ok ? exit_ok : exit_failure;
        }

        if (compare->parsed()) {
            compare_opts.seed = compare_common.seed;
            compare_opts.threads = compare_common.threads;
            const auto rows = ghz_w_comparison(cmp_min, cmp_max, compare_opts);
            CsvWriter csv({"n", "p_w", "p_ghz"});
            for (const ComparisonRow& r : rows) csv.row(r.n, r.p_w, r.p_ghz);
            emit(compare_common, csv.str());
            return exit_ok;
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        JsonWriter w;
        w.begin_object();
        w.kv("error", e.what());
        w.end_object();
        std::cerr << w.str() << "\n";
        return exit_failure;
    }

    std::cerr << "no subcommand given\n";
    return exit_usage;
}

inline int run_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace hardyw::cli
