// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each. Runs everything by default; `--criterion N` runs a single one.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardyw/analysis.hpp"
#include "hardyw/cli.hpp"
#include "hardyw/lhv.hpp"
#include "hardyw/optimize.hpp"

using namespace hardyw;
using nlohmann::json;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string tmp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("hardyw_acc_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json run_cli_json(std::vector<std::string> args, const std::string& tag) {
    const std::string path = tmp_file(tag + ".json");
    args.insert(args.end(), {"--output", path});
    if (cli::run(args) > 1) throw std::runtime_error("cli usage error in acceptance");
    return json::parse(slurp(path));
}

std::string run_cli_raw(std::vector<std::string> args, const std::string& tag) {
    const std::string path = tmp_file(tag);
    args.insert(args.end(), {"--output", path});
    if (cli::run(args) > 1) throw std::runtime_error("cli usage error in acceptance");
    return slurp(path);
}

std::string strip_timestamps(std::string s) {
    for (const char* key : {"\"started_at\":\"", "\"finished_at\":\""}) {
        const auto pos = s.find(key);
        if (pos == std::string::npos) continue;
        const auto start = pos + std::string(key).size();
        const auto end = s.find('"', start);
        s.replace(start, end - start, "T");
    }
    return s;
}

std::vector<double> csv_column(const std::string& csv, int col) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line); // header
    while (std::getline(ss, line)) {
        std::stringstream ls(line);
        std::string field;
        for (int c = 0; c <= col; ++c) std::getline(ls, field, ',');
        out.push_back(std::stod(field));
    }
    return out;
}

int flood_components(const std::vector<bool>& mask, int r, bool diag) {
    std::vector<int> label(mask.size(), 0);
    int components = 0;
    std::vector<int> stack;
    for (int start = 0; start < static_cast<int>(mask.size()); ++start) {
        if (!mask[start] || label[start]) continue;
        ++components;
        stack.push_back(start);
        label[start] = components;
        while (!stack.empty()) {
            const int cell = stack.back();
            stack.pop_back();
            const int i = cell / r, j = cell % r;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    if (!diag && di != 0 && dj != 0) continue;
                    const int ni = i + di, nj = j + dj;
                    if (ni < 0 || nj < 0 || ni >= r || nj >= r) continue;
                    const int nc = ni * r + nj;
                    if (mask[nc] && !label[nc]) {
                        label[nc] = components;
                        stack.push_back(nc);
                    }
                }
        }
    }
    return components;
}

char fmt_buf[256];
std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    std::snprintf(fmt_buf, sizeof fmt_buf, f, a, b, c);
    return fmt_buf;
}

// ---- criteria ----

Check criterion1() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const json j = run_cli_json({"oracle-check", "--cases", "1000", "--seed", "0"}, "c1");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const double diff = j.at("report").at("max_abs_diff").get<double>();
    const double diff_q = j.at("report").at("max_abs_diff_quadratic").get<double>();
    c.require(diff <= 1e-10, fmt("geo vs oracle diff %.3g > 1e-10", diff));
    c.require(diff_q <= 1e-10, fmt("quadratic-form diff %.3g > 1e-10", diff_q));
    c.require(sec < 10.0, fmt("runtime %.1f s >= 10 s", sec));
    c.note(fmt("max diff %.2g, quadratic %.2g", diff, diff_q) + fmt(", %.2f s", sec));
    return c;
}

Check criterion2() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const json j =
        run_cli_json({"optimize", "--family", "w", "-n", "3", "--seed", "0"}, "c2");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const double p = j.at("result").at("best_probability").get<double>();
    const double peak = j.at("result").at("max_eval_probability").get<double>();
    c.require(std::abs(p - 0.07186776197291751) <= 1e-4,
              fmt("W3 value %.9f off target", p));
    c.require(peak <= 1.0 / 9.0 + 1e-9,
              fmt("an evaluation reached %.12f > 1/9 + 1e-9", peak));
    c.require(sec < 30.0, fmt("runtime %.1f s >= 30 s", sec));
    c.note(fmt("p = %.10f, peak eval %.10f", p, peak) + fmt(", %.2f s", sec));
    return c;
}

Check criterion3() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const json j = run_cli_json({"optimize", "--family", "w", "--amplitudes",
                                 "0.448473,0.632011,0.632008", "--seed", "0"},
                                "c3");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const double p = j.at("result").at("best_probability").get<double>();
    c.require(std::abs(p - 0.0977381) <= 1e-4, fmt("value %.9f off 0.0977381", p));
    c.require(sec < 30.0, fmt("runtime %.1f s >= 30 s", sec));
    c.note(fmt("p = %.10f", p) + fmt(", %.2f s", sec));
    return c;
}

Check criterion4() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string csv =
        run_cli_raw({"table", "--n-min", "3", "--n-max", "10", "--seed", "0"}, "c4.csv");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const double paper[] = {0.07186776197291751, 0.09802431986561981,
                            0.1016666013383646,  0.0981781711941636,
                            0.09256920089757938, 0.08658662542877839,
                            0.08085438836971731, 0.07557767230678995};
    const std::vector<double> got = csv_column(csv, 1);
    c.require(got.size() == 8, "expected 8 rows");
    double worst = 0.0;
    for (int i = 0; i < 8 && i < static_cast<int>(got.size()); ++i) {
        worst = std::max(worst, std::abs(got[i] - paper[i]));
        c.require(std::abs(got[i] - paper[i]) <= 1e-3,
                  fmt("n=%.0f off by %.2g", 3.0 + i, std::abs(got[i] - paper[i])));
    }
    for (int i = 0; i + 1 < static_cast<int>(got.size()); ++i) {
        const bool rising = got[i + 1] > got[i];
        c.require(i < 2 ? rising : !rising, "sequence not unimodal with peak at N=5");
    }
    c.require(sec < 600.0, fmt("runtime %.1f s >= 600 s", sec));
    c.note(fmt("worst |diff| = %.2g", worst) + fmt(", %.2f s", sec));
    return c;
}

Check criterion5() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const json j =
        run_cli_json({"optimize", "--family", "ghz", "-n", "3", "--seed", "0"}, "c5");
    const double ghz3 = j.at("result").at("best_probability").get<double>();
    c.require(std::abs(ghz3 - 0.125) <= 1e-3, fmt("GHZ3 %.6f off 0.125", ghz3));
    const std::string csv = run_cli_raw(
        {"compare", "--n-min", "4", "--n-max", "6", "--seed", "0", "--starts", "24"},
        "c5.csv");
    const std::vector<double> pw = csv_column(csv, 1), pghz = csv_column(csv, 2);
    for (std::size_t i = 0; i < pw.size(); ++i)
        c.require(pghz[i] < pw[i],
                  fmt("n=%.0f: p_ghz %.6f !< p_w %.6f", 4.0 + i, pghz[i], pw[i]));
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    c.require(sec < 600.0, fmt("runtime %.1f s >= 600 s", sec));
    c.note(fmt("GHZ3 = %.6f", ghz3) + fmt(", %.1f s", sec));
    return c;
}

Check criterion6() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    // frozen independent evaluation of the construction at n=3: 432/6253
    const AsymptoticConfig c3 = asymptotic_config(3);
    c.require(std::abs(c3.entry.probability - 0.069086838317607549) <= 1e-15,
              "n=3 closed form drifted from 432/6253");
    const Amplitudes a = Amplitudes::uniform(3);
    const auto [cfg, sv] = hardy_config_from_w(a, c3.w_free());
    const std::vector<Outcome> plus(3, Outcome::plus);
    const double oracle =
        joint_probability_statevector(build_w_state(a), cfg.U, plus);
    c.require(std::abs(oracle - c3.entry.probability) <= 1e-10,
              fmt("oracle %.12g vs construction %.12g", oracle, c3.entry.probability));
    double prev = 0.0;
    for (const std::int64_t n : {100, 1000, 10000}) {
        const double np = asymptotic_config(n).entry.n_times_p;
        c.require(np >= 0.9 && np <= 1.0, fmt("n*P = %.4f outside [0.9, 1]", np));
        c.require(np > prev, "n*P not monotonically approaching 1");
        prev = np;
    }
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    c.require(sec < 1.0, fmt("runtime %.2f s >= 1 s", sec));
    c.note(fmt("P(3) = %.12f, n*P(10^4) = %.6f", c3.entry.probability, prev));
    return c;
}

Check criterion7() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const json j =
        run_cli_json({"verify-bound", "--samples", "100000", "--seed", "0"}, "c7");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const auto& r = j.at("report");
    c.require(r.at("violations_of_ninth").get<std::uint64_t>() == 0, "1/9 exceeded");
    c.require(r.at("max_probability_seen").get<double>() <= 1.0 / 9.0 + 1e-9,
              "max sampled probability above 1/9 + 1e-9");
    c.require(r.at("max_pairwise_dot_sum").get<double>() <= 1e-12,
              fmt("pairwise dot sum %.3g > 1e-12",
                  r.at("max_pairwise_dot_sum").get<double>()));
    c.require(sec < 60.0, fmt("runtime %.1f s >= 60 s", sec));
    c.note(fmt("max p %.6f, dot sum %.2g", r.at("max_probability_seen").get<double>(),
               r.at("max_pairwise_dot_sum").get<double>()) +
           fmt(", %.2f s", sec));
    return c;
}

Check criterion8() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 2; n <= 8; ++n) {
        const LhvReport rep = lhv_paradox_check(n);
        c.require(rep.paradox_confirmed && rep.max_target_probability == 0.0,
                  fmt("paradox not confirmed at n=%.0f", double(n)));
    }
    const LhvReport diag = lhv_paradox_check(3, true);
    c.require(diag.max_target_probability == 1.0,
              "diagnostic mode did not reach probability 1");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    c.require(sec < 60.0, fmt("runtime %.1f s >= 60 s", sec));
    c.note(fmt("n = 2..8 confirmed, diagnostic max = %.0f",
               diag.max_target_probability) +
           fmt(", %.2f s", sec));
    return c;
}

Check criterion9() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    // reduced starts are permitted for this criterion; 8 includes every
    // structured seed plus random ones
    const std::string csv =
        run_cli_raw({"scan", "--resolution", "64", "--margin", "0.01", "--starts",
                     "8", "--seed", "0"},
                    "c9.csv");
    const double sec = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - t0).count();
    const std::vector<double> p = csv_column(csv, 2);
    constexpr int r = 64;
    c.require(p.size() == r * r, "expected 4096 rows");

    double maxp = 0.0;
    for (double v : p) maxp = std::max(maxp, v);
    c.require(maxp >= 0.0977, fmt("grid max %.6f < 0.0977", maxp));

    double asym = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            asym = std::max(asym, std::abs(p[i * r + j] - p[i * r + (r - 1 - j)]));
    c.require(asym <= 2e-3, fmt("alpha-mirror asymmetry %.2g > 2e-3", asym));

    std::vector<bool> mask(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) mask[i] = p[i] >= 0.09;
    const int comp4 = flood_components(mask, r, false);
    const int comp8 = flood_components(mask, r, true);
    c.require(comp4 == 3, fmt("components at 0.09: %.0f (4-conn), %.0f (8-conn), "
                              "expected 3",
                              double(comp4), double(comp8)));
    // informational: the three ridges separate slightly higher
    for (const double t : {0.0965, 0.097}) {
        std::vector<bool> m(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) m[i] = p[i] >= t;
        c.note(fmt("threshold %.4f -> %.0f components (8-conn)", t,
                   double(flood_components(m, r, true))));
    }
    c.require(sec < 1800.0, fmt("runtime %.1f s >= 1800 s", sec));
    c.note(fmt("max %.6f, asym %.2g", maxp, asym) + fmt(", %.1f s", sec));
    return c;
}

Check criterion10() {
    Check c;
    struct Cmd {
        const char* name;
        std::vector<std::string> args;
        bool json;
    };
    const std::vector<Cmd> cmds{
        {"optimize-w3", {"optimize", "--family", "w", "-n", "3", "--seed", "0"}, true},
        {"optimize-vb",
         {"optimize", "--family", "w", "--amplitudes", "0.448473,0.632011,0.632008",
          "--seed", "0"},
         true},
        {"table", {"table", "--n-min", "3", "--n-max", "10", "--seed", "0"}, false},
        {"verify-bound", {"verify-bound", "--samples", "100000", "--seed", "0"}, true},
        {"lhv", {"lhv-check", "-n", "8"}, true},
        {"scan",
         {"scan", "--resolution", "64", "--margin", "0.01", "--starts", "8", "--seed",
          "0"},
         false},
    };
    for (const Cmd& cmd : cmds) {
        std::vector<std::string> payloads;
        int variant = 0;
        for (const char* threads : {"1", "1", "4"}) {
            auto args = cmd.args;
            args.insert(args.end(), {"--threads", threads});
            payloads.push_back(run_cli_raw(
                args, std::string("c10_") + cmd.name + std::to_string(variant++)));
        }
        for (auto& s : payloads)
            if (cmd.json) s = strip_timestamps(s);
        c.require(payloads[0] == payloads[1],
                  std::string(cmd.name) + ": repeated run differs");
        c.require(payloads[0] == payloads[2],
                  std::string(cmd.name) + ": thread count changes payload");
    }
    c.note("six commands, rerun and threads 1 vs 4, byte-compared");
    return c;
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc == 3 && std::string(argv[1]) == "--criterion") only = std::atoi(argv[2]);

    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"oracle equivalence (1000 instances, N=2..8, quadratic path)", criterion1},
        {"perfect W3 value and 1/9 bound respect", criterion2},
        {"generalized W3 value 0.0977381", criterion3},
        {"N-table 3..10 within 1e-3, unimodal peak at N=5", criterion4},
        {"GHZ3 = 0.125 and P_GHZ < P_W for N=4..6", criterion5},
        {"closed-form construction: n*P -> 1, n=3 value via oracle", criterion6},
        {"10^5 feasible samples: 1/9 bound and dot-sum clause", criterion7},
        {"LHV paradox n=2..8 plus diagnostic mode", criterion8},
        {"64x64 amplitude scan: max, mirror symmetry, components", criterion9},
        {"byte-identical payloads across reruns and thread counts", criterion10},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int num = static_cast<int>(i) + 1;
        if (only != 0 && only != num) continue;
        Check result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        std::printf("criterion %2d: %s — %s (%s)\n", num,
                    result.ok ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    result.detail.c_str());
        std::fflush(stdout);
        if (!result.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
