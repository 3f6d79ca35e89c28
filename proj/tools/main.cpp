#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dephasim/core.hpp"
#include "dephasim/densesim.hpp"
#include "dephasim/format.hpp"
#include "dephasim/protocol.hpp"
#include "dephasim/purify_map.hpp"
#include "dephasim/rates.hpp"
#include "dephasim/verify.hpp"

namespace {

using dephasim::fmt_double;
using nlohmann::json;

// ---- parameter parsing -----------------------------------------------------

// "start:stop:step" (inclusive stop when reachable within 1e-12) or a single
// value.
std::vector<double> parse_range(const std::string& text) {
    std::vector<double> parts;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const auto colon = text.find(':', begin);
        const std::string piece = text.substr(begin, colon - begin);
        try {
            parts.push_back(std::stod(piece));
        } catch (const std::exception&) {
            throw CLI::ValidationError("could not parse '" + piece + "' as a number");
        }
        if (colon == std::string::npos)
            break;
        begin = colon + 1;
    }
    if (parts.size() == 1)
        return parts;
    if (parts.size() != 3)
        throw CLI::ValidationError("range must be a single value or start:stop:step");
    const double start = parts[0], stop = parts[1], step = parts[2];
    if (step <= 0.0 || stop < start)
        throw CLI::ValidationError("range needs step > 0 and stop >= start");
    std::vector<double> out;
    for (double x = start; x <= stop + 1e-12; x += step)
        out.push_back(std::min(x, stop));
    return out;
}

// Comma list of integers, each item possibly an a:b or a:b:step range.
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        const auto comma = text.find(',', begin);
        const std::string piece = text.substr(begin, comma - begin);
        const auto colon = piece.find(':');
        if (colon == std::string::npos) {
            out.push_back(std::stoi(piece));
        } else {
            const auto colon2 = piece.find(':', colon + 1);
            const int a = std::stoi(piece.substr(0, colon));
            const int b = std::stoi(piece.substr(colon + 1, colon2 - colon - 1));
            const int step = colon2 == std::string::npos
                                 ? 1
                                 : std::stoi(piece.substr(colon2 + 1));
            if (step <= 0 || b < a)
                throw CLI::ValidationError("integer range needs step > 0 and stop >= start");
            for (int v = a; v <= b; v += step)
                out.push_back(v);
        }
        if (comma == std::string::npos)
            break;
        begin = comma + 1;
    }
    if (out.empty())
        throw CLI::ValidationError("empty integer list");
    return out;
}

// ---- output ---------------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows;
};

std::string cell_csv(const json& v) {
    if (v.is_null())
        return "";
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_float())
        return fmt_double(v.get<double>());
    return v.dump();
}

std::string render_csv(const Table& t) {
    std::string out = std::string(dephasim::kCsvSchemaHeader) + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        out += (c ? "," : "") + t.columns[c];
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out += (c ? "," : "") + cell_csv(row[c]);
        out += '\n';
    }
    return out;
}

std::string render_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < row.size(); ++c)
            obj[t.columns[c]] = row[c];
        rows.push_back(obj);
    }
    return json{{"schema", "dephasim-schema v1"}, {"rows", rows}}.dump(2) + "\n";
}

std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("DEPHASIM_OUT_DIR"))
            p = std::filesystem::path(dir) / p;
    }
    return p;
}

// Full content is rendered before anything touches the filesystem, then
// written to a temporary and renamed, so failures never leave partial files.
void emit(const Table& t, const std::string& out_path, const std::string& format) {
    const std::string content = format == "json" ? render_json(t) : render_csv(t);
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    const auto target = resolve_output(out_path);
    const auto tmp = target.string() + ".tmp";
    try {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open " + tmp + " for writing");
        f << content;
        f.close();
        if (!f)
            throw std::runtime_error("write to " + tmp + " failed");
        std::filesystem::rename(tmp, target);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

// Deterministic worker pool: job i writes slot i, output order never
// depends on scheduling.
template <typename Fn>
std::vector<std::vector<json>> parallel_rows(std::size_t jobs, Fn&& fn) {
    std::vector<std::vector<std::vector<json>>> slots(jobs);
    std::atomic<std::size_t> next{0};
    const unsigned workers =
        std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                        static_cast<unsigned>(jobs)));
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) {
                try {
                    slots[i] = fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
    std::vector<std::vector<json>> rows;
    for (auto& slot : slots)
        for (auto& row : slot)
            rows.push_back(std::move(row));
    return rows;
}

// ---- subcommands ------------------------------------------------------------

int run_capacity(const std::string& p_range, const std::string& segments,
                 const std::string& out, const std::string& format) {
    const auto ps = parse_range(p_range);
    const auto segs = parse_int_list(segments);
    Table t;
    t.columns = {"p", "segments", "p_segment", "capacity"};
    t.rows = parallel_rows(ps.size(), [&](std::size_t i) {
        std::vector<std::vector<json>> rows;
        for (int n : segs) {
            const double pe = dephasim::core::node_dephasing(ps[i], n);
            rows.push_back({ps[i], n, pe, dephasim::core::capacity(pe)});
        }
        return rows;
    });
    emit(t, out, format);
    return 0;
}

int run_round1(const std::string& p_range, const std::string& m_list, const std::string& mode,
               const std::string& out, const std::string& format) {
    const auto ps = parse_range(p_range);
    const auto ms = parse_int_list(m_list);
    for (int m : ms) {
        if (mode == "dense" && m > 6)
            throw CLI::ValidationError("dense mode supports at most 6 pairs, got m=" +
                                       std::to_string(m));
        if (mode == "enumerate" && m > 20)
            throw CLI::ValidationError("enumerate mode supports at most 2^20 patterns");
    }

    Table t;
    t.columns = {"p", "m", "rci1", "lower_bound", "capacity"};
    std::vector<std::pair<double, int>> points;
    for (double p : ps)
        for (int m : ms)
            points.emplace_back(p, m);

    t.rows = parallel_rows(points.size(), [&](std::size_t i) {
        const auto [p, m] = points[i];
        const dephasim::DephasingParams params{p, m, 1};
        double rci = 0.0;
        if (mode == "closed-form") {
            rci = dephasim::rates::rci_round1(params).average_rci;
        } else if (mode == "enumerate") {
            const auto r1 = dephasim::protocol::enumerate_round1(params);
            double weighted = 0.0;
            for (const auto* b : {&r1.success, &r1.failure})
                if (b->probability > 0.0)
                    weighted +=
                        b->probability * dephasim::rates::entropy_of_spectrum(b->spectrum);
            rci = (m - 1 - weighted) / m;
        } else {  // dense
            auto state = dephasim::densesim::prepare_and_dephase(m, p);
            state = dephasim::densesim::apply_circuit(state,
                                                      dephasim::densesim::round1_circuit(m));
            const auto pooled = dephasim::densesim::pool_x_outcomes(
                dephasim::densesim::measure_pair_x(state, m - 1));
            double weighted = 0.0;
            for (const auto* b : {&pooled.success, &pooled.failure})
                if (b->probability > 0.0)
                    weighted += b->probability * b->post_state.entropy();
            rci = (m - 1 - weighted) / m;
        }
        const auto [lower, cap] = dephasim::rates::rci_bound(params, 1);
        return std::vector<std::vector<json>>{{p, m, rci, lower, cap}};
    });
    emit(t, out, format);
    return 0;
}

int run_round2(const std::string& p_range, const std::string& m_list, const std::string& out,
               const std::string& format) {
    const auto ps = parse_range(p_range);
    const auto ms = parse_int_list(m_list);
    Table t;
    t.columns = {"p", "m", "rci2", "lower_bound", "capacity", "method"};
    std::vector<std::pair<double, int>> points;
    for (double p : ps)
        for (int m : ms)
            points.emplace_back(p, m);

    t.rows = parallel_rows(points.size(), [&](std::size_t i) {
        const auto [p, m] = points[i];
        const dephasim::DephasingParams params{p, m, 2};
        const auto [lower, cap] = dephasim::rates::rci_bound(params, 2);
        // Beyond the exact-multiplicity reach the lower bound stands in,
        // matching how large-m curves are usually drawn.
        if (m > 8)
            return std::vector<std::vector<json>>{{p, m, lower, lower, cap, "bound"}};
        const double rci = dephasim::rates::rci_round2(params).average_rci;
        return std::vector<std::vector<json>>{{p, m, rci, lower, cap, "exact"}};
    });
    emit(t, out, format);
    return 0;
}

int run_fidelity(double p, int m, int rounds, const std::string& mode, std::uint64_t seed,
                 bool seed_given, std::int64_t samples, const std::string& out,
                 const std::string& format) {
    const dephasim::DephasingParams params{p, m, rounds};
    params.validate();
    const double feasible_bits = std::pow(static_cast<double>(m), rounds);
    if (mode == "enumerate" && feasible_bits > 24.0)
        throw CLI::ValidationError(
            "exhaustive enumeration needs m^rounds <= 24 (got " +
            std::to_string(static_cast<long long>(feasible_bits)) +
            " pairs); rerun with --mode montecarlo --seed <N>");
    if (mode == "montecarlo" && !seed_given)
        throw CLI::ValidationError("montecarlo mode requires an explicit --seed");

    const auto trace = dephasim::purify_map::iterate_map(p, m, rounds);

    Table t;
    t.columns = {"round", "f_alternative", "f_original", "f_original_stderr"};
    t.rows.push_back({0, 1.0 - p, 1.0 - p, json()});
    if (mode == "enumerate") {
        const auto lineage = dephasim::protocol::enumerate_rounds(params, rounds);
        for (int r = 1; r <= rounds; ++r)
            t.rows.push_back(
                {r, trace.fidelity_sequence[r], lineage[r - 1].fidelity, json()});
    } else {
        const auto mc = dephasim::protocol::monte_carlo_rounds(params, rounds, samples, seed);
        for (int r = 1; r <= rounds; ++r)
            t.rows.push_back({r, trace.fidelity_sequence[r], mc.rounds[r - 1].fidelity.value,
                              mc.rounds[r - 1].fidelity.std_error});
    }
    emit(t, out, format);
    return 0;
}

int run_compare_alt(const std::string& p_range, const std::string& m_list, int round,
                    const std::string& out, const std::string& format) {
    if (round != 1 && round != 2)
        throw CLI::ValidationError("--round must be 1 or 2");
    const auto ps = parse_range(p_range);
    const auto ms = parse_int_list(m_list);
    Table t;
    t.columns = {"p", "m", "round", "rci_alternative", "rci_actual", "difference"};
    std::vector<std::pair<double, int>> points;
    for (double p : ps)
        for (int m : ms)
            points.emplace_back(p, m);
    t.rows = parallel_rows(points.size(), [&](std::size_t i) {
        const auto [p, m] = points[i];
        const auto cmp =
            dephasim::rates::alternative_vs_actual_rci({p, m, round}, round);
        return std::vector<std::vector<json>>{
            {p, m, round, cmp.alternative_rci, cmp.actual_rci, cmp.difference}};
    });
    emit(t, out, format);
    return 0;
}

int run_map(const std::string& p_range, const std::string& m_list, int rounds,
            const std::string& out, const std::string& format) {
    const auto ps = parse_range(p_range);
    const auto ms = parse_int_list(m_list);
    Table t;
    t.columns = {"p0", "m", "round", "p", "fidelity"};
    for (double p0 : ps) {
        for (int m : ms) {
            const auto trace = dephasim::purify_map::iterate_map(p0, m, rounds);
            for (std::size_t r = 0; r < trace.p_sequence.size(); ++r)
                t.rows.push_back({p0, m, static_cast<int>(r), trace.p_sequence[r],
                                  trace.fidelity_sequence[r]});
        }
    }
    emit(t, out, format);
    return 0;
}

int run_bsm_check(const std::string& p_range, const std::string& out,
                  const std::string& format) {
    const auto ps = parse_range(p_range);
    Table t;
    t.columns = {"p", "branch", "probability", "off_diagonal", "average_rci", "capacity"};
    for (double p : ps) {
        const auto result = dephasim::densesim::bsm_swap(p);
        for (const auto& b : result.branches) {
            const auto& rho = b.post_state.rho;
            const double off = std::max(std::abs(rho(0, 3)), std::abs(rho(1, 2)));
            t.rows.push_back({p, b.outcome, b.probability, off, result.average_rci,
                              dephasim::core::capacity(p)});
        }
    }
    emit(t, out, format);
    return 0;
}

int run_verify(const std::string& grid, std::uint64_t seed, std::int64_t samples,
               const std::string& report_path) {
    if (grid != "default")
        throw CLI::ValidationError("only --grid default is available");
    dephasim::verify::Options options;
    options.mc_seed = seed;
    options.mc_samples = samples;
    const auto results = dephasim::verify::run_all_checks(options);

    int failures = 0;
    json report = json::array();
    for (const auto& r : results) {
        if (r.passed) {
            std::printf("PASS  %-32s (%.1f ms)\n", r.name.c_str(), r.elapsed_ms);
        } else {
            ++failures;
            std::printf("FAIL  %-32s (%.1f ms): %s\n", r.name.c_str(), r.elapsed_ms,
                        r.detail.c_str());
        }
        report.push_back({{"name", r.name},
                          {"passed", r.passed},
                          {"detail", r.detail},
                          {"elapsed_ms", r.elapsed_ms}});
    }
    std::printf("%zu checks, %d failed\n", results.size(), failures);
    if (!report_path.empty()) {
        const auto target = resolve_output(report_path);
        const auto tmp = target.string() + ".tmp";
        try {
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f << report.dump(2) << "\n";
            f.close();
            std::filesystem::rename(tmp, target);
        } catch (...) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "dephasim: simulator and rate calculator for recursive two-way entanglement "
        "purification over the dephasing channel"};
    app.require_subcommand(1);

    std::string p_range = "0.1", m_list = "3", segments = "1", mode, out, format = "csv";
    std::string grid = "default", report;
    double p_single = 0.1;
    int m_single = 3, rounds = 3, round = 1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::int64_t samples = 1000000;

    auto add_output = [&](CLI::App* cmd) {
        cmd->add_option("--out", out,
                        "output file (default stdout; relative paths resolve under "
                        "$DEPHASIM_OUT_DIR)");
        cmd->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    auto* c_cap = app.add_subcommand("capacity", "channel capacity and repeater curves");
    c_cap->add_option("--p", p_range, "dephasing probability (value or start:stop:step)");
    c_cap->add_option("--segments", segments, "channel segment counts, comma list");
    add_output(c_cap);

    auto* c_r1 = app.add_subcommand("round1", "average RCI per channel use after round 1");
    c_r1->add_option("--p", p_range, "dephasing probability (value or range)");
    c_r1->add_option("--m", m_list, "Bell pairs per block, comma list or a:b[:step]");
    c_r1->add_option("--mode", mode, "closed-form (default), dense, or enumerate")
        ->check(CLI::IsMember({"closed-form", "dense", "enumerate"}));
    add_output(c_r1);

    auto* c_r2 = app.add_subcommand("round2", "average RCI per channel use after round 2");
    c_r2->add_option("--p", p_range, "dephasing probability (value or range)");
    c_r2->add_option("--m", m_list, "Bell pairs per block, comma list or a:b[:step]");
    add_output(c_r2);

    auto* c_fid = app.add_subcommand("fidelity", "fidelity ladders of both protocols");
    c_fid->add_option("--p", p_single, "dephasing probability");
    c_fid->add_option("--m", m_single, "Bell pairs per block");
    c_fid->add_option("--rounds", rounds, "purification rounds");
    c_fid->add_option("--mode", mode, "enumerate (default) or montecarlo")
        ->check(CLI::IsMember({"enumerate", "montecarlo"}));
    c_fid->add_option("--seed", seed, "Monte Carlo seed (required for montecarlo)")
        ->each([&](const std::string&) { seed_given = true; });
    c_fid->add_option("--samples", samples, "Monte Carlo sample count");
    add_output(c_fid);

    auto* c_cmp = app.add_subcommand("compare-alt",
                                     "reduced-state protocol RCI vs the actual branch RCI");
    c_cmp->add_option("--p", p_range, "dephasing probability (value or range)");
    c_cmp->add_option("--m", m_list, "Bell pairs per block, comma list");
    c_cmp->add_option("--round", round, "1 or 2");
    add_output(c_cmp);

    auto* c_map = app.add_subcommand("map", "iterative dephasing-map traces");
    c_map->add_option("--p", p_range, "initial dephasing probability (value or range)");
    c_map->add_option("--m", m_list, "Bell pairs per block, comma list or a:b[:step]");
    c_map->add_option("--rounds", rounds, "rounds to iterate");
    add_output(c_map);

    auto* c_bsm = app.add_subcommand("bsm-check", "mid-point swap branch states and RCI");
    c_bsm->add_option("--p", p_range, "dephasing probability (value or range)");
    add_output(c_bsm);

    auto* c_ver = app.add_subcommand("verify", "run every cross-check suite");
    c_ver->add_option("--grid", grid, "check grid (only 'default')");
    c_ver->add_option("--seed", seed, "Monte Carlo consistency seed")->capture_default_str();
    c_ver->add_option("--samples", samples, "Monte Carlo consistency samples")
        ->capture_default_str();
    c_ver->add_option("--report", report, "write a JSON report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_cap->parsed())
            return run_capacity(p_range, segments, out, format);
        if (c_r1->parsed())
            return run_round1(p_range, m_list, mode.empty() ? "closed-form" : mode, out,
                              format);
        if (c_r2->parsed())
            return run_round2(p_range, m_list, out, format);
        if (c_fid->parsed())
            return run_fidelity(p_single, m_single, rounds,
                                mode.empty() ? "enumerate" : mode, seed, seed_given, samples,
                                out, format);
        if (c_cmp->parsed())
            return run_compare_alt(p_range, m_list, round, out, format);
        if (c_map->parsed())
            return run_map(p_range, m_list, rounds, out, format);
        if (c_bsm->parsed())
            return run_bsm_check(p_range, out, format);
        if (c_ver->parsed())
            return run_verify(grid, seed == 0 ? 987654321 : seed, samples, report);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
