// flowforge: passive traffic measurement with configurable per-flow features.
//
// One binary, five subcommands:
//   run         live capture on an interface
//   replay      deterministic pcap replay
//   profile     per-feature-class cost report (state / processing / storage)
//   bench-cache flow-cache insert/update microbenchmark
//   report      render a profile report as a table or SVG plots, or diff two
//
// stdout carries exactly one JSON document per invocation; everything meant
// for humans goes to stderr. Exit codes: 0 ok, 1 runtime error, 2 config or
// usage error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowforge/bench.hpp"
#include "flowforge/capture.hpp"
#include "flowforge/config.hpp"
#include "flowforge/log.hpp"
#include "flowforge/pipeline.hpp"
#include "flowforge/profiler.hpp"
#include "flowforge/report.hpp"

namespace {

using namespace flowforge;

std::atomic<bool> g_stop{false};

void arm_stop_signals() {
    std::signal(SIGINT, [](int) { g_stop.store(true); });
    std::signal(SIGTERM, [](int) { g_stop.store(true); });
}

// Comma-separated feature specs, where commas inside parentheses belong to
// the spec itself: "PngCopy(28,28),PacketCounters" is two entries.
std::vector<std::string> split_classes(const std::string& list) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    auto flush = [&] {
        const size_t b = cur.find_first_not_of(" \t");
        const size_t e = cur.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? std::string() : cur.substr(b, e - b + 1));
        cur.clear();
    };
    for (char c : list) {
        if (c == ',' && depth == 0) {
            flush();
            continue;
        }
        if (c == '(') {
            ++depth;
        } else if (c == ')' && depth > 0) {
            --depth;
        }
        cur += c;
    }
    flush();
    return out;
}

nlohmann::json cache_json(const CacheStats& s) {
    return nlohmann::json{
        {"current_size", s.current_size}, {"inserts", s.inserts},
        {"updates", s.updates},           {"evictions", s.evictions},
        {"rejected_full", s.rejected_full},
    };
}

nlohmann::json pipeline_json(const char* command, const RuntimeConfig& cfg,
                             const PipelineResult& result) {
    return nlohmann::json{
        {"command", command},
        {"config_hash", cfg.hash_hex()},
        {"counters", result.counters.to_json()},
        {"cache", cache_json(result.cache)},
        {"output_files", result.output_files},
        {"wall_ns", result.wall_ns},
        {"packets_per_s", result.packets_per_s},
    };
}

void print_result(const nlohmann::json& j) {
    std::cout << j.dump(2) << "\n";
}

// The effective output directory: explicit flag first, then the config.
std::string pick_out_dir(const std::string& flag, const std::string& from_config) {
    if (!flag.empty()) {
        return flag;
    }
    return from_config.empty() ? std::string("out") : from_config;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) {
        throw std::runtime_error("cannot open " + path);
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + " is not valid JSON: " + e.what());
    }
    return j;
}

std::string write_text_file(const std::string& dir, const std::string& name,
                            const std::string& body) {
    std::filesystem::create_directories(dir);
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out.good()) {
        throw std::runtime_error("cannot write " + path);
    }
    out << body;
    return path;
}

struct CommonFlags {
    std::string out_dir;
    std::string log_level = "info";
};

int cmd_run(const std::string& config_path, const std::string& iface,
            const CommonFlags& common) {
    RuntimeConfig cfg = RuntimeConfig::load_file(config_path);
    cfg.finalize_capture("", iface);
    const std::string out_dir = pick_out_dir(common.out_dir, cfg.output_directory);

    // Config is fully validated; only now does capture start.
    AfPacketSource source(cfg.capture_interface);
    arm_stop_signals();
    FF_LOG_INFO("capturing on %s; Ctrl-C to stop", cfg.capture_interface.c_str());

    Pipeline pipeline(cfg, out_dir);
    PipelineResult result = pipeline.run_live(source, g_stop);
    print_result(pipeline_json("run", cfg, result));
    return 0;
}

int cmd_replay(const std::string& config_path, const std::string& pcap,
               const CommonFlags& common) {
    RuntimeConfig cfg = RuntimeConfig::load_file(config_path);
    cfg.finalize_capture(pcap, "");
    const std::string out_dir = pick_out_dir(common.out_dir, cfg.output_directory);

    Pipeline pipeline(cfg, out_dir);
    PipelineResult result = pipeline.run_replay();
    print_result(pipeline_json("replay", cfg, result));
    return 0;
}

int cmd_profile(const std::string& config_path, const std::string& pcap,
                const std::string& iface, double duration_s,
                const std::string& classes_arg, const CommonFlags& common) {
    RuntimeConfig cfg = RuntimeConfig::load_file(config_path);
    cfg.finalize_capture(pcap, iface);
    if (!cfg.capture_interface.empty() && duration_s <= 0.0) {
        throw ConfigError("profiling a live interface needs --duration");
    }
    const std::string out_dir = pick_out_dir(common.out_dir, cfg.output_directory);

    ProfileOptions opts;
    opts.classes = split_classes(classes_arg);

    CostProfileReport report;
    if (!cfg.pcap_file.empty()) {
        report = profile_replay(cfg, out_dir, opts);
    } else {
        AfPacketSource source(cfg.capture_interface);
        arm_stop_signals();
        FF_LOG_INFO("profiling %s for %.1f s", cfg.capture_interface.c_str(), duration_s);

        std::atomic<bool> done{false};
        std::thread timer([&] {
            const auto deadline =
                std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(duration_s));
            while (!done.load() && std::chrono::steady_clock::now() < deadline) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
            }
            g_stop.store(true);
        });
        try {
            report = profile_live(cfg, source, g_stop, out_dir, opts);
        } catch (...) {
            done.store(true);
            timer.join();
            throw;
        }
        done.store(true);
        timer.join();
    }

    const nlohmann::json j = report.to_json();
    const std::string path = write_text_file(out_dir, "profile-report.json", j.dump(2) + "\n");
    FF_LOG_INFO("profile report written to %s", path.c_str());
    print_result(j);
    return 0;
}

int cmd_bench_cache(uint64_t flows, uint64_t updates) {
    CacheBenchResult result = run_cache_bench(flows, updates);
    nlohmann::json j = result.to_json();
    j["command"] = "bench-cache";
    print_result(j);
    return 0;
}

int cmd_report(const std::string& in_path, const std::string& format,
               const std::string& diff_path, const CommonFlags& common) {
    const nlohmann::json report = load_json_file(in_path);
    const std::string out_dir = pick_out_dir(common.out_dir, "");

    std::vector<std::string> written;
    if (!diff_path.empty()) {
        const nlohmann::json other = load_json_file(diff_path);
        written.push_back(
            write_text_file(out_dir, "profile-diff.txt", diff_reports(report, other)));
    } else if (format == "plots") {
        written = render_report_plots(report, out_dir);
    } else {
        written.push_back(
            write_text_file(out_dir, "profile-report.txt", render_report_table(report)));
    }
    print_result(nlohmann::json{{"command", "report"}, {"written", written}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowforge — passive traffic measurement with per-service flow features"};
    app.fallthrough();
    app.require_subcommand(1);

    CommonFlags common;
    app.add_option("--out-dir", common.out_dir,
                   "Directory for emitted files (default: the config's OutputDirectory)");
    app.add_option("--log-level", common.log_level, "stderr verbosity")
        ->check(CLI::IsMember({"debug", "info", "warn", "error", "off"}))
        ->default_str("info");

    std::string config_path;
    std::string iface;
    std::string pcap;
    std::string classes_arg;
    std::string in_path;
    std::string format = "table";
    std::string diff_path;
    double duration_s = 0.0;
    uint64_t flows = 0;
    uint64_t updates = 0;

    const char* config_help = "Traffic config file (JSON); defaults to $FLOWFORGE_CONFIG";
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, config_help)
            ->envname("FLOWFORGE_CONFIG")
            ->required();
    };

    CLI::App* run = app.add_subcommand("run", "Capture live traffic on an interface");
    add_config(run);
    run->add_option("--iface", iface, "Interface to capture on (needs CAP_NET_RAW)")
        ->required();
    run->footer("Runs until SIGINT/SIGTERM; prints a summary JSON on exit.");

    CLI::App* replay = app.add_subcommand("replay", "Replay a capture file deterministically");
    add_config(replay);
    replay->add_option("--pcap", pcap, "pcap/pcapng file to replay")->required();
    replay->footer("Two replays of the same file and config emit identical bytes.");

    CLI::App* profile =
        app.add_subcommand("profile", "Measure state/processing/storage per feature class");
    add_config(profile);
    CLI::Option* opt_pcap = profile->add_option("--pcap", pcap, "Trace to profile against");
    CLI::Option* opt_iface =
        profile->add_option("--iface", iface, "Live interface to profile against");
    profile->add_option("--duration", duration_s, "Seconds of live traffic to profile")
        ->needs(opt_iface);
    profile
        ->add_option("--classes", classes_arg,
                     "Comma-separated feature classes, e.g. PacketCounters,PngCopy(28,28)")
        ->required();
    opt_pcap->excludes(opt_iface);
    profile->footer("Writes profile-report.json under --out-dir and prints it to stdout.");

    CLI::App* bench =
        app.add_subcommand("bench-cache", "Flow-cache insert/update latency microbenchmark");
    bench->add_option("--flows", flows, "Distinct flows to insert")->required();
    bench->add_option("--updates", updates, "Updates over the inserted flows")->required();
    bench->footer("Reports latency quantiles for both operations; inserts allocate\n"
                  "feature state, updates only refresh an existing record.");

    CLI::App* report = app.add_subcommand("report", "Render or compare profile reports");
    report->add_option("--in", in_path, "profile-report.json to render")->required();
    report->add_option("--format", format, "table or plots")
        ->check(CLI::IsMember({"table", "plots"}))
        ->default_str("table");
    report->add_option("--diff", diff_path,
                       "Second report to compare against (must share the config hash)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // help text to stdout, exit 0
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    if (!set_log_level(common.log_level)) {
        std::cerr << "config error: unknown log level '" << common.log_level << "'\n";
        return 2;
    }

    try {
        if (*run) {
            return cmd_run(config_path, iface, common);
        }
        if (*replay) {
            return cmd_replay(config_path, pcap, common);
        }
        if (*profile) {
            return cmd_profile(config_path, pcap, iface, duration_s, classes_arg, common);
        }
        if (*bench) {
            return cmd_bench_cache(flows, updates);
        }
        if (*report) {
            return cmd_report(in_path, format, diff_path, common);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
