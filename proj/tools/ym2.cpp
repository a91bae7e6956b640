#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "experiments.hpp"

namespace fs = std::filesystem;
using namespace ym2;
using cli::json;

namespace {

std::optional<std::uint64_t> seed_override()
{
    const char* v = std::getenv("YM2_SEED_OVERRIDE");
    if (!v) return std::nullopt;
    std::string s(v);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 20)
        fail(ErrorKind::Config, "YM2_SEED_OVERRIDE must be a non-negative integer");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        fail(ErrorKind::Config, "YM2_SEED_OVERRIDE out of range");
    }
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + p.string());
}

int run(const std::string& config_path, unsigned threads, const std::string& out_dir)
{
    const auto t0 = std::chrono::steady_clock::now();
    json raw;
    {
        std::ifstream in(config_path);
        if (!in) fail(ErrorKind::Config, "cannot open " + config_path);
        try {
            raw = json::parse(in);
        } catch (const json::exception& e) {
            fail(ErrorKind::Config, std::string("malformed JSON: ") + e.what());
        }
    }
    cli::Config cfg(raw);
    auto spec = cli::common(cfg, seed_override());
    auto res = cli::run(cfg, spec, threads);

    bool pass = true;
    for (auto& [k, v] : res.checks.items()) pass = pass && v.get<bool>();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json summary{{"kind", spec.kind},   {"config", raw},       {"seed", spec.seed},   {"threads", threads},
                 {"wall_time_s", wall}, {"checks", res.checks}, {"passed", pass},     {"payload", res.payload},
                 {"csv", spec.output + ".csv"}};

    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / (spec.output + ".csv"), res.table.csv());
    write_file(fs::path(out_dir) / (spec.output + ".json"), summary.dump(2) + "\n");
    for (auto& [k, v] : res.checks.items()) std::cout << (v.get<bool>() ? "PASS " : "FAIL ") << k << "\n";
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Lattice Yang-Mills experiments on Morse-decomposed surfaces"};
    app.require_subcommand(1);
    auto* sub = app.add_subcommand("run", "run one experiment from a JSON config");
    std::string config, out_dir = ".";
    unsigned threads = 1;
    sub->add_option("--config", config, "experiment config (JSON)")->required();
    sub->add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
    sub->add_option("--out-dir", out_dir, "directory for the CSV and JSON outputs");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(config, threads, out_dir);
    } catch (const Error& e) {
        std::cerr << "ym2: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::Config:
        case ErrorKind::InvalidArgument:
        case ErrorKind::ParameterOutOfRange:
        case ErrorKind::IndexOutOfRange:
        case ErrorKind::ResolutionTooHigh:
        case ErrorKind::LevelBelowSaddles:
        case ErrorKind::SupportViolation:
        case ErrorKind::NonPositiveTime:
        case ErrorKind::TagMismatch:
            return 2;
        default:
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "ym2: " << e.what() << "\n";
        return 1;
    }
}
