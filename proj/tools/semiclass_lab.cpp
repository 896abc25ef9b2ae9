// semiclass-lab: configuration-driven experiment runner.
//
// Usage:
//   semiclass-lab run <config.json> [--out DIR] [--workers K] [--n-override N]
//   semiclass-lab list
//
// Exit codes: 0 all experiments pass, 2 any verdict failed, 3 config error,
// 4 numerical abort.

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "semiclass/experiments.hpp"

namespace {

using semiclass::ExperimentConfig;
using semiclass::ExperimentReport;

std::vector<ExperimentConfig> load_configs(const std::string& path,
                                           const std::string& out_override,
                                           int n_override) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    nlohmann::json j;
    in >> j;
    std::vector<nlohmann::json> entries;
    if (j.is_array())
        entries.assign(j.begin(), j.end());
    else if (j.contains("experiments"))
        entries.assign(j.at("experiments").begin(), j.at("experiments").end());
    else
        entries.push_back(j);

    std::vector<ExperimentConfig> configs;
    for (auto& entry : entries) {
        auto cfg = ExperimentConfig::from_json(entry);
        if (!out_override.empty()) cfg.output_dir = out_override;
        if (n_override > 0)
            cfg.grid = semiclass::GridSpec::make(n_override, cfg.grid.period);
        configs.push_back(std::move(cfg));
    }
    return configs;
}

int run_batch(std::vector<ExperimentConfig> configs, unsigned workers) {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> any_fail{false};
    std::atomic<bool> config_error{false};
    std::atomic<bool> numeric_error{false};
    std::mutex io;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            const auto& cfg = configs[i];
            try {
                auto report = semiclass::run_experiment(cfg);
                std::lock_guard<std::mutex> lock(io);
                std::cout << cfg.name << ": "
                          << (report.passed() ? "PASS" : "FAIL") << " ("
                          << semiclass::format_number(report.runtime_seconds)
                          << " s, report in " << cfg.output_dir << "/"
                          << cfg.name << ")\n";
                if (!report.passed()) any_fail = true;
            } catch (const std::invalid_argument& e) {
                std::lock_guard<std::mutex> lock(io);
                std::cerr << "[" << cfg.name << "] config error: " << e.what()
                          << "\n";
                config_error = true;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io);
                std::cerr << "[" << cfg.name << "] numerical abort: "
                          << e.what() << "\n";
                numeric_error = true;
            }
        }
    };

    const unsigned count =
        std::max(1u, std::min<unsigned>(workers, configs.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < count; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    if (config_error) return 3;
    if (numeric_error) return 4;
    return any_fail ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semiclassical operator laboratory"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "enumerate known experiments");

    std::string config_path, out_dir;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency() / 2);
    int n_override = 0;
    auto* run = app.add_subcommand("run", "run experiments from a JSON config");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out", out_dir, "output directory override");
    run->add_option("--workers", workers, "concurrent experiment budget");
    run->add_option("--n-override", n_override, "override grid point count");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& name : semiclass::experiment_names())
            std::cout << name << "\n";
        return 0;
    }

    try {
        return run_batch(load_configs(config_path, out_dir, n_override),
                         workers);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
