#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "resil/errors.hpp"
#include "resil/pipeline.hpp"
#include "resil/version.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIngest = 3;
constexpr int kExitCompute = 4;

template <class Fn>
int dispatch(const char* stage, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const resil::ConfigError& e) {
        std::cerr << "error: " << stage << ": " << e.what() << "\n";
        return kExitConfig;
    } catch (const resil::IngestError& e) {
        std::cerr << "error: " << stage << ": " << e.what() << "\n";
        return kExitIngest;
    } catch (const resil::ComputeError& e) {
        std::cerr << "error: " << stage << ": " << e.what() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << stage << ": " << e.what() << "\n";
        return kExitCompute;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Social-capital surface fusion and neighborhood cluster analysis"};
    app.set_version_flag("--version",
                         std::string(resil::kToolName) + " " + resil::kVersion);
    app.require_subcommand(1);

    std::string config;
    int workers = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "run config file")->required();
        sub->add_option("--workers", workers,
                        "worker threads (0 = all hardware threads)");
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        sub->add_option("--out", out, "override the output directory");
        return sub;
    };

    CLI::App* cmd_run = add_common(app.add_subcommand(
        "run", "full pipeline: validate, layers, fuse, lisa, report, manifest"));
    CLI::App* cmd_validate = add_common(
        app.add_subcommand("validate", "check inputs without writing outputs"));
    CLI::App* cmd_layers = add_common(app.add_subcommand(
        "layers", "render per-layer density grids and the catchment table"));
    CLI::App* cmd_fuse = add_common(app.add_subcommand(
        "fuse", "combine rendered layers into the social capital surfaces"));
    CLI::App* cmd_lisa = add_common(app.add_subcommand(
        "lisa", "neighborhood aggregation, local Moran's I, permutation tests"));
    CLI::App* cmd_report =
        add_common(app.add_subcommand("report", "write the cluster report table"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    resil::RunConfig cfg;
    try {
        cfg = resil::load_run_config(config);
    } catch (const resil::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const resil::IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIngest;
    }
    if (workers >= 0) cfg.workers = workers;
    if (seed_set) cfg.seed = seed;
    if (!out.empty()) cfg.out_dir = out;

    std::ostream& log = std::cout;
    if (cmd_run->parsed()) return dispatch("run", [&] { resil::run(cfg, log); });
    if (cmd_validate->parsed())
        return dispatch("validate", [&] { resil::stage_validate(cfg, log); });
    if (cmd_layers->parsed())
        return dispatch("layers", [&] { resil::stage_layers(cfg, log); });
    if (cmd_fuse->parsed())
        return dispatch("fuse", [&] { resil::stage_fuse(cfg, log); });
    if (cmd_lisa->parsed())
        return dispatch("lisa", [&] { resil::stage_lisa(cfg, log); });
    if (cmd_report->parsed())
        return dispatch("report", [&] { resil::stage_report(cfg, log); });
    return kExitConfig;
}
