// recon: command-line driver for the reconstruction library.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "recon/cli.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> size;
    std::optional<double> lambda;
    std::optional<double> rho;
    std::optional<double> step;
    std::optional<std::size_t> iters;
    std::optional<std::string> solver;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON experiment config");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "base seed (mask = seed, noise = seed + 1)");
    cmd->add_option("--size", o.size, "phantom size in pixels");
    cmd->add_option("--lambda", o.lambda, "regularization weight");
    cmd->add_option("--rho", o.rho, "ADMM penalty parameter");
    cmd->add_option("--step", o.step, "fixed gradient-descent step (0: automatic)");
    cmd->add_option("--iters", o.iters, "maximum solver iterations");
    cmd->add_option("--solver", o.solver, "admm_tv | cg_tikhonov | gd_tikhonov | fbp");
}

recon::cli::ExperimentConfig resolve(const std::string& experiment, const Overrides& o) {
    using namespace recon::cli;
    ExperimentConfig c = o.config.empty() ? default_config(experiment) : load_config(o.config);
    c.experiment = experiment;
    if (o.out) c.output_dir = *o.out;
    if (o.seed) c.seed = *o.seed;
    if (o.size) c.phantom.size = *o.size;
    if (o.lambda) c.solver.lambda = *o.lambda;
    if (o.rho) c.solver.rho = *o.rho;
    if (o.step) c.solver.step = *o.step;
    if (o.iters) c.solver.max_iter = *o.iters;
    if (o.solver) c.solver.name = *o.solver;
    validate(c);
    return c;
}

std::filesystem::path write_failure_trace(const std::string& dir, const recon::NumericalError& e) {
    std::filesystem::path path = std::filesystem::path(dir.empty() ? "." : dir) / "failure_trace.csv";
    std::filesystem::create_directories(path.parent_path());
    recon::io::Table t({"iteration", "value"});
    for (std::size_t i = 0; i < e.trace().size(); ++i)
        t.add_row({std::to_string(i + 1), recon::io::format_number(e.trace()[i])});
    t.write(path);
    return path;
}

} // namespace

int main(int argc, char** argv) {
    using namespace recon::cli;
    CLI::App app{"Image reconstruction experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", RECON_VERSION);

    Overrides o;
    struct Entry {
        const char* name;
        const char* experiment;
        const char* help;
    };
    const Entry entries[] = {
        {"phantom", "phantom", "render a phantom"},
        {"simulate", "simulate", "simulate measurements (blur_mask or ct)"},
        {"reconstruct", "reconstruct", "simulate and reconstruct with one solver"},
        {"compress-study", "compress_study", "coefficient-thresholding study"},
        {"compare-l2-l1", "compare_l2_l1", "Tikhonov-CG vs TV-ADMM on blur + mask + noise"},
        {"fbp-vs-tv", "fbp_vs_tv", "FBP vs TV-ADMM on low-view CT"},
    };
    std::map<CLI::App*, std::string> experiment_of;
    for (const Entry& e : entries) {
        CLI::App* cmd = app.add_subcommand(e.name, e.help);
        add_common(cmd, o);
        experiment_of[cmd] = e.experiment;
    }
    std::optional<std::string> nullspace_out;
    CLI::App* nullspace = app.add_subcommand("nullspace-demo", "CG on a 3x3 system with a null space");
    nullspace->add_option("--out", nullspace_out, "output directory for metrics and manifest");
    std::uint64_t unused_seed = 0;
    nullspace->add_option("--seed", unused_seed, "accepted for uniformity; the demo is deterministic");
    CLI::App* selftest = app.add_subcommand("selftest", "quick internal checks");
    selftest->add_option("--seed", unused_seed, "accepted for uniformity; checks use fixed seeds");
    std::string default_name;
    CLI::App* defaults = app.add_subcommand("default-config", "print the default config for an experiment");
    defaults->add_option("experiment", default_name, "experiment id, e.g. compare_l2_l1")->required();

    CLI11_PARSE(app, argc, argv);

    std::string out_dir = o.out.value_or("");
    try {
        if (nullspace->parsed()) {
            std::optional<ExperimentConfig> cfg;
            if (nullspace_out) {
                cfg = default_config("nullspace_demo");
                cfg->output_dir = *nullspace_out;
            }
            return cmd_nullspace_demo(std::cout, cfg);
        }
        if (selftest->parsed()) return cmd_selftest(std::cout);
        if (defaults->parsed()) {
            std::cout << dump_config(default_config(default_name));
            return 0;
        }
        for (const auto& [cmd, experiment] : experiment_of) {
            if (!cmd->parsed()) continue;
            const ExperimentConfig c = resolve(experiment, o);
            out_dir = c.output_dir;
            if (experiment == "phantom") return cmd_phantom(c, std::cout);
            if (experiment == "simulate") return cmd_simulate(c, std::cout);
            if (experiment == "reconstruct") return cmd_reconstruct(c, std::cout);
            if (experiment == "compress_study") return cmd_compress_study(c, std::cout);
            if (experiment == "compare_l2_l1") return cmd_compare_l2_l1(c, std::cout);
            if (experiment == "fbp_vs_tv") return cmd_fbp_vs_tv(c, std::cout);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const recon::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const recon::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        try {
            std::cerr << "trace: " << write_failure_trace(out_dir, e).string() << "\n";
        } catch (const std::exception& w) {
            std::cerr << "could not write failure trace: " << w.what() << "\n";
        }
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
