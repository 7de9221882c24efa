#include <CLI11.hpp>

#include <iostream>

#include "specavg/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Spectral averaging experiments for rank-one perturbations"};
    app.require_subcommand(1, 1);

    specavg::cli::Options opt;
    std::string config;
    std::uint64_t seed = 0;
    double tol = 0.0;
    for (const auto& name : specavg::cli::subcommands()) {
        auto* sub = app.add_subcommand(name, specavg::cli::describe(name));
        sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "experiment seed");
        sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
        sub->add_option("--tol", tol, "check tolerance");
        sub->add_flag("--quiet", opt.quiet, "suppress check lines");
        sub->add_flag_callback("--print-config", [name] {
            std::cout << specavg::cli::default_config_json(name).dump(2) << '\n';
            throw CLI::Success();
        }, "print the default config and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : specavg::cli::exit_error;
    }

    auto* sub = app.get_subcommands().front();
    if (sub->count("--config"))
        opt.config_path = config;
    if (sub->count("--seed"))
        opt.seed = seed;
    if (sub->count("--tol"))
        opt.tol = tol;
    return specavg::cli::run(sub->get_name(), opt, std::cout, std::cerr);
}
