#include <iostream>

#include <CLI11.hpp>

#include "collapse/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic semiclassical gravity from continuous collapse models"};
    app.require_subcommand(1);

    collapse::CommandOptions opt;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "Run configuration (JSON)")->required()->check(
            CLI::ExistingFile);
        sub->add_option("--seed", seed, "Base seed, overrides integration.seed");
        sub->add_option("--out", opt.out, "Output directory");
        sub->add_flag("--json", opt.json, "Print JSON to standard output");
    };

    CLI::App* run = app.add_subcommand("run", "Trajectory, ensemble or master equation run");
    add_common(run);

    CLI::App* analyze = app.add_subcommand("analyze", "Closed-form analyses");
    analyze->require_subcommand(1);
    std::string which;
    for (const char* name : {"rate", "pair-potential", "kappa-scan", "linearity"}) {
        CLI::App* sub = analyze->add_subcommand(name);
        add_common(sub);
        sub->callback([&which, name] { which = name; });
    }

    CLI::App* presets = app.add_subcommand("presets", "Physical parameter presets");
    bool presets_json = false;
    presets->add_flag("--json", presets_json, "Print JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : collapse::exit_config;
    }

    auto seed_given = [&](CLI::App* sub) { return sub->count("--seed") > 0; };
    if (*presets)
        return collapse::cmd_presets(presets_json, std::cout);
    if (*run) {
        if (seed_given(run))
            opt.seed = seed;
        return collapse::cmd_run(opt, std::cout, std::cerr);
    }
    for (CLI::App* sub : analyze->get_subcommands())
        if (seed_given(sub))
            opt.seed = seed;
    return collapse::cmd_analyze(which, opt, std::cout, std::cerr);
}
