// Command-line front end: prion <subcommand> --config FILE --out DIR

#include <iostream>

#include "CLI11.hpp"

#include "prion/app.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Monomer-polymer kinetics solver and diagnostics"};
    cli.require_subcommand(1);
    std::string config_path, out_dir = "out";
    std::uint64_t seed = 7;
    std::size_t threads = 1;
    for (const auto& name : prion::subcommands()) {
        auto* sub = cli.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "seed for the random test functions")->capture_default_str();
        sub->add_option("--threads", threads, "concurrent runs in ladders")->capture_default_str()->check(
            CLI::PositiveNumber);
    }
    CLI11_PARSE(cli, argc, argv);
    const std::string subcommand = cli.get_subcommands().front()->get_name();

    prion::RunConfig config;
    try {
        config = prion::load_config(config_path);
    } catch (const prion::ConfigError& e) {
        prion::detail::write_failure(out_dir, subcommand, "config", e.what(), e.errors());
        std::cerr << e.what() << '\n';
        return prion::exit_config;
    } catch (const std::exception& e) {
        prion::detail::write_failure(out_dir, subcommand, "config", e.what());
        std::cerr << e.what() << '\n';
        return prion::exit_config;
    }
    const int code = prion::run(subcommand, config, out_dir, {seed, threads});
    if (code != prion::exit_ok) std::cerr << subcommand << " failed; see " << out_dir << "/failure.json\n";
    return code;
}
