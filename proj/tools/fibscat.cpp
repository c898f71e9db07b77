#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fibscat/app.hpp"
#include "fibscat/config.hpp"
#include "fibscat/errors.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Fiber spectra and scattering for the vacuum plus one-boson sector"};
    std::string config_path;
    std::string command;
    std::string preset_name;
    std::vector<std::string> overrides;
    cli.add_option("config", config_path, "flat key = value config file");
    cli.add_option("-c,--command", command, "overrides the command key");
    cli.add_option("-p,--preset", preset_name, "model preset (polaron, nelson, relativistic)");
    cli.add_option("-s,--set", overrides, "key=value override, repeatable");
    bool list_presets = false;
    cli.add_flag("--list-presets", list_presets, "print preset names and exit");
    CLI11_PARSE(cli, argc, argv);

    if (list_presets) {
        for (const auto& name : fibscat::preset_names()) std::cout << name << "\n";
        return 0;
    }
    try {
        fibscat::ConfigMap file;
        if (!config_path.empty()) file = fibscat::ConfigMap::load(config_path);
        if (!preset_name.empty()) file.set("preset", preset_name);
        if (!command.empty()) file.set("command", command);
        const auto config = fibscat::build_experiment(fibscat::resolve_config(file, overrides));
        return fibscat::run(config, std::cout);
    } catch (const fibscat::Error& err) {
        std::cerr << "fibscat: " << err.what() << "\n";
        return err.kind() == fibscat::ErrorKind::configuration ? 1 : 2;
    } catch (const std::exception& err) {
        std::cerr << "fibscat: " << err.what() << "\n";
        return 1;
    }
}
