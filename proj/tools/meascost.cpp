#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "app.hpp"

namespace {

using meascost::app::normalize_key;

// Per-command keys exposed as --dashed-flags; anything else can still be
// passed with --set key=value or in the config file.
const std::map<std::string, std::vector<std::string>> kCommandKeys{
    {"backaction", {"n_grid", "n_cells", "tail_tolerance"}},
    {"snr",
     {"families", "n_emit_grid", "eta", "shots", "thermal_shots", "duration_s", "kappa_hz", "chi_hz", "demod_g_hz",
      "demod_e_hz", "sample_rate_hz", "mirror_peaks", "train_fraction", "background_shots", "window",
      "histogram_bins", "dump_traces"}},
    {"thermo", {"family", "n", "dim", "tail_tolerance", "temperature_k"}},
    {"scatter",
     {"kappa_hz", "chi_hz", "duration_s", "delta_hz", "nbar_hot", "nbar_cold", "t_hot_k", "t_cold_k", "carrier_hz",
      "bose_einstein_mode"}},
    {"calibrate",
     {"kappa_hz", "peak_spacing_hz", "linewidth_mode", "distribution", "gamma_init_hz", "nbar_init",
      "amplitude_init", "spectrum_csv", "freq_grid_hz", "synth_nbar", "synth_gamma_hz", "synth_amplitude",
      "synth_noise", "series_csv", "series_dt_s", "two_resonance", "saturation_csv"}},
};

std::string dashed(std::string key) {
    for (auto& c : key)
        if (c == '_') c = '-';
    return key;
}

struct CommandArgs {
    std::string config;
    std::string output_dir;
    std::string seed;
    std::string threads;
    bool validate = false;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Energy-cost and information analyses of dispersive qubit readout"};
    cli.require_subcommand(1);

    std::map<std::string, CommandArgs> args;
    for (const auto& [name, keys] : kCommandKeys) {
        auto& a = args[name];
        auto* sub = cli.add_subcommand(name);
        sub->add_option("--config", a.config, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--output-dir", a.output_dir, "output directory (default $MEASCOST_OUTPUT_DIR or ./meascost-output)");
        sub->add_option("--seed", a.seed, "random seed");
        sub->add_option("--threads", a.threads, "worker threads");
        sub->add_flag("--validate", a.validate, "report configuration problems and exit");
        sub->add_option("--set", a.sets, "extra key=value override")->type_name("KEY=VALUE");
        for (const auto& key : keys) sub->add_option("--" + dashed(key), a.flags[key]);
    }

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = cli.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto* sub = cli.get_subcommands().front();
    const std::string command = sub->get_name();
    const auto& a = args[command];

    try {
        std::map<std::string, std::string> values;
        if (!a.config.empty()) values = meascost::app::read_config_file(a.config, command);
        for (const auto& s : a.sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw meascost::ConfigError("--set expects key=value, got '" + s + "'");
            values[normalize_key(meascost::app::trim(s.substr(0, eq)))] = meascost::app::trim(s.substr(eq + 1));
        }
        for (const auto& [key, v] : a.flags)
            if (sub->count("--" + dashed(key))) values[key] = v;
        if (sub->count("--output-dir")) values["output_dir"] = a.output_dir;
        if (sub->count("--seed")) values["seed"] = a.seed;
        if (sub->count("--threads")) values["threads"] = a.threads;

        const auto result = meascost::app::run(command, values, a.validate);
        if (a.validate) {
            for (const auto& v : result.violations) std::cout << v << "\n";
            if (result.violations.empty()) std::cout << "ok (config hash " << result.config_hash << ")\n";
            return result.violations.empty() ? 0 : 2;
        }
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        for (const auto& f : result.files) std::cout << f.string() << "\n";
        return 0;
    } catch (const meascost::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
