#pragma once

// Commands of the meascost front end. Each command first reads every key it
// understands into a plan (collecting violations), then runs the plan and
// writes its tables under the output directory.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"
#include "meascost/calib.hpp"
#include "meascost/csv.hpp"
#include "meascost/heterodyne.hpp"
#include "meascost/scatter.hpp"
#include "meascost/sources.hpp"
#include "meascost/thermo.hpp"
#include "meascost/trace_io.hpp"

namespace meascost::app {

namespace fs = std::filesystem;

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"backaction", "snr", "thermo", "scatter", "calibrate"};
    return names;
}

struct RunResult {
    std::string config_hash;
    std::vector<std::string> violations;  // non-empty only when validation failed
    std::vector<fs::path> files;
    std::vector<std::string> warnings;
};

struct Common {
    fs::path output_dir;
    std::size_t threads = 1;
};

inline Common read_common(Params& p) {
    Common c;
    const char* env = std::getenv("MEASCOST_OUTPUT_DIR");
    c.output_dir = p.text("output_dir", env && *env ? env : "meascost-output");
    c.threads = static_cast<std::size_t>(p.integer("threads", 1, 1));
    return c;
}

template <class F>
void check(Params& p, F&& f) {
    try {
        f();
    } catch (const Error& e) {
        p.violation(e.what());
    }
}

inline void require_positive(Params& p, const std::string& key, double v) {
    if (!(v > 0.0)) p.violation(key + ": must be > 0");
}

// ---------------------------------------------------------------- backaction

struct BackactionPlan {
    std::vector<double> n_grid;
    std::size_t n_cells = 10000;
    double tail_tolerance = 1e-13;
};

inline BackactionPlan plan_backaction(Params& p) {
    BackactionPlan b;
    b.n_grid = p.grid("n_grid", "0:8:0.5");
    b.n_cells = static_cast<std::size_t>(p.integer("n_cells", 10000, 1));
    b.tail_tolerance = p.real("tail_tolerance", 1e-13);
    if (!(b.tail_tolerance > 0.0 && b.tail_tolerance < 1e-3)) p.violation("tail_tolerance: must lie in (0, 1e-3)");
    for (const double n : b.n_grid)
        if (!(n >= 0.0)) p.violation("n_grid: photon numbers must be >= 0");
    return b;
}

inline double channel_coherence(SourceFamily family, double n, double tail_tolerance) {
    const auto src = source_for_photons(family, n);
    return qubit_coherence(apply_source(src, plus_state(), policy_for(src, tail_tolerance)));
}

inline void run_backaction(const BackactionPlan& b, const Common& c, const std::string& hash, RunResult& out) {
    struct Row {
        double coh_cf, coh_sim, th_cf, th_map;
        std::optional<double> sp_cf, sp_sim;
    };
    std::vector<Row> rows(b.n_grid.size());
    parallel_for(rows.size(), c.threads, [&](std::size_t i) {
        const double n = b.n_grid[i];
        Row r{};
        r.coh_cf = closed_form_coherence(SourceFamily::coherent, n);
        r.coh_sim = channel_coherence(SourceFamily::coherent, n, b.tail_tolerance);
        r.th_cf = closed_form_coherence(SourceFamily::thermal, n);
        r.th_map = thermal_coherence_repeated_map(n, b.n_cells);
        if (n <= 1.0) {
            r.sp_cf = closed_form_coherence(SourceFamily::single_photon, n);
            r.sp_sim = channel_coherence(SourceFamily::single_photon, n, b.tail_tolerance);
        }
        rows[i] = r;
    });
    csv::Table t{{"n_emit", "coherent_closed_form", "coherent_channel", "thermal_closed_form", "thermal_repeated_map",
                  "single_photon_closed_form", "single_photon_channel"},
                 {}};
    auto cell = [](const std::optional<double>& v) -> csv::Cell {
        if (v) return *v;
        return std::string{};
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.add({b.n_grid[i], r.coh_cf, r.coh_sim, r.th_cf, r.th_map, cell(r.sp_cf), cell(r.sp_sim)});
    }
    const auto path = c.output_dir / "backaction.csv";
    csv::write(path, t, hash);
    out.files.push_back(path);
}

// ----------------------------------------------------------------------- snr

struct SnrPlan {
    std::uint64_t seed = 0;
    std::vector<SourceFamily> families;
    std::vector<double> n_grid;
    double eta = 1.0;
    std::size_t shots = 10000;
    std::size_t thermal_shots = 1000;
    double duration = 1e-6;
    SystemParams system;
    ThermalSnrOptions thermal;
    std::size_t histogram_bins = 40;
    std::size_t dump_traces = 0;
};

inline SnrPlan plan_snr(Params& p) {
    SnrPlan s;
    const auto seed = p.seed(true);
    s.seed = seed.value_or(0);
    for (const auto& f : p.list("families", "coherent,thermal")) {
        try {
            const auto fam = parse_family(f);
            if (fam == SourceFamily::single_photon) p.violation("families: snr supports coherent and thermal only");
            else s.families.push_back(fam);
        } catch (const ConfigError& e) {
            p.violation(std::string("families: ") + e.what());
        }
    }
    s.n_grid = p.grid("n_emit_grid", "1,2,4,8");
    for (const double n : s.n_grid)
        if (!(n >= 0.0)) p.violation("n_emit_grid: photon numbers must be >= 0");
    s.eta = p.real("eta", 1.0);
    s.shots = static_cast<std::size_t>(p.integer("shots", 10000, 100));
    s.thermal_shots = static_cast<std::size_t>(p.integer("thermal_shots", 1000, 100));
    s.duration = p.real("duration_s", 1e-6);
    require_positive(p, "duration_s", s.duration);
    s.system.kappa = hz_to_angular(p.real("kappa_hz", 0.5e6));
    s.system.chi = hz_to_angular(p.real("chi_hz", -6.3e6));
    s.system.demod_offset_g_hz = p.real("demod_g_hz", 20e6);
    s.system.demod_offset_e_hz = p.real("demod_e_hz", 32.5e6);
    s.system.sample_rate_hz = p.real("sample_rate_hz", 100e6);
    s.system.mirror_peaks = p.flag("mirror_peaks", true);
    s.system.eta = s.eta;
    check(p, [&] { s.system.validate(); });
    s.thermal.train_fraction = p.real("train_fraction", 0.5);
    if (!(s.thermal.train_fraction > 0.0 && s.thermal.train_fraction < 1.0))
        p.violation("train_fraction: must lie in (0, 1)");
    s.thermal.background_shots = static_cast<std::size_t>(p.integer("background_shots", 0, 0));
    const auto window = p.text("window", "none");
    if (window == "hann") s.thermal.window = Window::hann;
    else if (window != "none") p.violation("window: expected none or hann, got '" + window + "'");
    s.histogram_bins = static_cast<std::size_t>(p.integer("histogram_bins", 40, 2));
    s.dump_traces = static_cast<std::size_t>(p.integer("dump_traces", 0, 0));
    if (s.duration > 0.0 && s.system.sample_rate_hz > 0.0 && s.duration * s.system.sample_rate_hz < 64.0)
        p.violation("duration_s: record shorter than 64 samples");
    return s;
}

// Photons emitted by a thermal trace are n_bar kappa T, so the occupancy
// that emits n photons is n / (kappa T).
inline double thermal_nbar_for(double n_emit, const SnrPlan& s) { return n_emit / (s.system.kappa * s.duration); }

inline void add_histogram(csv::Table& t, std::string_view family, double n_emit, const std::vector<double>& g,
                          const std::vector<double>& e, std::size_t bins) {
    double lo = std::min(*std::min_element(g.begin(), g.end()), *std::min_element(e.begin(), e.end()));
    double hi = std::max(*std::max_element(g.begin(), g.end()), *std::max_element(e.begin(), e.end()));
    if (hi <= lo) hi = lo + 1.0;
    const double w = (hi - lo) / static_cast<double>(bins);
    for (const auto& [label, data] : {std::pair{"g", &g}, std::pair{"e", &e}}) {
        std::vector<long long> counts(bins, 0);
        for (const double v : *data)
            ++counts[std::min(bins - 1, static_cast<std::size_t>((v - lo) / w))];
        for (std::size_t k = 0; k < bins; ++k)
            t.add({std::string(family), n_emit, std::string(label), lo + (static_cast<double>(k) + 0.5) * w, counts[k]});
    }
}

inline void run_snr(const SnrPlan& s, const Common& c, const std::string& hash, RunResult& out) {
    csv::Table summary{{"family", "n_emit", "eta", "shots", "snr", "snr_model", "center_g", "center_e", "sigma_g",
                        "sigma_e"},
                       {}};
    csv::Table hist{{"family", "n_emit", "class", "bin_center", "count"}, {}};
    csv::Table spectra{{"n_emit", "freq_hz", "mean_g", "mean_e", "weight"}, {}};
    bool any_thermal = false;
    for (const auto family : s.families) {
        for (const double n : s.n_grid) {
            std::vector<double> g, e;
            SnrResult r;
            std::size_t shots = s.shots;
            if (family == SourceFamily::coherent) {
                auto proj = coherent_readout_mc(n, s.eta, s.shots, s.seed, c.threads);
                r = proj.snr;
                g = std::move(proj.signal_g);
                e = std::move(proj.signal_e);
            } else {
                any_thermal = true;
                shots = s.thermal_shots;
                auto opt = s.thermal;
                opt.threads = c.threads;
                auto tr = thermal_readout_mc(thermal_nbar_for(n, s), s.duration, s.system, shots, s.seed, opt);
                r = tr.snr;
                g = std::move(tr.signal_g);
                e = std::move(tr.signal_e);
                for (std::size_t k = 0; k < tr.weights.size(); ++k)
                    spectra.add({n, tr.mean_g.freqs_hz[k], tr.mean_g.amplitudes[k], tr.mean_e.amplitudes[k],
                                 tr.weights[k]});
            }
            summary.add({std::string(family_name(family)), n, s.eta, static_cast<long long>(shots), r.snr,
                         snr_model_coherent(n, s.eta), r.center_g, r.center_e, r.sigma_g, r.sigma_e});
            add_histogram(hist, family_name(family), n, g, e, s.histogram_bins);
        }
    }
    auto emit = [&](const std::string& name, const csv::Table& t) {
        const auto path = c.output_dir / name;
        csv::write(path, t, hash);
        out.files.push_back(path);
    };
    emit("snr.csv", summary);
    emit("snr_histograms.csv", hist);
    if (any_thermal) emit("snr_spectra.csv", spectra);
    if (s.dump_traces > 0 && !s.n_grid.empty()) {
        const double nbar = thermal_nbar_for(s.n_grid.back(), s);
        for (std::size_t i = 0; i < s.dump_traces; ++i)
            for (const auto q : {QubitLabel::g, QubitLabel::e}) {
                const auto path = c.output_dir / "traces" /
                                  ("thermal_" + std::string(label_name(q)) + "_" + std::to_string(i) + ".htrc");
                write_trace_binary(path, simulate_thermal_trace(q, s.system, nbar, s.duration, s.seed, i));
                out.files.push_back(path);
            }
    }
}

// -------------------------------------------------------------------- thermo

struct ThermoPlan {
    std::vector<SourceFamily> families;
    std::vector<double> n_grid;
    TruncationPolicy policy;
    double temperature = 0.01;
};

inline ThermoPlan plan_thermo(Params& p) {
    ThermoPlan t;
    auto names = p.list("family", "all");
    if (names.size() == 1 && names.front() == "all") names = {"coherent", "thermal", "single_photon"};
    for (const auto& f : names) {
        try {
            t.families.push_back(parse_family(f));
        } catch (const ConfigError& e) {
            p.violation(std::string("family: ") + e.what());
        }
    }
    t.n_grid = p.grid("n", "0:1:0.05");
    t.policy.dim = static_cast<std::size_t>(p.integer("dim", 32, 2));
    t.policy.tail_tolerance = p.real("tail_tolerance", 1e-10);
    check(p, [&] { t.policy.validate(); });
    t.temperature = p.real("temperature_k", 0.01);
    require_positive(p, "temperature_k", t.temperature);
    for (const double n : t.n_grid) {
        if (!(n >= 0.0)) p.violation("n: photon numbers must be >= 0");
        else if (n > 1.0 && std::count(t.families.begin(), t.families.end(), SourceFamily::single_photon))
            p.violation("n_emit > 1 for single photon (n = " + csv::format(n) + ")");
    }
    if (t.policy.dim > 64) p.violation("dim: at most 64 per mode");
    return t;
}

inline void run_thermo(const ThermoPlan& t, const Common& c, const std::string& hash, RunResult& out) {
    std::vector<InfoReport> reports;
    for (const auto f : t.families) {
        auto r = efficiency_scan(f, t.n_grid, t.policy, t.temperature, c.threads);
        reports.insert(reports.end(), r.begin(), r.end());
    }
    const auto path = c.output_dir / "thermo.csv";
    csv::write(path, info_table(reports), hash);
    out.files.push_back(path);
}

// ------------------------------------------------------------------- scatter

struct ScatterPlan {
    ScatterScene scene;
    std::vector<double> delta_hz;
};

inline ScatterPlan plan_scatter(Params& p) {
    ScatterPlan s;
    s.scene.kappa = hz_to_angular(p.real("kappa_hz", 0.5e6));
    s.scene.chi = hz_to_angular(p.real("chi_hz", 12.6e6));
    s.scene.duration = p.real("duration_s", 1e-6);
    s.delta_hz = p.grid("delta_hz", "-20e6:20e6:0.1e6");
    for (const double d : s.delta_hz) s.scene.detuning_grid.push_back(hz_to_angular(d));
    const auto t_hot = p.optional_real("t_hot_k");
    const auto t_cold = p.optional_real("t_cold_k");
    const double carrier = p.real("carrier_hz", 5.6185e9);
    const bool be_mode = p.flag("bose_einstein_mode", false);
    if (t_hot || t_cold) {
        if (!t_hot || !t_cold) p.violation("t_hot_k and t_cold_k must be given together");
        else if (p.has("nbar_hot") || p.has("nbar_cold"))
            p.violation("give either bath temperatures or occupancies, not both");
        else
            check(p, [&] {
                s.scene.nbar_hot = bose_einstein(carrier, *t_hot);
                s.scene.nbar_cold = bose_einstein(carrier, *t_cold);
                if (be_mode) s.scene.baths = BathTemperatures{carrier, *t_hot, *t_cold};
            });
    } else {
        s.scene.nbar_hot = p.real("nbar_hot", 2.0);
        s.scene.nbar_cold = p.real("nbar_cold", 0.0);
        if (be_mode) p.violation("bose_einstein_mode: needs t_hot_k and t_cold_k");
    }
    check(p, [&] { s.scene.validate(); });
    return s;
}

inline void run_scatter(const ScatterPlan& s, const Common& c, const std::string& hash, RunResult& out) {
    const auto spectral = power_spectrum(s.scene);
    auto table = spectral_table(spectral);
    table.columns.insert(table.columns.begin(), "delta_hz");
    for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].insert(table.rows[i].begin(), s.delta_hz[i]);
    const auto path = c.output_dir / "scatter.csv";
    csv::write(path, table, hash);
    out.files.push_back(path);

    const auto integrated = snr_integrated(s.scene);
    csv::Table summary{{"kappa_hz", "chi_over_kappa", "nbar_hot", "nbar_cold", "duration_s", "snr_closed_form",
                        "snr_numeric", "signal_closed_form", "signal_numeric", "relative_error"},
                       {}};
    summary.add({angular_to_hz(s.scene.kappa), std::abs(s.scene.chi) / s.scene.kappa, s.scene.nbar_hot,
                 s.scene.nbar_cold, s.scene.duration, integrated.snr_closed_form, integrated.snr_numeric,
                 integrated.signal_closed_form, integrated.signal_numeric, integrated.relative_error});
    const auto spath = c.output_dir / "scatter_integrated.csv";
    csv::write(spath, summary, hash);
    out.files.push_back(spath);
    out.warnings.insert(out.warnings.end(), integrated.warnings.begin(), integrated.warnings.end());
}

// ----------------------------------------------------------------- calibrate

struct CalibratePlan {
    double kappa = 0.0;
    SpectrumModel init;
    std::optional<double> amplitude_init;
    std::optional<fs::path> spectrum_csv;
    std::vector<double> freq_grid;
    SpectrumModel synth;
    double synth_noise = 0.0;
    std::uint64_t seed = 0;
    std::optional<fs::path> series_csv;
    std::optional<double> series_dt;
    bool two_resonance = false;
    std::optional<fs::path> saturation_csv;
};

inline CalibratePlan plan_calibrate(Params& p) {
    CalibratePlan k;
    k.kappa = hz_to_angular(p.real("kappa_hz", 0.5e6));
    require_positive(p, "kappa_hz", k.kappa);
    k.init.peak_spacing = p.real("peak_spacing_hz", -12.6e6);
    check(p, [&] { k.init.linewidth_mode = parse_linewidth_mode(p.text("linewidth_mode", "thermal_off")); });
    check(p, [&] { k.init.distribution = parse_distribution(p.text("distribution", "poisson")); });
    k.init.gamma_intrinsic = p.real("gamma_init_hz", 0.3e6);
    k.init.nbar = p.real("nbar_init", 1.0);
    k.amplitude_init = p.optional_real("amplitude_init");
    check(p, [&] { k.init.validate(); });

    if (const auto path = p.text("spectrum_csv", ""); !path.empty()) {
        k.spectrum_csv = path;
    } else {
        k.freq_grid = p.grid("freq_grid_hz", "-132.3e6:18.9e6:50e3");
        k.synth = k.init;
        k.synth.nbar = p.real("synth_nbar", 1.5);
        k.synth.gamma_intrinsic = p.real("synth_gamma_hz", 0.2e6);
        k.synth.amplitude = p.real("synth_amplitude", 1.0);
        check(p, [&] { k.synth.validate(); });
        k.synth_noise = p.real("synth_noise", 0.0);
        if (!(k.synth_noise >= 0.0)) p.violation("synth_noise: must be >= 0");
        k.seed = p.seed(k.synth_noise > 0.0).value_or(0);
    }
    if (const auto path = p.text("series_csv", ""); !path.empty()) k.series_csv = path;
    k.series_dt = p.optional_real("series_dt_s");
    if (k.series_dt && !(*k.series_dt > 0.0)) p.violation("series_dt_s: must be > 0");
    k.two_resonance = p.flag("two_resonance", false);
    if (const auto path = p.text("saturation_csv", ""); !path.empty()) k.saturation_csv = path;
    return k;
}

inline void write_json(const fs::path& path, nlohmann::json j, const std::string& hash, RunResult& out) {
    j["config_hash"] = hash;
    csv::write_file(path, j.dump(2) + "\n");
    out.files.push_back(path);
}

inline void run_calibrate(const CalibratePlan& k, const Common& c, const std::string& hash, RunResult& out) {
    std::vector<double> grid, data;
    if (k.spectrum_csv) {
        auto xy = read_xy(*k.spectrum_csv, "freq_hz", "amplitude");
        grid = std::move(xy.x);
        data = std::move(xy.y);
    } else {
        grid = k.freq_grid;
        data = synth_spectrum(k.synth, grid, k.kappa).values;
        if (k.synth_noise > 0.0) data = add_noise(std::move(data), k.synth_noise, k.seed);
    }
    auto init = k.init;
    if (k.amplitude_init) {
        init.amplitude = *k.amplitude_init;
    } else {
        // Total area under the data, which the peak areas sum to.
        double area = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i) area += 0.5 * (data[i] + data[i - 1]) * (grid[i] - grid[i - 1]);
        init.amplitude = area != 0.0 ? std::abs(area) : 1.0;
    }
    const auto fit = fit_spectrum(data, grid, k.kappa, init);
    auto report = fit.report;
    report["n_c"] = fit.n_c;
    report["source"] = k.spectrum_csv ? k.spectrum_csv->string() : std::string("synthetic");
    write_json(c.output_dir / "calibrate_spectrum.json", report, hash, out);

    const auto model = synth_spectrum(fit.model, grid, k.kappa, peaks_in_grid(grid, fit.model.peak_spacing)).values;
    csv::Table t{{"freq_hz", "data", "model"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) t.add({grid[i], data[i], model[i]});
    const auto path = c.output_dir / "calibrate_spectrum.csv";
    csv::write(path, t, hash);
    out.files.push_back(path);

    if (k.series_csv) {
        const auto series = read_photon_series(*k.series_csv, k.series_dt);
        nlohmann::json j;
        j["n_emit"] = emitted_photons(series, k.kappa, k.two_resonance);
        j["dt_s"] = series.dt;
        j["samples"] = series.n_c.size();
        j["two_resonance"] = k.two_resonance;
        write_json(c.output_dir / "calibrate_photons.json", j, hash, out);
    }
    if (k.saturation_csv) {
        const auto xy = read_xy(*k.saturation_csv, "p_in", "n_emit");
        write_json(c.output_dir / "calibrate_saturation.json", fit_saturation(xy.x, xy.y).report, hash, out);
    }
}

// ---------------------------------------------------------------------- run

// Validates the whole configuration before running anything. With
// `validate_only` the returned result lists the violations (possibly none)
// and no files are written; otherwise violations raise ConfigError.
inline RunResult run(const std::string& command, const std::map<std::string, std::string>& values,
                     bool validate_only = false) {
    Params p(command, values);
    const auto common = read_common(p);
    RunResult out;

    std::optional<BackactionPlan> backaction;
    std::optional<SnrPlan> snr;
    std::optional<ThermoPlan> thermo;
    std::optional<ScatterPlan> scatter;
    std::optional<CalibratePlan> calibrate;
    if (command == "backaction") backaction = plan_backaction(p);
    else if (command == "snr") snr = plan_snr(p);
    else if (command == "thermo") thermo = plan_thermo(p);
    else if (command == "scatter") scatter = plan_scatter(p);
    else if (command == "calibrate") calibrate = plan_calibrate(p);
    else throw ConfigError("unknown command '" + command + "'");
    p.check_unknown();

    out.config_hash = p.hash();
    out.violations = p.violations();
    if (validate_only) return out;
    if (!out.violations.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& v : out.violations) msg += "\n  " + v;
        throw ConfigError(msg);
    }

    if (backaction) run_backaction(*backaction, common, out.config_hash, out);
    if (snr) run_snr(*snr, common, out.config_hash, out);
    if (thermo) run_thermo(*thermo, common, out.config_hash, out);
    if (scatter) run_scatter(*scatter, common, out.config_hash, out);
    if (calibrate) run_calibrate(*calibrate, common, out.config_hash, out);
    return out;
}

}  // namespace meascost::app
