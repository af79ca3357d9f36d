#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsolink/commands.hpp"
#include "fsolink/errors.hpp"

namespace {

using namespace fsolink;

int run(int argc, char** argv) {
    CLI::App app{"Mid-IR free-space optical link budget and packet simulator"};
    app.require_subcommand(1);
    // Global options (--seed, --out, ...) stay usable after the subcommand.
    app.fallthrough();

    std::string config_path;
    bool builtin = false;
    app.add_option("--config", config_path, "configuration file to load");
    app.add_flag("--builtin-defaults,--defaults", builtin,
                 "use the built-in default configuration (also the fallback "
                 "when --config is absent)");
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override run.seed");
    std::size_t packets = 0;
    auto* packets_opt =
        app.add_option("--packets", packets, "override run.n_packets");
    std::string out_path;
    app.add_option("--out", out_path, "write output to a file instead of stdout");
    std::string format;
    app.add_option("--format", format, "output format (csv or json)")
        ->check(CLI::IsMember({"csv", "json"}));

    AttenuationScanOptions att;
    auto* c_att = app.add_subcommand(
        "attenuation", "attenuation budget against distance per wavelength");
    c_att->add_option("--wavelengths", att.wavelengths_nm, "wavelengths [nm]")
        ->delimiter(',');
    c_att->add_option("--max-distance", att.max_distance_m, "scan end [m]");
    c_att->add_option("--step", att.step_m, "scan step [m]");

    PerVsSnrOptions pvs;
    auto* c_pvs = app.add_subcommand("per-vs-snr",
                                     "packet error rate against SNR");
    c_pvs->add_option("--start", pvs.snr_start_db, "first SNR [dB]");
    c_pvs->add_option("--stop", pvs.snr_stop_db, "last SNR [dB]");
    c_pvs->add_option("--step", pvs.snr_step_db, "SNR step [dB]");
    c_pvs->add_flag("--montecarlo", pvs.montecarlo,
                    "simulate packets instead of evaluating the formula");
    c_pvs->add_option("--workers", pvs.n_workers,
                      "Monte Carlo worker threads (0: all cores)");

    MoaOptions moa;
    auto* c_moa = app.add_subcommand(
        "moa", "maximum optical attenuation for target packet error rates");
    c_moa->add_option("--per", moa.per_targets, "target packet error rates")
        ->delimiter(',');

    LinkLengthOptions ll;
    auto* c_ll = app.add_subcommand(
        "link-length", "maximum link length within a loss budget");
    c_ll->add_option("--wavelengths", ll.wavelengths_nm, "wavelengths [nm]")
        ->delimiter(',');
    double budget = 0.0;
    auto* budget_opt = c_ll->add_option(
        "--budget", budget, "loss budget [dB] (default: MOA at --per-target)");
    c_ll->add_option("--per-target", ll.per_target,
                     "packet error rate defining the default budget");

    RegimeScanOptions reg;
    auto* c_reg = app.add_subcommand(
        "regime-scan", "SNR against attenuation across modulation depths");
    c_reg->add_option("--md", reg.mds, "modulation depths")->delimiter(',');
    c_reg->add_option("--start", reg.moa_start_db, "first attenuation [dB]");
    c_reg->add_option("--stop", reg.moa_stop_db, "last attenuation [dB]");
    c_reg->add_option("--step", reg.moa_step_db, "attenuation step [dB]");

    MdScanOptions mds;
    auto* c_mds = app.add_subcommand(
        "md-scan", "error rate per modulation depth at fixed attenuation");
    c_mds->add_option("--oa", mds.oa_db, "optical attenuation [dB]");
    c_mds->add_option("--md", mds.mds, "modulation depths")->delimiter(',');
    c_mds->add_option("--per-target", mds.per_target,
                      "packet error rate counted as error-free");

    SimulateOptions sim;
    auto* c_sim = app.add_subcommand(
        "simulate", "bit-true Monte Carlo run at fixed attenuation");
    c_sim->add_option("--oa", sim.oa_db, "optical attenuation [dB]");
    c_sim->add_option("--workers", sim.n_workers,
                      "worker threads (0: all cores)");
    c_sim->add_option("--eye-out", sim.eye_out_path,
                      "also write an eye-diagram CSV to this path");
    c_sim->add_option("--eye-traces", sim.eye_trace_cap,
                      "trace cap for the eye diagram");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (builtin && !config_path.empty())
        throw config_error("--config and --builtin-defaults are exclusive");
    SystemConfig cfg =
        config_path.empty() ? builtin_defaults() : load_config(config_path);
    if (seed_opt->count()) cfg.seed = seed;
    if (packets_opt->count()) cfg.n_packets = packets;
    cfg.validate();

    std::ofstream out_file;
    if (!out_path.empty()) {
        out_file.open(out_path);
        if (!out_file)
            throw config_error("cannot open output file '" + out_path + "'");
    }
    std::ostream& os = out_path.empty() ? std::cout : out_file;

    // Tables default to CSV; the single-point simulation report to JSON.
    const bool is_sim = c_sim->parsed();
    const OutputFormat fmt = format.empty()
                                 ? (is_sim ? OutputFormat::json : OutputFormat::csv)
                                 : (format == "json" ? OutputFormat::json
                                                     : OutputFormat::csv);

    if (budget_opt->count()) ll.budget_db = budget;

    if (c_att->parsed()) cmd_attenuation(cfg, att, fmt, os);
    else if (c_pvs->parsed()) cmd_per_vs_snr(cfg, pvs, fmt, os);
    else if (c_moa->parsed()) cmd_moa(cfg, moa, fmt, os);
    else if (c_ll->parsed()) cmd_link_length(cfg, ll, fmt, os);
    else if (c_reg->parsed()) cmd_regime_scan(cfg, reg, fmt, os);
    else if (c_mds->parsed()) cmd_md_scan(cfg, mds, fmt, os);
    else if (c_sim->parsed()) cmd_simulate(cfg, sim, fmt, os);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
