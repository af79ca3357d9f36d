#include "fsolink/commands.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "fsolink/errors.hpp"
#include "fsolink/simkit.hpp"

namespace fsolink {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_cell(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump(); // numbers and booleans in shortest round-trip form
}

void emit_table(std::ostream& os, OutputFormat fmt,
                const std::vector<ordered_json>& rows) {
    if (fmt == OutputFormat::json) {
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) arr.push_back(r);
        os << arr.dump(2) << '\n';
        return;
    }
    if (rows.empty()) return;
    bool first = true;
    for (auto it = rows.front().begin(); it != rows.front().end(); ++it) {
        if (!first) os << ',';
        os << it.key();
        first = false;
    }
    os << '\n';
    for (const auto& row : rows) {
        first = true;
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (!first) os << ',';
            os << csv_cell(it.value());
            first = false;
        }
        os << '\n';
    }
}

std::vector<double> grid(double start, double stop, double step) {
    if (step <= 0.0) throw std::domain_error("scan step must be positive");
    std::vector<double> out;
    for (double x = start; x <= stop + 1e-9 * step; x += step) out.push_back(x);
    return out;
}

Scenario scenario_from(const SystemConfig& cfg, double oa_db, int n_workers) {
    Scenario sc;
    sc.hw = cfg.hw;
    sc.noise = cfg.noise;
    sc.oa_db = oa_db;
    sc.n_packets = cfg.n_packets;
    sc.seed = cfg.seed;
    sc.n_workers = n_workers;
    return sc;
}

} // namespace

void cmd_attenuation(const SystemConfig& cfg, const AttenuationScanOptions& opt,
                     OutputFormat fmt, std::ostream& os) {
    if (opt.max_distance_m < 0.0)
        throw std::domain_error("max distance must be non-negative");
    std::vector<ordered_json> rows;
    for (double wl : opt.wavelengths_nm) {
        for (double d : grid(0.0, opt.max_distance_m, opt.step_m)) {
            const AttenuationBreakdown b =
                total_attenuation(cfg.atmosphere, cfg.geometry, wl, d);
            rows.push_back({{"wavelength_nm", wl},
                            {"distance_m", d},
                            {"aerosol_db", b.aerosol_scattering_db},
                            {"rayleigh_db", b.rayleigh_scattering_db},
                            {"absorption_db", b.absorption_db},
                            {"scintillation_db", b.scintillation_db},
                            {"geometric_db", b.geometric_db},
                            {"total_db", b.total_db}});
        }
    }
    emit_table(os, fmt, rows);
}

void cmd_per_vs_snr(const SystemConfig& cfg, const PerVsSnrOptions& opt,
                    OutputFormat fmt, std::ostream& os) {
    std::vector<ordered_json> rows;
    for (double snr : grid(opt.snr_start_db, opt.snr_stop_db, opt.snr_step_db)) {
        const double ber = ber_from_snr_db(snr);
        const double per = per_from_ber(ber, cfg.n_bits);
        if (!opt.montecarlo) {
            rows.push_back({{"snr_db", snr}, {"ber", ber}, {"per", per}});
            continue;
        }
        const MoaResult oa = oa_for_target_snr(snr, cfg.hw, cfg.noise);
        if (!oa.reachable) continue;
        const TransmissionStats stats =
            simulate_transmission(scenario_from(cfg, oa.moa_db, opt.n_workers));
        rows.push_back({{"snr_db", snr},
                        {"oa_db", oa.moa_db},
                        {"per_analytic", per},
                        {"per_measured", stats.per.per},
                        {"ci95_low", stats.per.ci95_low},
                        {"ci95_high", stats.per.ci95_high},
                        {"measured_snr_db", stats.measured_snr_db},
                        {"packets", stats.per.packets_sent}});
    }
    emit_table(os, fmt, rows);
}

void cmd_moa(const SystemConfig& cfg, const MoaOptions& opt, OutputFormat fmt,
             std::ostream& os) {
    std::vector<ordered_json> rows;
    for (double target : opt.per_targets) {
        const double ber = ber_from_per(target, cfg.n_bits);
        const MoaResult res = moa_for_per(target, cfg.hw, cfg.noise, cfg.n_bits);
        rows.push_back({{"per_target", target},
                        {"ber_target", ber},
                        {"snr_required_db",
                         20.0 * std::log10(q_function_inverse(ber))},
                        {"moa_db", res.moa_db},
                        {"reachable", res.reachable}});
    }
    emit_table(os, fmt, rows);
}

void cmd_link_length(const SystemConfig& cfg, const LinkLengthOptions& opt,
                     OutputFormat fmt, std::ostream& os) {
    double budget = 0.0;
    if (opt.budget_db) {
        budget = *opt.budget_db;
    } else {
        const MoaResult res =
            moa_for_per(opt.per_target, cfg.hw, cfg.noise, cfg.n_bits);
        if (!res.reachable)
            throw std::domain_error(
                "per target is not reachable, no loss budget exists");
        budget = res.moa_db;
    }
    std::vector<ordered_json> rows;
    for (double wl : opt.wavelengths_nm) {
        const MaxLengthResult res =
            max_link_length_m(cfg.atmosphere, cfg.geometry, wl, budget);
        rows.push_back({{"wavelength_nm", wl},
                        {"budget_db", budget},
                        {"max_length_m", res.distance_m},
                        {"unbounded", res.unbounded}});
    }
    emit_table(os, fmt, rows);
}

void cmd_regime_scan(const SystemConfig& cfg, const RegimeScanOptions& opt,
                     OutputFormat fmt, std::ostream& os) {
    std::vector<ordered_json> rows;
    for (double md : opt.mds) {
        LinkHardware hw = cfg.hw;
        hw.md = md;
        for (double moa : grid(opt.moa_start_db, opt.moa_stop_db, opt.moa_step_db)) {
            const RegimeReport rep = snr_piecewise_db(moa, hw, cfg.noise);
            rows.push_back(
                {{"md", md},
                 {"moa_db", moa},
                 {"snr_db", rep.snr_db},
                 {"sigma_total_v", rep.sigma_total_v},
                 {"regime", rep.regime == NoiseRegime::lar ? "lar" : "har"},
                 {"crossover_moa_db", rep.crossover_moa_db}});
        }
    }
    emit_table(os, fmt, rows);
}

void cmd_md_scan(const SystemConfig& cfg, const MdScanOptions& opt,
                 OutputFormat fmt, std::ostream& os) {
    std::vector<ordered_json> rows;
    for (double md : opt.mds) {
        LinkHardware hw = cfg.hw;
        hw.md = md;
        const RegimeReport rep = snr_piecewise_db(opt.oa_db, hw, cfg.noise);
        const double per = per_from_ber(ber_from_snr_db(rep.snr_db), cfg.n_bits);
        rows.push_back({{"md", md},
                        {"snr_db", rep.snr_db},
                        {"per", per},
                        {"error_free", per <= opt.per_target}});
    }
    const MdThreshold thr = md_threshold_for_error_free(
        opt.oa_db, cfg.hw, cfg.noise, opt.per_target, cfg.n_bits);

    if (fmt == OutputFormat::json) {
        ordered_json out;
        ordered_json arr = ordered_json::array();
        for (const auto& r : rows) arr.push_back(r);
        out["rows"] = arr;
        out["md_threshold"] = thr.md;
        out["reachable"] = thr.reachable;
        out["at_lower_bound"] = thr.at_lower_bound;
        os << out.dump(2) << '\n';
        return;
    }
    emit_table(os, fmt, rows);
    os << "# md_threshold = " << ordered_json(thr.md).dump()
       << " reachable = " << (thr.reachable ? "true" : "false")
       << " at_lower_bound = " << (thr.at_lower_bound ? "true" : "false")
       << '\n';
}

void cmd_simulate(const SystemConfig& cfg, const SimulateOptions& opt,
                  OutputFormat fmt, std::ostream& os) {
    Scenario sc = scenario_from(cfg, opt.oa_db, opt.n_workers);
    sc.eye_trace_cap = opt.eye_out_path.empty() ? 0 : opt.eye_trace_cap;
    const TransmissionStats stats = simulate_transmission(sc);

    ordered_json out{{"packets_sent", stats.per.packets_sent},
                     {"packets_errored", stats.per.packets_errored},
                     {"per", stats.per.per},
                     {"ci95_low", stats.per.ci95_low},
                     {"ci95_high", stats.per.ci95_high},
                     {"saturation_flag", stats.saturation_warning},
                     {"seed", sc.seed},
                     {"measured_snr_db", stats.measured_snr_db},
                     {"measured_s_pp_v", stats.measured_s_pp_v},
                     {"measured_sigma_v", stats.measured_sigma_v}};
    if (fmt == OutputFormat::json) {
        os << out.dump(2) << '\n';
    } else {
        emit_table(os, fmt, {out});
    }

    if (!opt.eye_out_path.empty()) {
        std::ofstream eye(opt.eye_out_path);
        if (!eye)
            throw config_error("cannot open eye output file '" +
                               opt.eye_out_path + "'");
        write_eye_csv(eye, stats.eye);
    }
}

} // namespace fsolink
