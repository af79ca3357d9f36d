#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fsolink/config.hpp"

namespace fsolink {

// ---------------------------------------------------------------------------
// Report generators behind the CLI subcommands. Each one runs a study over a
// SystemConfig and writes a table to the stream, either as CSV with a header
// row or as a JSON array of row objects.
// ---------------------------------------------------------------------------

enum class OutputFormat { csv, json };

/// Per-term attenuation budget over distance for a set of wavelengths.
struct AttenuationScanOptions {
    std::vector<double> wavelengths_nm{1557.7, 3998.6, 4720.0};
    double max_distance_m = 20000.0;
    double step_m = 100.0;
};
void cmd_attenuation(const SystemConfig& cfg, const AttenuationScanOptions& opt,
                     OutputFormat fmt, std::ostream& os);

/// Packet error rate against SNR, analytic or Monte Carlo. Monte Carlo rows
/// pick the attenuation that lands the analytic SNR on the target, then
/// simulate at that operating point; targets above the source-noise plateau
/// are skipped.
struct PerVsSnrOptions {
    double snr_start_db = 6.0;
    double snr_stop_db = 16.0;
    double snr_step_db = 1.0;
    bool montecarlo = false;
    int n_workers = 0;
};
void cmd_per_vs_snr(const SystemConfig& cfg, const PerVsSnrOptions& opt,
                    OutputFormat fmt, std::ostream& os);

/// Maximum optical attenuation meeting each target packet error rate.
struct MoaOptions {
    std::vector<double> per_targets{1.6e-5, 1e-3};
};
void cmd_moa(const SystemConfig& cfg, const MoaOptions& opt, OutputFormat fmt,
             std::ostream& os);

/// Maximum link length per wavelength for a loss budget; the budget defaults
/// to the MOA at per_target.
struct LinkLengthOptions {
    std::vector<double> wavelengths_nm{1557.7, 3998.6, 4720.0};
    std::optional<double> budget_db;
    double per_target = 1.6e-5;
};
void cmd_link_length(const SystemConfig& cfg, const LinkLengthOptions& opt,
                     OutputFormat fmt, std::ostream& os);

/// Analytic SNR against attenuation for several modulation depths, with the
/// active noise regime and the regime crossover.
struct RegimeScanOptions {
    std::vector<double> mds{0.005, 0.007, 0.01};
    double moa_start_db = 14.0;
    double moa_stop_db = 40.0;
    double moa_step_db = 2.0;
};
void cmd_regime_scan(const SystemConfig& cfg, const RegimeScanOptions& opt,
                     OutputFormat fmt, std::ostream& os);

/// Predicted error rate per modulation depth at a fixed attenuation, plus
/// the smallest depth that still meets the target.
struct MdScanOptions {
    double oa_db = 13.0;
    std::vector<double> mds{0.001, 0.002, 0.003, 0.004, 0.005, 0.006,
                            0.007, 0.008, 0.009, 0.010, 0.015, 0.020};
    double per_target = 1.6e-5;
};
void cmd_md_scan(const SystemConfig& cfg, const MdScanOptions& opt,
                 OutputFormat fmt, std::ostream& os);

/// One bit-true Monte Carlo run at a fixed attenuation. The error estimate
/// goes to the stream; the eye diagram goes to eye_out_path when set.
struct SimulateOptions {
    double oa_db = 13.0;
    int n_workers = 0;
    std::string eye_out_path;
    std::size_t eye_trace_cap = 128;
};
void cmd_simulate(const SystemConfig& cfg, const SimulateOptions& opt,
                  OutputFormat fmt, std::ostream& os);

} // namespace fsolink
