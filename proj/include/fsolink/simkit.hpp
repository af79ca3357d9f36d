#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "fsolink/codec.hpp"
#include "fsolink/link_model.hpp"

namespace fsolink {

// ---------------------------------------------------------------------------
// Bit-true Monte Carlo transmission harness. A packet is rendered as a
// sampled optical waveform, pushed through the detector chain (saturation
// clamp, single-pole low-pass, AC coupling), perturbed with detector and
// source noise, re-digitized, and compared bit-for-bit against what was
// sent. Every random draw is derived from (seed, packet index, purpose), so
// results are identical for any worker count.
// ---------------------------------------------------------------------------

/// Sampling and filtering constants of the receive chain.
struct DetectorChainConfig {
    double sample_rate_hz = 3.6864e6;    ///< 16 samples per 230.4 kHz chip
    double lowpass_cutoff_hz = 2.5e6;    ///< detector bandwidth, single pole
    double ac_coupling_cutoff_hz = 10.0; ///< amplifier high-pass corner
    bool enable_lowpass = true;
    bool enable_ac_coupling = true;

    void validate() const;
};

/// Integer oversampling factor; throws when the rates do not divide evenly.
int samples_per_chip(const DetectorChainConfig& cfg, double chip_rate_hz);

/// Optical power levels for on/off chips at mean incident power p_inc_w and
/// modulation depth md: p_inc * (1 +- md/2).
struct OpticalLevels {
    double p_high_w = 0.0;
    double p_low_w = 0.0;
    double p_mean_w = 0.0;
};
OpticalLevels optical_levels(double p_inc_w, double md);

/// Piecewise-constant optical waveform for a chip sequence.
std::vector<double> render_waveform(const ChipStream& stream, double p_high_w,
                                    double p_low_w,
                                    const DetectorChainConfig& cfg);

struct ChainResult {
    std::vector<double> v;  ///< receiver voltage samples
    bool saturated = false; ///< any input sample hit the clamp
};

/// Detector front end: clamp at the saturation power, scale by
/// gain * responsivity, then the two single-pole filters (impulse-invariant
/// discretization). Both filters start in steady state for a constant input
/// of dc_power_w, as on a long-running chip stream.
ChainResult detector_chain(const std::vector<double>& power_w,
                           const LinkHardware& hw,
                           const DetectorChainConfig& cfg, double dc_power_w);

/// White Gaussian voltage noise, sigma_v RMS.
std::vector<double> gen_awgn(double sigma_v, std::size_t n, std::uint64_t seed);

/// 1/f voltage noise between f_low_hz and f_high_hz (clamped to Nyquist),
/// built from octave-spaced AR(1) sections with power proportional to their
/// corner frequency. Stationary from the first sample; RMS is exactly
/// sigma_v in expectation.
std::vector<double> gen_flicker(double sigma_v, double f_low_hz,
                                double f_high_hz, std::size_t n, double fs_hz,
                                std::uint64_t seed);

/// One Monte Carlo operating point.
struct Scenario {
    LinkHardware hw{};
    NoiseProfile noise{};
    DetectorChainConfig chain{};
    double oa_db = 13.0;            ///< optical attenuation applied to p_out_w
    double flicker_low_hz = 10.0;   ///< source-noise band, matches the chain
    double flicker_high_hz = 2.5e6;
    std::size_t n_packets = 62500;
    std::uint64_t seed = 1;
    ComparatorMode comparator = ComparatorMode::mid_sample;
    int n_workers = 0;              ///< 0: one per hardware thread
    std::size_t eye_trace_cap = 128;

    void validate() const;
};

/// Overlaid two-bit traces of the noisy receiver voltage.
struct EyeMatrix {
    double sample_rate_hz = 3.6864e6;
    double bit_rate_hz = 115200.0;
    std::size_t samples_per_trace = 64;
    std::vector<std::vector<double>> traces;
};

struct TransmissionStats {
    PerEstimate per{};
    EyeMatrix eye{};
    double measured_s_pp_v = 0.0;  ///< class-mean separation at chip centers
    double measured_sigma_v = 0.0; ///< pooled within-class RMS deviation
    double measured_snr_db = 0.0;  ///< 20*log10(s_pp / (2*sigma))
    std::uint64_t saturated_packets = 0;
    bool saturation_warning = false; ///< more than 1% of packets clamped
};

/// Runs the full scenario. A packet is errored when the sync scan fails to
/// lock where the frame actually is or any of its 72 frame bits decodes
/// wrong.
TransmissionStats simulate_transmission(const Scenario& sc);

/// Eye diagram as CSV: header row is the time axis in microseconds, then one
/// row per trace.
void write_eye_csv(std::ostream& os, const EyeMatrix& eye);

} // namespace fsolink
