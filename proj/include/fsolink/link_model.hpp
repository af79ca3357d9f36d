#pragma once

namespace fsolink {

// ---------------------------------------------------------------------------
// Analytic OOK link budget: Q-function error chain, optical attenuation from
// the receiver voltage, maximum optical attenuation (MOA) for a target packet
// error rate, and the two-regime SNR model (source-limited vs detector-
// limited noise).
//
// Conventions: S_RX is the received peak-to-peak signal voltage;
// SNR(dB) = 20*log10(S_RX / (2*sigma_RMS)); BER = Q(10^(SNR_dB/20)).
// ---------------------------------------------------------------------------

/// Emitter/detector constants of the transceiver pair.
struct LinkHardware {
    double gain = 26.5;                   ///< post-detector AC amplifier gain
    double responsivity_v_per_w = 2793.0; ///< detector + transimpedance [V/W]
    double p_out_w = 0.0129;              ///< operating optical output power
    double p_max_w = 0.021;               ///< maximum optical output power
    double md = 1.0;                      ///< modulation depth, (0, 1]
    double saturation_w = 0.0012;         ///< detector saturation power
    bool allow_overdrive = false;         ///< permit p_out_w > p_max_w

    void validate() const;
};

/// Noise amplitudes of the receive chain. The source term is calibrated at a
/// reference attenuation and output power and scales linearly with received
/// optical power; the detector term is attenuation-independent.
struct NoiseProfile {
    double sigma_detector_v = 0.0023;
    double sigma_source_v_at_ref = 0.040; ///< 0 disables the source term
    double ref_oa_db = 13.0;
    double ref_p_out_w = 0.0129;

    void validate() const;
    /// Source-noise RMS at the given attenuation and output power.
    double sigma_source_v(double oa_db, double p_out_w) const;
    /// Quadrature sum of detector and source terms.
    double sigma_total_v(double oa_db, double p_out_w) const;
};

enum class NoiseRegime {
    har, ///< high-attenuation: detector noise dominates
    lar  ///< low-attenuation: source noise dominates
};

struct RegimeReport {
    double snr_db = 0.0;
    double sigma_total_v = 0.0;
    double crossover_moa_db = 0.0; ///< where source and detector noise are equal
    NoiseRegime regime = NoiseRegime::har;
};

// -- error-rate chain -------------------------------------------------------

/// Gaussian tail probability Q(x) = 0.5 * erfc(x / sqrt(2)).
double q_function(double x);

/// Inverse of q_function on (0, 0.5], by bisection to 1e-12 absolute.
double q_function_inverse(double p);

/// SNR in dB from peak-to-peak signal and RMS noise.
double snr_db(double s_rx_pp_v, double sigma_rms_v);

/// OOK bit error rate at the given SNR (amplitude convention).
double ber_from_snr_db(double snr_db);

/// Packet error rate for n_bits independent bit decisions.
double per_from_ber(double ber, int n_bits = 72);

/// Exact inverse of per_from_ber.
double ber_from_per(double per, int n_bits = 72);

// -- attenuation bookkeeping ------------------------------------------------

/// Optical power incident on the detector for a received signal voltage.
/// Throws std::domain_error at or above the detector saturation power.
double incident_power_w(double s_rx_pp_v, const LinkHardware& hw);

/// Channel attenuation inferred from the received voltage:
/// -10*log10(S_RX / (gain * responsivity * md * p_out)).
double optical_attenuation_db(double s_rx_pp_v, const LinkHardware& hw);

struct MoaResult {
    double moa_db = 0.0;
    bool reachable = true; ///< false when SNR_req exceeds the link dynamics
};

/// Maximum optical attenuation that still meets per_target with the laser at
/// p_max_w: MOA = (D - SNR_req)/2,
/// D = 20*log10(gain * responsivity * md * p_max / (2*sigma_detector)).
MoaResult moa_for_per(double per_target, const LinkHardware& hw,
                      const NoiseProfile& noise, int n_bits = 72);

/// SNR at the given attenuation with the laser at p_out_w, with source and
/// detector noise combined in quadrature. Flat (source-limited) at low
/// attenuation; -2 dB per dB of attenuation deep in the detector-limited
/// regime.
RegimeReport snr_piecewise_db(double moa_db, const LinkHardware& hw,
                              const NoiseProfile& noise);

/// Attenuation at which the analytic SNR equals target_snr_db (inverse of
/// snr_piecewise_db), bisected to 1e-9 dB. reachable=false when the target
/// sits above the source-limited plateau.
MoaResult oa_for_target_snr(double target_snr_db, const LinkHardware& hw,
                            const NoiseProfile& noise);

struct MdThreshold {
    double md = 0.0;
    bool reachable = true;      ///< false when even md = 1 misses the target
    bool at_lower_bound = false; ///< threshold pinned at the solver floor
};

/// Smallest modulation depth whose predicted PER meets per_target at the
/// given attenuation (laser at p_out_w), by bisection on md in [1e-6, 1].
MdThreshold md_threshold_for_error_free(double oa_db, const LinkHardware& hw,
                                        const NoiseProfile& noise,
                                        double per_target, int n_bits = 72);

} // namespace fsolink
