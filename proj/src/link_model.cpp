#include "fsolink/link_model.hpp"

#include <cmath>
#include <stdexcept>

namespace fsolink {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

} // namespace

void LinkHardware::validate() const {
    require(gain > 0.0, "gain must be positive");
    require(responsivity_v_per_w > 0.0, "responsivity must be positive");
    require(p_out_w > 0.0, "p_out must be positive");
    require(p_max_w > 0.0, "p_max must be positive");
    require(md > 0.0 && md <= 1.0, "md must be in (0, 1]");
    require(saturation_w > 0.0, "saturation power must be positive");
    if (!allow_overdrive)
        require(p_out_w <= p_max_w, "p_out exceeds p_max without overdrive");
}

void NoiseProfile::validate() const {
    require(sigma_detector_v > 0.0, "detector noise must be positive");
    require(sigma_source_v_at_ref >= 0.0, "source noise must be non-negative");
    require(ref_p_out_w > 0.0, "reference output power must be positive");
    require(std::isfinite(ref_oa_db), "reference attenuation must be finite");
}

double NoiseProfile::sigma_source_v(double oa_db, double p_out_w) const {
    return sigma_source_v_at_ref * std::pow(10.0, -(oa_db - ref_oa_db) / 10.0) *
           (p_out_w / ref_p_out_w);
}

double NoiseProfile::sigma_total_v(double oa_db, double p_out_w) const {
    const double src = sigma_source_v(oa_db, p_out_w);
    return std::sqrt(sigma_detector_v * sigma_detector_v + src * src);
}

double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double q_function_inverse(double p) {
    require(p > 0.0 && p <= 0.5, "q_function_inverse needs p in (0, 0.5]");
    double lo = 0.0;
    double hi = 40.0; // Q(40) ~ 1e-350, below double range; safe upper bracket
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (q_function(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double snr_db(double s_rx_pp_v, double sigma_rms_v) {
    require(s_rx_pp_v > 0.0, "signal must be positive");
    require(sigma_rms_v > 0.0, "noise must be positive");
    return 20.0 * std::log10(s_rx_pp_v / (2.0 * sigma_rms_v));
}

double ber_from_snr_db(double snr_db) {
    return q_function(std::pow(10.0, snr_db / 20.0));
}

double per_from_ber(double ber, int n_bits) {
    require(n_bits > 0, "n_bits must be positive");
    require(ber >= 0.0 && ber <= 1.0, "ber must be in [0, 1]");
    if (ber == 1.0) return 1.0;
    // 1 - (1-b)^n via log1p/expm1 to hold precision at small rates.
    return -std::expm1(static_cast<double>(n_bits) * std::log1p(-ber));
}

double ber_from_per(double per, int n_bits) {
    require(n_bits > 0, "n_bits must be positive");
    require(per >= 0.0 && per <= 1.0, "per must be in [0, 1]");
    if (per == 1.0) return 1.0;
    return -std::expm1(std::log1p(-per) / static_cast<double>(n_bits));
}

double incident_power_w(double s_rx_pp_v, const LinkHardware& hw) {
    hw.validate();
    require(s_rx_pp_v > 0.0, "signal must be positive");
    const double p_inc = s_rx_pp_v / (hw.gain * hw.responsivity_v_per_w * hw.md);
    if (p_inc >= hw.saturation_w)
        throw std::domain_error("incident power at or above detector saturation");
    return p_inc;
}

double optical_attenuation_db(double s_rx_pp_v, const LinkHardware& hw) {
    const double p_inc = incident_power_w(s_rx_pp_v, hw); // validates and guards
    return -10.0 * std::log10(p_inc / hw.p_out_w);
}

MoaResult moa_for_per(double per_target, const LinkHardware& hw,
                      const NoiseProfile& noise, int n_bits) {
    hw.validate();
    noise.validate();
    require(per_target > 0.0 && per_target < 1.0, "per target must be in (0, 1)");
    const double ber = ber_from_per(per_target, n_bits);
    require(ber <= 0.5, "per target implies ber above 0.5");
    const double snr_req_db = 20.0 * std::log10(q_function_inverse(ber));
    const double dynamics_db =
        20.0 * std::log10(hw.gain * hw.responsivity_v_per_w * hw.md * hw.p_max_w /
                          (2.0 * noise.sigma_detector_v));
    if (snr_req_db > dynamics_db) return {0.0, false};
    return {(dynamics_db - snr_req_db) / 2.0, true};
}

RegimeReport snr_piecewise_db(double moa_db, const LinkHardware& hw,
                              const NoiseProfile& noise) {
    hw.validate();
    noise.validate();
    require(std::isfinite(moa_db), "attenuation must be finite");
    RegimeReport report;
    const double s_rx = hw.gain * hw.responsivity_v_per_w * hw.md * hw.p_out_w *
                        std::pow(10.0, -moa_db / 10.0);
    const double sigma_src = noise.sigma_source_v(moa_db, hw.p_out_w);
    report.sigma_total_v = noise.sigma_total_v(moa_db, hw.p_out_w);
    report.snr_db = snr_db(s_rx, report.sigma_total_v);
    report.regime =
        sigma_src > noise.sigma_detector_v ? NoiseRegime::lar : NoiseRegime::har;
    // sigma_source(x) = sigma_detector solved in closed form.
    report.crossover_moa_db =
        noise.ref_oa_db +
        10.0 * std::log10(noise.sigma_source_v_at_ref / noise.sigma_detector_v *
                          (hw.p_out_w / noise.ref_p_out_w));
    return report;
}

MoaResult oa_for_target_snr(double target_snr_db, const LinkHardware& hw,
                            const NoiseProfile& noise) {
    hw.validate();
    noise.validate();
    require(std::isfinite(target_snr_db), "target snr must be finite");
    // snr_piecewise_db is non-increasing in attenuation: flat on the
    // source-limited plateau, then strictly decreasing. Bracket the target.
    const auto snr_at = [&](double oa) {
        return snr_piecewise_db(oa, hw, noise).snr_db;
    };
    double lo = 0.0;
    if (snr_at(lo) < target_snr_db + 1e-9) return {0.0, false};
    double hi = 1.0;
    while (snr_at(hi) > target_snr_db) {
        hi *= 2.0;
        if (hi > 1e6) return {0.0, false};
    }
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (snr_at(mid) > target_snr_db)
            lo = mid;
        else
            hi = mid;
    }
    return {0.5 * (lo + hi), true};
}

MdThreshold md_threshold_for_error_free(double oa_db, const LinkHardware& hw,
                                        const NoiseProfile& noise,
                                        double per_target, int n_bits) {
    hw.validate();
    noise.validate();
    require(per_target > 0.0 && per_target < 1.0, "per target must be in (0, 1)");
    require(std::isfinite(oa_db), "attenuation must be finite");
    constexpr double md_floor = 1e-6;
    const double sigma = noise.sigma_total_v(oa_db, hw.p_out_w);
    const auto per_at = [&](double md) {
        const double s_rx = hw.gain * hw.responsivity_v_per_w * md * hw.p_out_w *
                            std::pow(10.0, -oa_db / 10.0);
        return per_from_ber(ber_from_snr_db(snr_db(s_rx, sigma)), n_bits);
    };
    if (per_at(1.0) > per_target) return {1.0, false, false};
    if (per_at(md_floor) <= per_target) return {md_floor, true, true};
    double lo = md_floor; // fails the target
    double hi = 1.0;      // meets the target
    while (hi - lo > md_floor * 1e-3 && (hi - lo) / hi > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (per_at(mid) <= per_target)
            hi = mid;
        else
            lo = mid;
    }
    return {hi, true, false};
}

} // namespace fsolink
