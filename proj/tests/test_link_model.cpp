#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "fsolink/link_model.hpp"
#include "oracles.hpp"

using namespace fsolink;
using doctest::Approx;

namespace {

// Paired emitter/receiver as used throughout: laser driven at p_max.
LinkHardware full_power_hw() {
    LinkHardware hw;
    hw.p_out_w = hw.p_max_w;
    return hw;
}

// Detector-noise-only profile for Q-function-exact operating points.
NoiseProfile detector_only_noise() {
    NoiseProfile noise;
    noise.sigma_source_v_at_ref = 0.0;
    return noise;
}

} // namespace

// -- Q function --------------------------------------------------------------

TEST_CASE("q function against an independent quadrature oracle") {
    for (const double x : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0}) {
        CHECK(q_function(x) ==
              Approx(oracles::normal_tail_simpson(x)).epsilon(1e-8));
    }
}

TEST_CASE("q function pinned values") {
    CHECK(q_function(0.0) == Approx(0.5).epsilon(1e-15));
    CHECK(q_function(1.0) == Approx(0.15865525393145707).epsilon(1e-13));
    CHECK(q_function(3.162) == Approx(0.0007834478217107634).epsilon(1e-12));
    CHECK(q_function(5.012) == Approx(2.6933602035856235e-07).epsilon(1e-12));
    // Symmetry: Q(-x) = 1 - Q(x).
    CHECK(q_function(-1.0) ==
          Approx(1.0 - 0.15865525393145707).epsilon(1e-13));
}

TEST_CASE("q function inverse round-trips") {
    for (const double x : {0.1, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0}) {
        CHECK(q_function_inverse(q_function(x)) == Approx(x).epsilon(1e-9));
    }
    CHECK(std::abs(q_function_inverse(0.5)) <= 1e-11);
    CHECK_THROWS_AS(q_function_inverse(0.0), std::domain_error);
    CHECK_THROWS_AS(q_function_inverse(0.6), std::domain_error);
    CHECK_THROWS_AS(q_function_inverse(-0.1), std::domain_error);
}

// -- SNR / BER / PER chain ---------------------------------------------------

TEST_CASE("snr from peak-to-peak signal and rms noise") {
    CHECK(snr_db(0.1, 0.0023) == Approx(26.744843366368517).epsilon(1e-13));
    CHECK(snr_db(2.0 * 0.0023, 0.0023) == Approx(0.0).epsilon(1e-13));
    CHECK_THROWS_AS(snr_db(0.0, 0.0023), std::domain_error);
    CHECK_THROWS_AS(snr_db(0.1, 0.0), std::domain_error);
}

TEST_CASE("ber from snr uses the amplitude convention") {
    // BER = Q(10^(SNR_dB/20)).
    CHECK(ber_from_snr_db(10.0) == Approx(0.0007827011290012744).epsilon(1e-12));
    CHECK(ber_from_snr_db(13.0) == Approx(3.9692483963428305e-06).epsilon(1e-12));
    CHECK(ber_from_snr_db(20.0 * std::log10(3.162)) ==
          Approx(0.0007834478217107634).epsilon(1e-12));
}

TEST_CASE("packet error rate over 72 bit decisions") {
    CHECK(per_from_ber(0.0007834478217107634) ==
          Approx(0.05486769043624862).epsilon(1e-12));
    CHECK(per_from_ber(7.86e-4) == Approx(0.055041485372383986).epsilon(1e-12));
    CHECK(per_from_ber(0.0) == 0.0);
    CHECK(per_from_ber(1.0) == 1.0);
    CHECK(per_from_ber(0.25, 1) == Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(per_from_ber(1.5), std::domain_error);
    CHECK_THROWS_AS(per_from_ber(-0.1), std::domain_error);
    CHECK_THROWS_AS(per_from_ber(0.1, 0), std::domain_error);
}

TEST_CASE("ber from per is the exact inverse") {
    CHECK(ber_from_per(1.6e-5) == Approx(2.222239753272119e-07).epsilon(1e-12));
    CHECK(ber_from_per(1e-3) == Approx(1.389574141972877e-05).epsilon(1e-12));
    for (const double per : {1e-8, 1e-5, 0.05, 0.5, 0.99}) {
        CHECK(per_from_ber(ber_from_per(per)) == Approx(per).epsilon(1e-12));
    }
    // For tiny targets the bit and packet rates are proportional.
    CHECK(ber_from_per(1e-12) == Approx(1e-12 / 72.0).epsilon(1e-6));
    CHECK_THROWS_AS(ber_from_per(-0.1), std::domain_error);
}

// -- attenuation bookkeeping -------------------------------------------------

TEST_CASE("received voltage maps back to attenuation and incident power") {
    const LinkHardware hw = full_power_hw();
    CHECK(optical_attenuation_db(0.1, hw) == Approx(41.91536104371732).epsilon(1e-12));
    CHECK(incident_power_w(0.1, hw) ==
          Approx(1.3510866114072243e-06).epsilon(1e-12));

    // Zero attenuation: the full modulated swing arrives. Needs a source
    // below detector saturation, or the inversion (rightly) refuses.
    LinkHardware weak = hw;
    weak.p_out_w = 1e-3;
    const double s_full =
        weak.gain * weak.responsivity_v_per_w * weak.md * weak.p_out_w;
    CHECK(optical_attenuation_db(s_full, weak) == Approx(0.0).epsilon(1e-9));

    const double s_sat = hw.gain * hw.responsivity_v_per_w * hw.md * hw.saturation_w;
    CHECK_THROWS_AS(incident_power_w(s_sat, hw), std::domain_error);
    CHECK(incident_power_w(0.9 * s_sat, hw) ==
          Approx(0.9 * hw.saturation_w).epsilon(1e-12));
    CHECK_THROWS_AS(incident_power_w(0.0, hw), std::domain_error);
}

// -- maximum optical attenuation ---------------------------------------------

TEST_CASE("moa for the headline error-rate targets") {
    const LinkHardware hw; // MOA runs the laser at p_max regardless of p_out
    const NoiseProfile noise;
    CHECK(moa_for_per(1.6e-5, hw, noise).moa_db ==
          Approx(48.255847100762224).epsilon(1e-12));
    CHECK(moa_for_per(1e-3, hw, noise).moa_db ==
          Approx(49.06476450069405).epsilon(1e-12));
    CHECK(moa_for_per(0.5, hw, noise).moa_db ==
          Approx(51.591227644510006).epsilon(1e-12));
    CHECK(moa_for_per(1.6e-5, hw, noise).reachable);

    // Loosening the target from 1e-4 to 1e-1 buys close to 2 dB.
    const double gained = moa_for_per(1e-1, hw, noise).moa_db -
                          moa_for_per(1e-4, hw, noise).moa_db;
    CHECK(moa_for_per(1e-1, hw, noise).moa_db ==
          Approx(50.552095504729564).epsilon(1e-12));
    CHECK(moa_for_per(1e-4, hw, noise).moa_db ==
          Approx(48.57921091639951).epsilon(1e-12));
    CHECK(gained == Approx(1.9728845883300536).epsilon(1e-9));
}

TEST_CASE("moa degenerates to half the link dynamics at snr_req = 0") {
    // A target BER of Q(1) needs 10^(SNR/20) = 1, i.e. SNR_req = 0 dB, so
    // the MOA collapses to D/2.
    const LinkHardware hw;
    const NoiseProfile noise;
    const double target = per_from_ber(q_function(1.0));
    const auto res = moa_for_per(target, hw, noise);
    CHECK(res.moa_db == Approx(55.28778272689982).epsilon(1e-9));
    const double d_db = 20.0 * std::log10(hw.gain * hw.responsivity_v_per_w *
                                          hw.md * hw.p_max_w /
                                          (2.0 * noise.sigma_detector_v));
    CHECK(d_db == Approx(110.57556545380316).epsilon(1e-12));
    CHECK(std::abs(res.moa_db - d_db / 2.0) < 1e-6);
}

TEST_CASE("moa reports unreachable targets") {
    const LinkHardware hw;
    NoiseProfile noise;
    noise.sigma_detector_v = 1e6; // link dynamics collapse
    const auto res = moa_for_per(1.6e-5, hw, noise);
    CHECK_FALSE(res.reachable);
    CHECK_THROWS_AS(moa_for_per(0.0, hw, noise), std::domain_error);
    CHECK_THROWS_AS(moa_for_per(1.0, hw, noise), std::domain_error);
}

// -- noise profile -----------------------------------------------------------

TEST_CASE("source noise scales with received optical power") {
    const NoiseProfile noise;
    // At the calibration point the term reproduces itself.
    CHECK(noise.sigma_source_v(13.0, 0.0129) == Approx(0.040).epsilon(1e-12));
    // +10 dB attenuation is 10x less received power, 10x less source noise.
    CHECK(noise.sigma_source_v(23.0, 0.0129) == Approx(0.004).epsilon(1e-12));
    // Half the launch power, half the source noise.
    CHECK(noise.sigma_source_v(13.0, 0.00645) == Approx(0.020).epsilon(1e-12));
    CHECK(noise.sigma_total_v(13.0, 0.0129) ==
          Approx(0.040066070433722345).epsilon(1e-12));

    NoiseProfile quiet;
    quiet.sigma_source_v_at_ref = 0.0;
    CHECK(quiet.sigma_source_v(13.0, 0.0129) == 0.0);
    CHECK(quiet.sigma_total_v(13.0, 0.0129) ==
          Approx(quiet.sigma_detector_v).epsilon(1e-15));
}

TEST_CASE("noise profile validation") {
    NoiseProfile noise;
    noise.sigma_detector_v = 0.0;
    CHECK_THROWS_AS(noise.validate(), std::domain_error);
    noise.sigma_detector_v = 0.0023;
    noise.sigma_source_v_at_ref = -0.01;
    CHECK_THROWS_AS(noise.validate(), std::domain_error);

    LinkHardware hw;
    hw.p_out_w = hw.p_max_w + 0.001;
    CHECK_THROWS_AS(hw.validate(), std::domain_error);
    hw.allow_overdrive = true;
    CHECK_NOTHROW(hw.validate());
    hw.md = 0.0;
    CHECK_THROWS_AS(hw.validate(), std::domain_error);
    hw.md = 1.5;
    CHECK_THROWS_AS(hw.validate(), std::domain_error);
}

// -- two-regime SNR model ----------------------------------------------------

TEST_CASE("piecewise snr plateau, crossover and har slope") {
    const LinkHardware hw;
    const NoiseProfile noise;

    const auto flat = snr_piecewise_db(0.0, hw, noise);
    CHECK(flat.snr_db == Approx(55.53629459122324).epsilon(1e-12));
    CHECK(snr_piecewise_db(5.0, hw, noise).snr_db ==
          Approx(55.53596999558965).epsilon(1e-12));
    CHECK(flat.crossover_moa_db == Approx(25.403321553103694).epsilon(1e-12));

    // Where source and detector noise match, the quadrature sum sits about
    // 3 dB under the plateau.
    const auto cross = snr_piecewise_db(flat.crossover_moa_db, hw, noise);
    CHECK(cross.snr_db - flat.snr_db ==
          Approx(-3.0102638889606794).epsilon(1e-9));

    // Deep detector-limited regime: 2 dB of SNR per dB of attenuation.
    const double deep = snr_piecewise_db(50.0, hw, noise).snr_db -
                        snr_piecewise_db(48.0, hw, noise).snr_db;
    CHECK(deep == Approx(-3.9999209396725037).epsilon(1e-9));

    CHECK(snr_piecewise_db(14.0, hw, noise).regime == NoiseRegime::lar);
    CHECK(snr_piecewise_db(40.0, hw, noise).regime == NoiseRegime::har);
    CHECK(snr_piecewise_db(13.0, hw, noise).sigma_total_v ==
          Approx(0.040066070433722345).epsilon(1e-12));
}

TEST_CASE("piecewise snr shifts by 20 log10 of the modulation depth") {
    LinkHardware shallow;
    shallow.md = 0.5;
    const LinkHardware hw;
    const NoiseProfile noise;
    const double full = snr_piecewise_db(30.0, hw, noise).snr_db;
    const double half = snr_piecewise_db(30.0, shallow, noise).snr_db;
    CHECK(half - full == Approx(20.0 * std::log10(0.5)).epsilon(1e-9));
}

TEST_CASE("oa for a target snr inverts the piecewise model") {
    const LinkHardware hw;
    const NoiseProfile noise;
    const double snr_at_30 = snr_piecewise_db(30.0, hw, noise).snr_db;
    const auto back = oa_for_target_snr(snr_at_30, hw, noise);
    CHECK(back.reachable);
    CHECK(back.moa_db == Approx(30.0).epsilon(1e-6));

    // Targets above the source-noise plateau cannot be reached by attenuating.
    CHECK_FALSE(oa_for_target_snr(56.0, hw, noise).reachable);
}

TEST_CASE("oa for target snr in the detector-only configuration") {
    // Full power, no source noise: used to park the simulator on exact
    // Q-function operating points.
    const LinkHardware hw = full_power_hw();
    const NoiseProfile noise = detector_only_noise();
    CHECK(oa_for_target_snr(8.0, hw, noise).moa_db ==
          Approx(51.28778272690158).epsilon(1e-9));
    CHECK(oa_for_target_snr(10.0, hw, noise).moa_db ==
          Approx(50.28778272690158).epsilon(1e-9));
    CHECK(oa_for_target_snr(12.0, hw, noise).moa_db ==
          Approx(49.28778272690158).epsilon(1e-9));
}

// -- modulation depth threshold ----------------------------------------------

TEST_CASE("md threshold at the reference attenuation") {
    const LinkHardware hw;
    const NoiseProfile noise;
    const auto res = md_threshold_for_error_free(13.0, hw, noise, 1.6e-5);
    CHECK(res.reachable);
    CHECK_FALSE(res.at_lower_bound);
    CHECK(res.md == Approx(0.008454614079008816).epsilon(1e-5));

    // PER at the threshold meets the target; slightly below it does not.
    LinkHardware at = hw;
    at.md = res.md;
    LinkHardware below = hw;
    below.md = res.md * 0.98;
    const double per_at =
        per_from_ber(ber_from_snr_db(snr_piecewise_db(13.0, at, noise).snr_db));
    const double per_below = per_from_ber(
        ber_from_snr_db(snr_piecewise_db(13.0, below, noise).snr_db));
    CHECK(per_at <= 1.6e-5);
    CHECK(per_below > 1.6e-5);

    const auto loose = md_threshold_for_error_free(13.0, hw, noise, 0.5);
    CHECK(loose.md == Approx(0.003922434807098481).epsilon(1e-5));
}

TEST_CASE("md threshold limit cases") {
    const LinkHardware hw;
    const NoiseProfile noise;
    // Far into the detector-limited regime even md = 1 misses the target.
    const auto out = md_threshold_for_error_free(60.0, hw, noise, 1.6e-5);
    CHECK_FALSE(out.reachable);
    CHECK(out.md == Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(out.at_lower_bound);

    // Essentially noiseless link: the solver floor already meets the target.
    NoiseProfile quiet;
    quiet.sigma_detector_v = 1e-12;
    quiet.sigma_source_v_at_ref = 0.0;
    const auto floor = md_threshold_for_error_free(0.0, hw, quiet, 1.6e-5);
    CHECK(floor.reachable);
    CHECK(floor.at_lower_bound);
    CHECK(floor.md == Approx(1e-6).epsilon(1e-9));

    CHECK_THROWS_AS(md_threshold_for_error_free(13.0, hw, noise, 0.0),
                    std::domain_error);
}
