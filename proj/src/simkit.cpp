#include "fsolink/simkit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fsolink/rng.hpp"

namespace fsolink {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

// Transmitted frames are fronted by a short alternating-bit run so the
// low-pass transient never overlaps the frame; it is rendered, filtered and
// discarded. AC-coupling droop is handled by steady-state initialization
// instead (the 10 Hz corner is far too slow to settle inside any warmup).
constexpr int k_warmup_bits = 8;

} // namespace

void DetectorChainConfig::validate() const {
    require(sample_rate_hz > 0.0, "sample rate must be positive");
    require(!enable_lowpass || lowpass_cutoff_hz > 0.0,
            "low-pass cutoff must be positive");
    require(!enable_ac_coupling || ac_coupling_cutoff_hz > 0.0,
            "AC-coupling cutoff must be positive");
}

int samples_per_chip(const DetectorChainConfig& cfg, double chip_rate_hz) {
    require(chip_rate_hz > 0.0, "chip rate must be positive");
    const double ratio = cfg.sample_rate_hz / chip_rate_hz;
    const double rounded = std::round(ratio);
    require(rounded >= 2.0 && std::abs(ratio - rounded) < 1e-9 * rounded,
            "sample rate must be an integer multiple (>= 2) of the chip rate");
    return static_cast<int>(rounded);
}

OpticalLevels optical_levels(double p_inc_w, double md) {
    require(p_inc_w >= 0.0, "incident power must be non-negative");
    require(md > 0.0 && md <= 1.0, "modulation depth must be in (0, 1]");
    OpticalLevels lv;
    lv.p_mean_w = p_inc_w;
    lv.p_high_w = p_inc_w * (1.0 + md / 2.0);
    lv.p_low_w = p_inc_w * (1.0 - md / 2.0);
    return lv;
}

std::vector<double> render_waveform(const ChipStream& stream, double p_high_w,
                                    double p_low_w,
                                    const DetectorChainConfig& cfg) {
    const int spc = samples_per_chip(cfg, stream.chip_rate_hz);
    std::vector<double> wave;
    wave.reserve(stream.chips.size() * static_cast<std::size_t>(spc));
    for (std::uint8_t chip : stream.chips) {
        const double level = chip ? p_high_w : p_low_w;
        wave.insert(wave.end(), static_cast<std::size_t>(spc), level);
    }
    return wave;
}

ChainResult detector_chain(const std::vector<double>& power_w,
                           const LinkHardware& hw,
                           const DetectorChainConfig& cfg, double dc_power_w) {
    hw.validate();
    cfg.validate();
    const double scale = hw.gain * hw.responsivity_v_per_w;
    const double sat = hw.saturation_w;

    ChainResult out;
    out.v.resize(power_w.size());
    for (std::size_t i = 0; i < power_w.size(); ++i) {
        double p = power_w[i];
        if (p >= sat) {
            p = sat;
            out.saturated = true;
        }
        out.v[i] = scale * p;
    }
    const double dc_v = scale * std::min(dc_power_w, sat);

    if (cfg.enable_lowpass) {
        // Impulse-invariant single pole; started from the DC operating point.
        const double a =
            std::exp(-2.0 * M_PI * cfg.lowpass_cutoff_hz / cfg.sample_rate_hz);
        double y = dc_v;
        for (double& v : out.v) {
            y = a * y + (1.0 - a) * v;
            v = y;
        }
    }
    if (cfg.enable_ac_coupling) {
        // Matched-pole high pass; zero output is the steady state at DC.
        const double r = std::exp(-2.0 * M_PI * cfg.ac_coupling_cutoff_hz /
                                  cfg.sample_rate_hz);
        double x_prev = dc_v;
        double y = 0.0;
        for (double& v : out.v) {
            y = r * (y + v - x_prev);
            x_prev = v;
            v = y;
        }
    }
    return out;
}

std::vector<double> gen_awgn(double sigma_v, std::size_t n,
                             std::uint64_t seed) {
    require(sigma_v >= 0.0, "noise RMS must be non-negative");
    std::vector<double> out(n, 0.0);
    if (sigma_v == 0.0) return out;
    Xoshiro256 rng(seed);
    for (double& v : out) v = sigma_v * rng.next_normal();
    return out;
}

std::vector<double> gen_flicker(double sigma_v, double f_low_hz,
                                double f_high_hz, std::size_t n, double fs_hz,
                                std::uint64_t seed) {
    require(sigma_v >= 0.0, "noise RMS must be non-negative");
    std::vector<double> out(n, 0.0);
    if (sigma_v == 0.0 || n == 0) return out;

    require(fs_hz > 0.0, "sample rate must be positive");
    const double f_hi = std::min(f_high_hz, fs_hz / 2.0);
    require(f_low_hz > 0.0 && f_low_hz <= f_hi,
            "flicker band must satisfy 0 < f_low <= f_high");

    // Octave-spaced AR(1) sections with equal stationary variance. Each
    // Lorentzian's plateau scales as 1/corner, so at any in-band frequency
    // the nearest corners dominate and the stack falls off as 1/f.
    struct Section {
        double rho = 0.0;
        double drive = 0.0;
        double state = 0.0;
    };
    std::vector<Section> ladder;
    for (double f = f_low_hz; f <= f_hi * (1.0 + 1e-12); f *= 2.0) {
        Section s;
        s.rho = std::exp(-2.0 * M_PI * f / fs_hz);
        s.drive = std::sqrt(1.0 - s.rho * s.rho);
        ladder.push_back(s);
    }
    const double var_sum = static_cast<double>(ladder.size());

    Xoshiro256 rng(seed);
    for (Section& s : ladder) s.state = rng.next_normal();
    const double scale = sigma_v / std::sqrt(var_sum);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Section& s : ladder) {
            s.state = s.rho * s.state + s.drive * rng.next_normal();
            acc += s.state;
        }
        out[i] = scale * acc;
    }
    return out;
}

void Scenario::validate() const {
    hw.validate();
    noise.validate();
    chain.validate();
    require(oa_db >= 0.0, "optical attenuation must be non-negative");
    require(n_packets > 0, "packet count must be positive");
    require(n_workers >= 0, "worker count must be non-negative");
    require(flicker_low_hz > 0.0 && flicker_low_hz <= flicker_high_hz,
            "flicker band must satisfy 0 < f_low <= f_high");
}

namespace {

// Per-packet accumulator; reduced serially in packet order so the totals do
// not depend on how packets were distributed over workers.
struct PacketResult {
    bool errored = false;
    bool saturated = false;
    double sum_hi = 0.0, sumsq_hi = 0.0;
    double sum_lo = 0.0, sumsq_lo = 0.0;
    std::uint32_t n_hi = 0, n_lo = 0;
};

enum StreamPurpose : std::uint64_t {
    purpose_payload = 0,
    purpose_awgn = 1,
    purpose_flicker = 2
};

} // namespace

TransmissionStats simulate_transmission(const Scenario& sc) {
    sc.validate();

    const double chip_rate_hz = 230400.0;
    const int spc = samples_per_chip(sc.chain, chip_rate_hz);
    const std::size_t frame_chips =
        static_cast<std::size_t>(frame_bit_count) * 2;
    const std::size_t warmup_chips = static_cast<std::size_t>(k_warmup_bits) * 2;
    const std::size_t warmup_samples = warmup_chips * spc;
    const std::size_t eq_samples =
        static_cast<std::size_t>(equalization_bytes.size()) * 16 * spc;

    const double p_inc_w = sc.hw.p_out_w * std::pow(10.0, -sc.oa_db / 10.0);
    const OpticalLevels levels = optical_levels(p_inc_w, sc.hw.md);
    const double sigma_det = sc.noise.sigma_detector_v;
    const double sigma_src = sc.noise.sigma_source_v(sc.oa_db, sc.hw.p_out_w);

    std::vector<std::uint8_t> warmup_bits(k_warmup_bits);
    for (int i = 0; i < k_warmup_bits; ++i)
        warmup_bits[i] = static_cast<std::uint8_t>((i + 1) & 1);
    const ChipStream warmup_stream = manchester_encode(warmup_bits, chip_rate_hz);

    // 72 bits in two-bit windows, stride two bits: 36 traces per packet.
    const std::size_t eye_windows = frame_bit_count / 2;
    const std::size_t eye_packets =
        sc.eye_trace_cap == 0
            ? 0
            : (sc.eye_trace_cap + eye_windows - 1) / eye_windows;
    const std::size_t trace_len = static_cast<std::size_t>(4) * spc;

    std::vector<PacketResult> results(sc.n_packets);
    std::vector<std::vector<std::vector<double>>> eye_slots(
        std::min<std::size_t>(eye_packets, sc.n_packets));

    auto run_packet = [&](std::size_t idx) {
        PacketResult& res = results[idx];

        Xoshiro256 payload_rng(derive_seed(sc.seed, idx, purpose_payload));
        const std::uint64_t raw = payload_rng.next_u64();
        Payload payload{};
        for (int b = 0; b < 4; ++b)
            payload[static_cast<std::size_t>(b)] =
                static_cast<std::uint8_t>((raw >> (8 * b)) & 0xFF);

        const FrameBytes frame = build_frame(payload);
        const std::vector<std::uint8_t> tx_bits = bytes_to_bits(frame);
        const ChipStream frame_stream = manchester_encode(tx_bits, chip_rate_hz);

        ChipStream tx_stream;
        tx_stream.chip_rate_hz = chip_rate_hz;
        tx_stream.chips = warmup_stream.chips;
        tx_stream.chips.insert(tx_stream.chips.end(),
                               frame_stream.chips.begin(),
                               frame_stream.chips.end());

        const std::vector<double> optical = render_waveform(
            tx_stream, levels.p_high_w, levels.p_low_w, sc.chain);
        ChainResult chain =
            detector_chain(optical, sc.hw, sc.chain, levels.p_mean_w);
        res.saturated = chain.saturated;

        std::vector<double> v(chain.v.begin() +
                                  static_cast<std::ptrdiff_t>(warmup_samples),
                              chain.v.end());

        // Noise enters after the front end: the detector term is wideband at
        // the comparator, the source term carries the 1/f spectrum.
        if (sigma_det > 0.0) {
            const std::vector<double> white = gen_awgn(
                sigma_det, v.size(), derive_seed(sc.seed, idx, purpose_awgn));
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += white[i];
        }
        if (sigma_src > 0.0) {
            const std::vector<double> pink = gen_flicker(
                sigma_src, sc.flicker_low_hz, sc.flicker_high_hz, v.size(),
                sc.chain.sample_rate_hz, derive_seed(sc.seed, idx, purpose_flicker));
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += pink[i];
        }

        // Decision threshold from the equalization run, as a receiver that
        // has no side channel would set it.
        double eq_mean = 0.0;
        for (std::size_t i = 0; i < eq_samples; ++i) eq_mean += v[i];
        eq_mean /= static_cast<double>(eq_samples);

        const ChipStream rx =
            digitize(v, eq_mean, spc, sc.comparator, chip_rate_hz);

        // A packet survives only when the sync scan locks exactly where the
        // frame is and all 72 bit decisions match what was sent.
        bool ok = false;
        const auto lock = find_sync(rx);
        if (lock && lock->chip_phase == 0 &&
            lock->chip_offset == 2 * static_cast<std::size_t>(
                                        equalization_bytes.size()) * 8) {
            ok = true;
            for (int i = 0; i < frame_bit_count; ++i) {
                const std::uint8_t rx_bit =
                    rx.chips[2 * static_cast<std::size_t>(i) + 1];
                if (rx_bit != tx_bits[static_cast<std::size_t>(i)]) {
                    ok = false;
                    break;
                }
            }
        }
        res.errored = !ok;

        // Class statistics over the central half of every chip window; these
        // feed the measured S_pp and sigma of the run.
        const int lo = spc / 4;
        const int hi = 3 * spc / 4;
        for (std::size_t k = 0; k < frame_chips; ++k) {
            const bool high = frame_stream.chips[k] != 0;
            for (int s = lo; s < hi; ++s) {
                const double x = v[k * static_cast<std::size_t>(spc) +
                                   static_cast<std::size_t>(s)];
                if (high) {
                    res.sum_hi += x;
                    res.sumsq_hi += x * x;
                    ++res.n_hi;
                } else {
                    res.sum_lo += x;
                    res.sumsq_lo += x * x;
                    ++res.n_lo;
                }
            }
        }

        if (idx < eye_slots.size()) {
            auto& slot = eye_slots[idx];
            slot.reserve(eye_windows);
            for (std::size_t w = 0; w < eye_windows; ++w) {
                const std::size_t start = w * trace_len;
                if (start + trace_len > v.size()) break;
                slot.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(start),
                                  v.begin() +
                                      static_cast<std::ptrdiff_t>(start + trace_len));
            }
        }
    };

    unsigned workers = sc.n_workers > 0
                           ? static_cast<unsigned>(sc.n_workers)
                           : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(
        std::min<std::size_t>(workers, sc.n_packets));
    if (workers <= 1) {
        for (std::size_t i = 0; i < sc.n_packets; ++i) run_packet(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t idx =
                        next.fetch_add(1, std::memory_order_relaxed);
                    if (idx >= sc.n_packets) return;
                    run_packet(idx);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Serial reduction in packet order.
    TransmissionStats stats;
    double sum_hi = 0.0, sumsq_hi = 0.0, sum_lo = 0.0, sumsq_lo = 0.0;
    std::uint64_t n_hi = 0, n_lo = 0;
    std::uint64_t errored = 0;
    for (const PacketResult& r : results) {
        errored += r.errored ? 1 : 0;
        stats.saturated_packets += r.saturated ? 1 : 0;
        sum_hi += r.sum_hi;
        sumsq_hi += r.sumsq_hi;
        sum_lo += r.sum_lo;
        sumsq_lo += r.sumsq_lo;
        n_hi += r.n_hi;
        n_lo += r.n_lo;
    }

    stats.per.packets_sent = sc.n_packets;
    stats.per.packets_errored = errored;
    stats.per.per = static_cast<double>(errored) / static_cast<double>(sc.n_packets);
    const auto ci = wilson_interval_95(errored, sc.n_packets);
    stats.per.ci95_low = ci.first;
    stats.per.ci95_high = ci.second;
    stats.saturation_warning =
        static_cast<double>(stats.saturated_packets) >
        0.01 * static_cast<double>(sc.n_packets);

    if (n_hi > 0 && n_lo > 0) {
        const double mean_hi = sum_hi / static_cast<double>(n_hi);
        const double mean_lo = sum_lo / static_cast<double>(n_lo);
        stats.measured_s_pp_v = mean_hi - mean_lo;
        const double ss_hi = sumsq_hi - sum_hi * mean_hi;
        const double ss_lo = sumsq_lo - sum_lo * mean_lo;
        const double dof = static_cast<double>(n_hi + n_lo) - 2.0;
        const double var = std::max(0.0, (ss_hi + ss_lo) / dof);
        stats.measured_sigma_v = std::sqrt(var);
        // A fully clamped link can leave no class separation at all; report
        // -inf rather than feeding a dead signal to snr_db.
        if (stats.measured_s_pp_v <= 0.0)
            stats.measured_snr_db = -std::numeric_limits<double>::infinity();
        else if (stats.measured_sigma_v > 0.0)
            stats.measured_snr_db =
                snr_db(stats.measured_s_pp_v, stats.measured_sigma_v);
        else
            stats.measured_snr_db = std::numeric_limits<double>::infinity();
    }

    stats.eye.sample_rate_hz = sc.chain.sample_rate_hz;
    stats.eye.bit_rate_hz = chip_rate_hz / 2.0;
    stats.eye.samples_per_trace = trace_len;
    for (const auto& slot : eye_slots) {
        for (const auto& trace : slot) {
            if (stats.eye.traces.size() >= sc.eye_trace_cap) break;
            stats.eye.traces.push_back(trace);
        }
        if (stats.eye.traces.size() >= sc.eye_trace_cap) break;
    }

    return stats;
}

void write_eye_csv(std::ostream& os, const EyeMatrix& eye) {
    const auto old_precision = os.precision(9);
    for (std::size_t i = 0; i < eye.samples_per_trace; ++i) {
        if (i) os << ',';
        os << static_cast<double>(i) / eye.sample_rate_hz * 1e6;
    }
    os << '\n';
    for (const auto& trace : eye.traces) {
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (i) os << ',';
            os << trace[i];
        }
        os << '\n';
    }
    os.precision(old_precision);
}

} // namespace fsolink
