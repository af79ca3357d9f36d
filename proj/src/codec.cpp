#include "fsolink/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fsolink/errors.hpp"

namespace fsolink {

namespace {

std::vector<std::uint8_t> sync_bit_pattern() {
    return bytes_to_bits(std::span<const std::uint8_t>(sync_bytes));
}

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

} // namespace

FrameBytes build_frame(const Payload& payload) {
    FrameBytes frame{};
    std::copy(equalization_bytes.begin(), equalization_bytes.end(), frame.begin());
    std::copy(sync_bytes.begin(), sync_bytes.end(), frame.begin() + 3);
    std::copy(payload.begin(), payload.end(), frame.begin() + 5);
    return frame;
}

std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes) {
    std::vector<std::uint8_t> bits;
    bits.reserve(bytes.size() * 8);
    for (const std::uint8_t byte : bytes)
        for (int i = 7; i >= 0; --i)
            bits.push_back(static_cast<std::uint8_t>((byte >> i) & 1u));
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits) {
    require(bits.size() % 8 == 0, "bit count must be a multiple of 8");
    std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bits.size(); ++i)
        bytes[i / 8] = static_cast<std::uint8_t>(
            (bytes[i / 8] << 1) | (bits[i] ? 1u : 0u));
    return bytes;
}

ChipStream manchester_encode(std::span<const std::uint8_t> bits,
                             double chip_rate_hz) {
    require(chip_rate_hz > 0.0, "chip rate must be positive");
    ChipStream out;
    out.chip_rate_hz = chip_rate_hz;
    out.chips.reserve(bits.size() * 2);
    for (const std::uint8_t bit : bits) {
        require(bit <= 1, "bits must be 0 or 1");
        // IEEE 802.3: 1 -> rising mid-bit (low, high); 0 -> falling (high, low).
        out.chips.push_back(bit ? 0 : 1);
        out.chips.push_back(bit ? 1 : 0);
    }
    return out;
}

std::vector<std::uint8_t> manchester_decode(const ChipStream& stream) {
    require(stream.chips.size() % 2 == 0, "chip count must be even");
    std::vector<std::uint8_t> bits;
    bits.reserve(stream.chips.size() / 2);
    for (std::size_t i = 0; i + 1 < stream.chips.size(); i += 2) {
        const std::uint8_t a = stream.chips[i];
        const std::uint8_t b = stream.chips[i + 1];
        require(a <= 1 && b <= 1, "chips must be 0 or 1");
        if (a == b)
            throw std::invalid_argument("manchester coding violation at chip pair " +
                                        std::to_string(i / 2));
        bits.push_back(b);
    }
    return bits;
}

std::vector<std::uint8_t> manchester_decode_lenient(
    std::span<const std::uint8_t> chips, bool* violation) {
    std::vector<std::uint8_t> bits;
    bits.reserve(chips.size() / 2);
    bool seen = false;
    for (std::size_t i = 0; i + 1 < chips.size(); i += 2) {
        if (chips[i] == chips[i + 1]) seen = true;
        bits.push_back(chips[i + 1] ? 1 : 0);
    }
    if (violation) *violation = seen;
    return bits;
}

ChipStream digitize(std::span<const double> waveform, double threshold_v,
                    int samples_per_chip, ComparatorMode mode,
                    double chip_rate_hz) {
    require(samples_per_chip >= 1, "samples per chip must be at least 1");
    ChipStream out;
    out.chip_rate_hz = chip_rate_hz;
    const std::size_t n_chips = waveform.size() / samples_per_chip;
    out.chips.reserve(n_chips);
    for (std::size_t c = 0; c < n_chips; ++c) {
        const std::size_t base = c * samples_per_chip;
        double statistic = 0.0;
        if (mode == ComparatorMode::mid_sample) {
            statistic = waveform[base + samples_per_chip / 2];
        } else {
            const std::size_t lo = base + samples_per_chip / 4;
            std::size_t hi = base + (3 * samples_per_chip) / 4;
            if (hi == lo) hi = lo + 1;
            for (std::size_t i = lo; i < hi; ++i) statistic += waveform[i];
            statistic /= static_cast<double>(hi - lo);
        }
        out.chips.push_back(statistic >= threshold_v ? 1 : 0);
    }
    return out;
}

std::optional<SyncLock> find_sync(const ChipStream& stream) {
    const auto pattern = sync_bit_pattern();
    std::optional<SyncLock> best;
    for (int phase = 0; phase < 2; ++phase) {
        // Lenient bit view at this chip-pair alignment.
        std::vector<std::uint8_t> bits;
        const auto& chips = stream.chips;
        for (std::size_t i = phase; i + 1 < chips.size(); i += 2)
            bits.push_back(chips[i + 1] ? 1 : 0);
        if (bits.size() < pattern.size()) continue;
        for (std::size_t j = 0; j + pattern.size() <= bits.size(); ++j) {
            if (std::equal(pattern.begin(), pattern.end(), bits.begin() + j)) {
                const std::size_t chip_offset = 2 * j + phase;
                if (!best || chip_offset < best->chip_offset)
                    best = SyncLock{chip_offset, phase};
                break; // earliest match per phase
            }
        }
    }
    return best;
}

std::optional<ExtractResult> synchronize_and_extract(const ChipStream& stream) {
    const auto pattern = sync_bit_pattern();
    const auto& chips = stream.chips;
    constexpr std::size_t payload_bits = 32;
    std::optional<ExtractResult> best;
    std::size_t best_offset = 0;
    for (int phase = 0; phase < 2; ++phase) {
        std::vector<std::uint8_t> bits;
        for (std::size_t i = phase; i + 1 < chips.size(); i += 2)
            bits.push_back(chips[i + 1] ? 1 : 0);
        for (std::size_t j = 0;
             j + pattern.size() + payload_bits <= bits.size(); ++j) {
            if (!std::equal(pattern.begin(), pattern.end(), bits.begin() + j))
                continue;
            const std::size_t chip_offset = 2 * j + phase;
            if (best && best_offset <= chip_offset) break;
            ExtractResult result;
            result.sync_chip_offset = chip_offset;
            const auto payload_begin = bits.begin() + j + pattern.size();
            const auto payload_bytes = bits_to_bytes(
                std::span<const std::uint8_t>(&*payload_begin, payload_bits));
            std::copy(payload_bytes.begin(), payload_bytes.end(),
                      result.payload.begin());
            // Violations across the matched sync word and payload chips.
            const std::size_t region_begin = chip_offset;
            const std::size_t region_end =
                chip_offset + 2 * (pattern.size() + payload_bits);
            for (std::size_t i = region_begin; i + 1 < region_end; i += 2)
                if (chips[i] == chips[i + 1]) result.bit_errors_detectable = true;
            best = result;
            best_offset = chip_offset;
            break; // earliest viable match per phase
        }
    }
    return best;
}

std::pair<double, double> wilson_interval_95(std::uint64_t k, std::uint64_t n) {
    require(n > 0, "interval needs at least one trial");
    require(k <= n, "errors cannot exceed trials");
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p_hat = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p_hat + z2 / (2.0 * nn)) / denom;
    const double half =
        z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / denom;
    // At the boundaries center == half up to rounding; pin the exact ends.
    const double lo = k == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = k == n ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

PerEstimate per_count(std::span<const Payload> sent,
                      std::span<const std::optional<Payload>> received) {
    require(sent.size() == received.size(),
            "sent and received lists must have equal length");
    require(!sent.empty(), "per estimate needs at least one packet");
    PerEstimate est;
    est.packets_sent = sent.size();
    for (std::size_t i = 0; i < sent.size(); ++i)
        if (!received[i] || *received[i] != sent[i]) ++est.packets_errored;
    est.per = static_cast<double>(est.packets_errored) /
              static_cast<double>(est.packets_sent);
    const auto [lo, hi] = wilson_interval_95(est.packets_errored, est.packets_sent);
    est.ci95_low = lo;
    est.ci95_high = hi;
    return est;
}

namespace {

void write_u64_le(std::ofstream& out, std::uint64_t value) {
    std::array<unsigned char, 8> raw{};
    for (int i = 0; i < 8; ++i)
        raw[i] = static_cast<unsigned char>((value >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(raw.data()), 8);
}

std::uint64_t read_u64_le(std::ifstream& in, const std::string& path) {
    std::array<unsigned char, 8> raw{};
    if (!in.read(reinterpret_cast<char*>(raw.data()), 8))
        throw config_error("truncated length header in " + path);
    std::uint64_t value = 0;
    for (int i = 7; i >= 0; --i) value = (value << 8) | raw[i];
    return value;
}

} // namespace

void write_chip_stream(const std::string& path, const ChipStream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    write_u64_le(out, stream.chips.size());
    out.write(reinterpret_cast<const char*>(stream.chips.data()),
              static_cast<std::streamsize>(stream.chips.size()));
    if (!out) throw config_error("short write to " + path);
}

ChipStream read_chip_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open: " + path);
    const std::uint64_t count = read_u64_le(in, path);
    ChipStream stream;
    stream.chips.resize(count);
    if (count > 0 &&
        !in.read(reinterpret_cast<char*>(stream.chips.data()),
                 static_cast<std::streamsize>(count)))
        throw config_error("chip stream shorter than its header claims: " + path);
    for (const std::uint8_t chip : stream.chips)
        if (chip > 1)
            throw config_error("chip values must be 0 or 1: " + path);
    return stream;
}

void write_payloads(const std::string& path, std::span<const Payload> payloads) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open for writing: " + path);
    write_u64_le(out, payloads.size());
    for (const Payload& p : payloads)
        out.write(reinterpret_cast<const char*>(p.data()), p.size());
    if (!out) throw config_error("short write to " + path);
}

std::vector<Payload> read_payloads(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open: " + path);
    const std::uint64_t count = read_u64_le(in, path);
    std::vector<Payload> payloads(count);
    for (Payload& p : payloads)
        if (!in.read(reinterpret_cast<char*>(p.data()), p.size()))
            throw config_error("payload file shorter than its header claims: " +
                               path);
    return payloads;
}

} // namespace fsolink
