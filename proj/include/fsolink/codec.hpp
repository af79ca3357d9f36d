#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fsolink {

// ---------------------------------------------------------------------------
// Bit-true packet codec: 9-byte frames (3 equalization bytes, 2 sync bytes,
// 4 payload bytes), Manchester chips with IEEE 802.3 polarity (bit 1 encodes
// as low,high; bit 0 as high,low), MSB-first bit order.
// ---------------------------------------------------------------------------

using Payload = std::array<std::uint8_t, 4>;
using FrameBytes = std::array<std::uint8_t, 9>;

inline constexpr std::array<std::uint8_t, 3> equalization_bytes{0xAA, 0xAA, 0xAA};
inline constexpr std::array<std::uint8_t, 2> sync_bytes{0xA3, 0x59};
inline constexpr int frame_bit_count = 72;

/// Chip sequence (one byte per chip, values 0/1) at a fixed chip rate.
/// Encoded streams carry exactly two chips per bit with equal high/low
/// counts; digitized streams carry whatever the comparator produced.
struct ChipStream {
    std::vector<std::uint8_t> chips;
    double chip_rate_hz = 230400.0; ///< 2x the 115.2 kbaud bit clock
};

/// Assembles equalization + sync + payload into a 9-byte frame.
FrameBytes build_frame(const Payload& payload);

/// MSB-first bit expansion.
std::vector<std::uint8_t> bytes_to_bits(std::span<const std::uint8_t> bytes);
/// Inverse of bytes_to_bits; bit count must be a multiple of 8.
std::vector<std::uint8_t> bits_to_bytes(std::span<const std::uint8_t> bits);

/// Manchester-encodes a bit sequence; output has 2 chips per bit.
ChipStream manchester_encode(std::span<const std::uint8_t> bits,
                             double chip_rate_hz = 230400.0);

/// Strict Manchester decode. A same-valued chip pair is a coding violation
/// and throws std::invalid_argument naming the offending pair index.
std::vector<std::uint8_t> manchester_decode(const ChipStream& stream);

/// Permissive decode used under noise: each bit is taken from the second
/// chip of its pair (the polarity-defining chip). Sets *violation when any
/// pair is same-valued. Odd trailing chip is ignored.
std::vector<std::uint8_t> manchester_decode_lenient(
    std::span<const std::uint8_t> chips, bool* violation = nullptr);

/// Comparator behavior for digitize().
enum class ComparatorMode {
    central_mean, ///< mean of the central half of each chip's samples
    mid_sample    ///< single sample at the chip center
};

/// Hard-decision chips from a sampled waveform; a decision statistic at or
/// above threshold_v yields a high chip. Trailing samples short of a full
/// chip are ignored.
ChipStream digitize(std::span<const double> waveform, double threshold_v,
                    int samples_per_chip,
                    ComparatorMode mode = ComparatorMode::central_mean,
                    double chip_rate_hz = 230400.0);

struct SyncLock {
    std::size_t chip_offset = 0; ///< first chip of the sync word
    int chip_phase = 0;          ///< 0/1: chip-pair alignment that matched
};

/// Locates the sync word by exact-match scan over bit alignments (both chip
/// phases) after lenient Manchester decode; earliest match in chip order
/// wins. Returns nothing when the pattern does not occur.
std::optional<SyncLock> find_sync(const ChipStream& stream);

struct ExtractResult {
    Payload payload{};
    std::size_t sync_chip_offset = 0;
    bool bit_errors_detectable = false; ///< coding violation in sync/payload pairs
};

/// Sync scan plus extraction of the 4 payload bytes that follow the sync
/// word. Returns nothing on sync loss or when the stream ends before the
/// payload completes.
std::optional<ExtractResult> synchronize_and_extract(const ChipStream& stream);

struct PerEstimate {
    std::uint64_t packets_sent = 0;
    std::uint64_t packets_errored = 0;
    double per = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

/// Wilson 95% score interval for k errors in n trials.
std::pair<double, double> wilson_interval_95(std::uint64_t k, std::uint64_t n);

/// Packet error estimate: a packet counts as errored when its decode failed
/// (missing result) or any payload byte differs.
PerEstimate per_count(std::span<const Payload> sent,
                      std::span<const std::optional<Payload>> received);

// -- binary replay files ----------------------------------------------------
// Layout: 8-byte little-endian element count, then raw bytes. Chip files
// store one byte per chip (0x00/0x01); payload files store 4 bytes per
// payload. Chip rate is not persisted; readers apply the default.

void write_chip_stream(const std::string& path, const ChipStream& stream);
ChipStream read_chip_stream(const std::string& path);
void write_payloads(const std::string& path, std::span<const Payload> payloads);
std::vector<Payload> read_payloads(const std::string& path);

} // namespace fsolink
