#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fsolink/channel_model.hpp"
#include "fsolink/link_model.hpp"

namespace fsolink {

// ---------------------------------------------------------------------------
// Flat "section.key = value" configuration covering the whole link: laser,
// detector, noise, geometry, atmosphere and run control. Unknown or
// duplicate keys are rejected with the offending line. '#' starts a comment.
// ---------------------------------------------------------------------------

struct SystemConfig {
    double wavelength_nm = 4720.0;
    LinkHardware hw{};
    NoiseProfile noise{};
    LinkGeometry geometry{};
    Atmosphere atmosphere{};
    /// Absorption table source; load_config() reads it into the atmosphere,
    /// resolving a relative path against the config file's directory.
    std::string absorption_csv = "data/absorption_default.csv";
    std::size_t n_packets = 62500;
    std::uint64_t seed = 1;
    int n_bits = 72;

    void validate() const;
};

/// Defaults with the stock absorption table already in place; needs no files.
SystemConfig builtin_defaults();

/// Parses the flat key/value format. source_name only labels error messages.
/// The absorption table is not loaded here; see load_config().
SystemConfig parse_config(std::istream& is,
                          const std::string& source_name = "<config>");

/// Reads, parses and finishes a config file: the absorption CSV (when the
/// path is non-empty) is loaded into the returned atmosphere.
SystemConfig load_config(const std::string& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c
/// exactly (the absorption table travels via the CSV path).
std::string serialize_config(const SystemConfig& cfg);

} // namespace fsolink
