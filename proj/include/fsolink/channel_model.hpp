#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fsolink {

// ---------------------------------------------------------------------------
// Atmospheric channel: clear-air extinction and turbulence losses for a
// horizontal free-space optical path, plus beam-spread geometry.
//
// All per-length terms are in dB/km; distance-dependent terms in dB. The
// total budget is the plain sum of the five contributions, so individual
// terms can be inspected or zeroed through the inputs.
// ---------------------------------------------------------------------------

/// One row of a molecular absorption table.
struct AbsorptionEntry {
    double wavelength_nm = 0.0;
    double alpha_db_per_km = 0.0;
};

/// Rayleigh scattering power-law fit (LOWTRAN-calibrated defaults).
struct RayleighModel {
    double beta0_per_km = 0.0116; ///< scattering coefficient at 550 nm [1/km]
    double exponent = 4.09;       ///< spectral slope of the power law
};

/// Atmospheric state along the path.
///
/// Turbulence strength comes from cn2_override when set, otherwise from the
/// Hufnagel-Valley profile evaluated at (altitude_m, wind_mps).
struct Atmosphere {
    double visibility_km = 1.0;
    double altitude_m = 50.0;
    double wind_mps = 30.0 / 3.6; ///< 30 km/h reference wind
    std::optional<double> cn2_override;
    std::vector<AbsorptionEntry> absorption_table;
    RayleighModel rayleigh;

    /// Refractive-index structure parameter used by the scintillation term.
    double cn2() const;

    /// Throws std::domain_error on non-physical fields.
    void validate() const;
};

/// How the beam-spread loss treats the collimated near range.
enum class GeometricLossRule {
    step_at_twice_rayleigh, ///< zero loss up to 2*z_R, clamped formula beyond
    clamp_only              ///< clamped formula everywhere (continuous)
};

/// Transmit/receive geometry of the link.
struct LinkGeometry {
    double tx_aperture_radius_m = 0.10;
    double rx_aperture_radius_m = 0.10;
    double beam_waist_m = 0.10; ///< Gaussian waist; defaults to the TX radius
    GeometricLossRule geometric_rule = GeometricLossRule::step_at_twice_rayleigh;

    void validate() const;
};

/// Per-term loss budget at one (wavelength, distance) point. total_db is the
/// exact sum of the five members.
struct AttenuationBreakdown {
    double aerosol_scattering_db = 0.0;
    double rayleigh_scattering_db = 0.0;
    double absorption_db = 0.0;
    double scintillation_db = 0.0;
    double geometric_db = 0.0;
    double total_db = 0.0;
};

// -- extinction terms -------------------------------------------------------

/// Kruse size-distribution exponent q(V). Boundary visibilities (6, 50 km)
/// take the lower-visibility branch.
double kruse_exponent(double visibility_km);

/// Mie/aerosol scattering from visibility (Kruse model), dB/km.
/// 10*log10(e) * (3.91/V) * (lambda/550 nm)^-q(V).
double aerosol_scattering_db_per_km(double wavelength_nm, double visibility_km);

/// Molecular Rayleigh scattering, dB/km. Power-law fit anchored at 550 nm.
double rayleigh_scattering_db_per_km(double wavelength_nm,
                                     const RayleighModel& model = {});

/// Molecular absorption by linear interpolation in the supplied table, dB/km.
/// No extrapolation: wavelengths outside the table throw std::out_of_range;
/// an empty table throws config_error.
double absorption_db_per_km(double wavelength_nm,
                            const std::vector<AbsorptionEntry>& table);

// -- turbulence -------------------------------------------------------------

/// Hufnagel-Valley Cn^2 profile [m^-2/3] at altitude h for upper-air wind v.
/// ground_param is the A coefficient of the boundary-layer term.
double hufnagel_valley_cn2(double altitude_m, double wind_mps,
                           double ground_param = 1.7e-14);

/// Weak-turbulence scintillation margin, dB:
/// 2*sqrt(23.17 * k^(7/6) * Cn^2 * L^(11/6)), k = 2*pi/lambda [1/m].
double scintillation_db(double wavelength_nm, double link_length_m, double cn2);

// -- beam geometry ----------------------------------------------------------

/// Rayleigh length z_R = pi * w0^2 / lambda of the transmitted Gaussian beam.
double rayleigh_length_m(double beam_waist_m, double wavelength_nm);

/// Beam-spread (capture) loss, dB. Zero inside twice the Rayleigh length
/// under the default rule; beyond, 10*log10(spot area / capture area),
/// clamped at zero while the spot still fits the receive aperture.
double geometric_attenuation_db(const LinkGeometry& geometry,
                                double wavelength_nm, double distance_m);

// -- aggregate --------------------------------------------------------------

/// Full loss budget at one point. distance_m = 0 yields an all-zero
/// breakdown. Constituent preconditions apply (absorption table coverage).
AttenuationBreakdown total_attenuation(const Atmosphere& atmosphere,
                                       const LinkGeometry& geometry,
                                       double wavelength_nm, double distance_m);

struct MaxLengthResult {
    double distance_m = 0.0;
    bool unbounded = false; ///< budget not exhausted up to the cap
};

struct MaxLengthOptions {
    double scan_step_m = 10.0;
    double resolution_m = 1.0;
    double cap_m = 100e3;
};

/// Largest distance whose total attenuation stays within budget_db, by
/// coarse scan plus bisection. Robust to the geometric step at 2*z_R: when
/// the step overshoots the budget the last distance before the step is
/// returned. Distances are resolved to options.resolution_m.
MaxLengthResult max_link_length_m(const Atmosphere& atmosphere,
                                  const LinkGeometry& geometry,
                                  double wavelength_nm, double budget_db,
                                  const MaxLengthOptions& options = {});

// -- table ingestion --------------------------------------------------------

/// Loads an absorption table from CSV with header
/// "wavelength_nm,alpha_db_per_km". Rows must be strictly increasing in
/// wavelength (duplicates rejected) with finite, non-negative values.
/// Throws config_error on any malformed content.
std::vector<AbsorptionEntry> load_absorption_csv(const std::string& path);

} // namespace fsolink
