#include "fsolink/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fsolink/errors.hpp"

namespace fsolink {

namespace {

constexpr double k_db_per_neper = 4.342944819032518; // 10*log10(e)

void require(bool ok, const char* what) {
    if (!ok) throw std::domain_error(what);
}

} // namespace

double Atmosphere::cn2() const {
    if (cn2_override) return *cn2_override;
    return hufnagel_valley_cn2(altitude_m, wind_mps);
}

void Atmosphere::validate() const {
    require(visibility_km > 0.0 && std::isfinite(visibility_km),
            "visibility must be positive");
    require(altitude_m >= 0.0, "altitude must be non-negative");
    require(wind_mps >= 0.0, "wind speed must be non-negative");
    if (cn2_override) require(*cn2_override > 0.0, "cn2 override must be positive");
    require(rayleigh.beta0_per_km > 0.0, "rayleigh beta0 must be positive");
    require(rayleigh.exponent > 0.0, "rayleigh exponent must be positive");
}

void LinkGeometry::validate() const {
    require(tx_aperture_radius_m > 0.0, "tx aperture radius must be positive");
    require(rx_aperture_radius_m > 0.0, "rx aperture radius must be positive");
    require(beam_waist_m > 0.0, "beam waist must be positive");
}

double kruse_exponent(double visibility_km) {
    require(visibility_km > 0.0 && std::isfinite(visibility_km),
            "visibility must be positive");
    if (visibility_km > 50.0) return 1.6;
    if (visibility_km > 6.0) return 1.3;
    return 0.585 * std::cbrt(visibility_km);
}

double aerosol_scattering_db_per_km(double wavelength_nm, double visibility_km) {
    require(wavelength_nm > 0.0, "wavelength must be positive");
    const double q = kruse_exponent(visibility_km);
    return k_db_per_neper * (3.91 / visibility_km) *
           std::pow(wavelength_nm / 550.0, -q);
}

double rayleigh_scattering_db_per_km(double wavelength_nm,
                                     const RayleighModel& model) {
    require(wavelength_nm > 0.0, "wavelength must be positive");
    return k_db_per_neper * model.beta0_per_km *
           std::pow(550.0 / wavelength_nm, model.exponent);
}

double absorption_db_per_km(double wavelength_nm,
                            const std::vector<AbsorptionEntry>& table) {
    if (table.empty())
        throw config_error("absorption table is empty");
    require(wavelength_nm > 0.0, "wavelength must be positive");
    if (wavelength_nm < table.front().wavelength_nm ||
        wavelength_nm > table.back().wavelength_nm) {
        std::ostringstream msg;
        msg << "wavelength " << wavelength_nm
            << " nm outside absorption table range ["
            << table.front().wavelength_nm << ", " << table.back().wavelength_nm
            << "] nm";
        throw std::out_of_range(msg.str());
    }
    const auto upper = std::lower_bound(
        table.begin(), table.end(), wavelength_nm,
        [](const AbsorptionEntry& e, double w) { return e.wavelength_nm < w; });
    if (upper->wavelength_nm == wavelength_nm) return upper->alpha_db_per_km;
    const auto lower = std::prev(upper);
    const double t = (wavelength_nm - lower->wavelength_nm) /
                     (upper->wavelength_nm - lower->wavelength_nm);
    return lower->alpha_db_per_km +
           t * (upper->alpha_db_per_km - lower->alpha_db_per_km);
}

double hufnagel_valley_cn2(double altitude_m, double wind_mps,
                           double ground_param) {
    require(altitude_m >= 0.0, "altitude must be non-negative");
    require(wind_mps >= 0.0, "wind speed must be non-negative");
    require(ground_param >= 0.0, "ground parameter must be non-negative");
    const double h = altitude_m;
    const double v = wind_mps;
    return 0.00594 * (v / 27.0) * (v / 27.0) * std::pow(1e-5 * h, 10.0) *
               std::exp(-h / 1000.0) +
           2.7e-16 * std::exp(-h / 1500.0) +
           ground_param * std::exp(-h / 100.0);
}

double scintillation_db(double wavelength_nm, double link_length_m, double cn2) {
    require(wavelength_nm > 0.0, "wavelength must be positive");
    require(link_length_m >= 0.0, "link length must be non-negative");
    require(cn2 >= 0.0, "cn2 must be non-negative");
    if (link_length_m == 0.0) return 0.0;
    const double k = 2.0 * M_PI / (wavelength_nm * 1e-9);
    return 2.0 * std::sqrt(23.17 * std::pow(k, 7.0 / 6.0) * cn2 *
                           std::pow(link_length_m, 11.0 / 6.0));
}

double rayleigh_length_m(double beam_waist_m, double wavelength_nm) {
    require(beam_waist_m > 0.0, "beam waist must be positive");
    require(wavelength_nm > 0.0, "wavelength must be positive");
    return M_PI * beam_waist_m * beam_waist_m / (wavelength_nm * 1e-9);
}

double geometric_attenuation_db(const LinkGeometry& geometry,
                                double wavelength_nm, double distance_m) {
    geometry.validate();
    require(distance_m >= 0.0, "distance must be non-negative");
    const double z_r = rayleigh_length_m(geometry.beam_waist_m, wavelength_nm);
    if (geometry.geometric_rule == GeometricLossRule::step_at_twice_rayleigh &&
        distance_m <= 2.0 * z_r)
        return 0.0;
    const double ratio = distance_m / z_r;
    const double w = geometry.beam_waist_m * std::sqrt(1.0 + ratio * ratio);
    const double rx = geometry.rx_aperture_radius_m;
    // Spot and capture areas share the pi factor; compare radii squared.
    if (w * w <= rx * rx) return 0.0;
    return 10.0 * std::log10((w * w) / (rx * rx));
}

AttenuationBreakdown total_attenuation(const Atmosphere& atmosphere,
                                       const LinkGeometry& geometry,
                                       double wavelength_nm, double distance_m) {
    atmosphere.validate();
    geometry.validate();
    require(wavelength_nm > 0.0, "wavelength must be positive");
    require(distance_m >= 0.0, "distance must be non-negative");
    AttenuationBreakdown out;
    if (distance_m == 0.0) return out;
    const double d_km = distance_m / 1000.0;
    out.aerosol_scattering_db =
        aerosol_scattering_db_per_km(wavelength_nm, atmosphere.visibility_km) * d_km;
    out.rayleigh_scattering_db =
        rayleigh_scattering_db_per_km(wavelength_nm, atmosphere.rayleigh) * d_km;
    out.absorption_db =
        absorption_db_per_km(wavelength_nm, atmosphere.absorption_table) * d_km;
    out.scintillation_db =
        scintillation_db(wavelength_nm, distance_m, atmosphere.cn2());
    out.geometric_db =
        geometric_attenuation_db(geometry, wavelength_nm, distance_m);
    out.total_db = out.aerosol_scattering_db + out.rayleigh_scattering_db +
                   out.absorption_db + out.scintillation_db + out.geometric_db;
    return out;
}

MaxLengthResult max_link_length_m(const Atmosphere& atmosphere,
                                  const LinkGeometry& geometry,
                                  double wavelength_nm, double budget_db,
                                  const MaxLengthOptions& options) {
    require(budget_db >= 0.0, "budget must be non-negative");
    require(options.scan_step_m > 0.0, "scan step must be positive");
    require(options.resolution_m > 0.0, "resolution must be positive");
    require(options.cap_m > 0.0, "cap must be positive");
    const auto total = [&](double d) {
        return total_attenuation(atmosphere, geometry, wavelength_nm, d).total_db;
    };
    // total(d) is monotone non-decreasing in d (strictly, through the aerosol
    // term), so a coarse bracket plus bisection finds the crossing; the lower
    // bracket end is always feasible, which keeps the geometric-step jump safe.
    double lo = 0.0;
    while (lo + options.scan_step_m <= options.cap_m &&
           total(lo + options.scan_step_m) <= budget_db)
        lo += options.scan_step_m;
    if (lo + options.scan_step_m > options.cap_m) {
        if (total(options.cap_m) <= budget_db) return {options.cap_m, true};
    }
    double hi = std::min(lo + options.scan_step_m, options.cap_m);
    while (hi - lo > options.resolution_m) {
        const double mid = 0.5 * (lo + hi);
        if (total(mid) <= budget_db)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, false};
}

std::vector<AbsorptionEntry> load_absorption_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open absorption table: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw config_error("absorption table is empty: " + path);
    auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    if (strip(line) != "wavelength_nm,alpha_db_per_km")
        throw config_error(
            "absorption table must start with header "
            "'wavelength_nm,alpha_db_per_km': " + path);
    std::vector<AbsorptionEntry> table;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = strip(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        std::ostringstream where;
        where << path << ":" << line_no;
        if (comma == std::string::npos)
            throw config_error("absorption row needs two columns at " + where.str());
        AbsorptionEntry entry;
        try {
            size_t used = 0;
            entry.wavelength_nm = std::stod(strip(row.substr(0, comma)), &used);
            if (used != strip(row.substr(0, comma)).size()) throw std::invalid_argument("");
            entry.alpha_db_per_km = std::stod(strip(row.substr(comma + 1)), &used);
            if (used != strip(row.substr(comma + 1)).size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw config_error("unparsable absorption row at " + where.str());
        }
        if (!std::isfinite(entry.wavelength_nm) || entry.wavelength_nm <= 0.0)
            throw config_error("wavelength must be positive at " + where.str());
        if (!std::isfinite(entry.alpha_db_per_km) || entry.alpha_db_per_km < 0.0)
            throw config_error("alpha must be non-negative at " + where.str());
        if (!table.empty()) {
            if (entry.wavelength_nm == table.back().wavelength_nm)
                throw config_error("duplicate wavelength at " + where.str());
            if (entry.wavelength_nm < table.back().wavelength_nm)
                throw config_error("wavelengths must be strictly increasing at " +
                                   where.str());
        }
        table.push_back(entry);
    }
    if (table.empty())
        throw config_error("absorption table has no data rows: " + path);
    return table;
}

} // namespace fsolink
