#include "fsolink/config.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <system_error>

#include "fsolink/errors.hpp"

namespace fsolink {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void fail_at(const std::string& source, int line,
                          const std::string& what) {
    throw config_error(source + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view v, const std::string& source, int line) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        fail_at(source, line, "expected a number, got '" + std::string(v) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view v, const std::string& source,
                        int line) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        fail_at(source, line,
                "expected a non-negative integer, got '" + std::string(v) + "'");
    return out;
}

bool parse_bool(std::string_view v, const std::string& source, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail_at(source, line, "expected true/false, got '" + std::string(v) + "'");
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

void SystemConfig::validate() const {
    hw.validate();
    noise.validate();
    geometry.validate();
    atmosphere.validate();
    if (wavelength_nm <= 0.0)
        throw std::domain_error("wavelength must be positive");
    if (n_packets == 0) throw std::domain_error("n_packets must be positive");
    if (n_bits <= 0) throw std::domain_error("n_bits must be positive");
}

SystemConfig builtin_defaults() {
    SystemConfig cfg;
    // Same rows as data/absorption_default.csv, so the tool runs without
    // any files on disk.
    cfg.atmosphere.absorption_table = {
        {1500.0, 0.12}, {1557.7, 0.08}, {1650.0, 0.15},
        {3800.0, 0.09}, {3998.6, 0.05}, {4200.0, 0.12},
        {4500.0, 0.60}, {4720.0, 0.30}, {4900.0, 0.55},
    };
    return cfg;
}

SystemConfig parse_config(std::istream& is, const std::string& source_name) {
    SystemConfig cfg;
    std::set<std::string> seen;
    bool beam_waist_set = false;
    bool tx_radius_set = false;

    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail_at(source_name, line_no, "expected 'section.key = value'");
        const std::string key{trim(line.substr(0, eq))};
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) fail_at(source_name, line_no, "missing key");
        if (value.empty()) fail_at(source_name, line_no, "missing value");
        if (!seen.insert(key).second)
            fail_at(source_name, line_no, "duplicate key '" + key + "'");

        const auto num = [&] { return parse_double(value, source_name, line_no); };

        if (key == "laser.wavelength_nm") cfg.wavelength_nm = num();
        else if (key == "laser.p_out_w") cfg.hw.p_out_w = num();
        else if (key == "laser.p_max_w") cfg.hw.p_max_w = num();
        else if (key == "laser.md") cfg.hw.md = num();
        else if (key == "laser.allow_overdrive")
            cfg.hw.allow_overdrive = parse_bool(value, source_name, line_no);
        else if (key == "detector.gain") cfg.hw.gain = num();
        else if (key == "detector.responsivity_v_per_w")
            cfg.hw.responsivity_v_per_w = num();
        else if (key == "detector.saturation_w") cfg.hw.saturation_w = num();
        else if (key == "noise.sigma_detector_v") cfg.noise.sigma_detector_v = num();
        else if (key == "noise.sigma_source_v_at_ref")
            cfg.noise.sigma_source_v_at_ref = num();
        else if (key == "noise.ref_oa_db") cfg.noise.ref_oa_db = num();
        else if (key == "noise.ref_p_out_w") cfg.noise.ref_p_out_w = num();
        else if (key == "geometry.tx_aperture_radius_m") {
            cfg.geometry.tx_aperture_radius_m = num();
            tx_radius_set = true;
        } else if (key == "geometry.rx_aperture_radius_m")
            cfg.geometry.rx_aperture_radius_m = num();
        else if (key == "geometry.beam_waist_m") {
            cfg.geometry.beam_waist_m = num();
            beam_waist_set = true;
        } else if (key == "geometry.geometric_rule") {
            if (value == "step_at_twice_rayleigh")
                cfg.geometry.geometric_rule = GeometricLossRule::step_at_twice_rayleigh;
            else if (value == "clamp_only")
                cfg.geometry.geometric_rule = GeometricLossRule::clamp_only;
            else
                fail_at(source_name, line_no,
                        "geometric_rule must be step_at_twice_rayleigh or clamp_only");
        } else if (key == "atmosphere.visibility_km")
            cfg.atmosphere.visibility_km = num();
        else if (key == "atmosphere.altitude_m") cfg.atmosphere.altitude_m = num();
        else if (key == "atmosphere.wind_mps") cfg.atmosphere.wind_mps = num();
        else if (key == "atmosphere.cn2_override") cfg.atmosphere.cn2_override = num();
        else if (key == "atmosphere.rayleigh_beta0_per_km")
            cfg.atmosphere.rayleigh.beta0_per_km = num();
        else if (key == "atmosphere.rayleigh_exponent")
            cfg.atmosphere.rayleigh.exponent = num();
        else if (key == "atmosphere.absorption_csv")
            cfg.absorption_csv = std::string(value);
        else if (key == "run.n_packets") {
            cfg.n_packets =
                static_cast<std::size_t>(parse_u64(value, source_name, line_no));
        } else if (key == "run.seed") cfg.seed = parse_u64(value, source_name, line_no);
        else if (key == "run.n_bits") {
            const std::uint64_t n = parse_u64(value, source_name, line_no);
            if (n == 0 || n > 1u << 20)
                fail_at(source_name, line_no, "n_bits out of range");
            cfg.n_bits = static_cast<int>(n);
        } else
            fail_at(source_name, line_no, "unknown key '" + key + "'");
    }

    // A collimated transmitter launches at its aperture size unless told
    // otherwise.
    if (tx_radius_set && !beam_waist_set)
        cfg.geometry.beam_waist_m = cfg.geometry.tx_aperture_radius_m;
    return cfg;
}

SystemConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file '" + path + "'");
    SystemConfig cfg = parse_config(is, path);
    if (!cfg.absorption_csv.empty()) {
        std::filesystem::path csv(cfg.absorption_csv);
        if (csv.is_relative())
            csv = std::filesystem::path(path).parent_path() / csv;
        cfg.atmosphere.absorption_table = load_absorption_csv(csv.string());
    }
    return cfg;
}

std::string serialize_config(const SystemConfig& cfg) {
    std::ostringstream os;
    os << "laser.wavelength_nm = " << format_double(cfg.wavelength_nm) << '\n'
       << "laser.p_out_w = " << format_double(cfg.hw.p_out_w) << '\n'
       << "laser.p_max_w = " << format_double(cfg.hw.p_max_w) << '\n'
       << "laser.md = " << format_double(cfg.hw.md) << '\n'
       << "laser.allow_overdrive = " << (cfg.hw.allow_overdrive ? "true" : "false")
       << '\n'
       << "detector.gain = " << format_double(cfg.hw.gain) << '\n'
       << "detector.responsivity_v_per_w = "
       << format_double(cfg.hw.responsivity_v_per_w) << '\n'
       << "detector.saturation_w = " << format_double(cfg.hw.saturation_w) << '\n'
       << "noise.sigma_detector_v = " << format_double(cfg.noise.sigma_detector_v)
       << '\n'
       << "noise.sigma_source_v_at_ref = "
       << format_double(cfg.noise.sigma_source_v_at_ref) << '\n'
       << "noise.ref_oa_db = " << format_double(cfg.noise.ref_oa_db) << '\n'
       << "noise.ref_p_out_w = " << format_double(cfg.noise.ref_p_out_w) << '\n'
       << "geometry.tx_aperture_radius_m = "
       << format_double(cfg.geometry.tx_aperture_radius_m) << '\n'
       << "geometry.rx_aperture_radius_m = "
       << format_double(cfg.geometry.rx_aperture_radius_m) << '\n'
       << "geometry.beam_waist_m = " << format_double(cfg.geometry.beam_waist_m)
       << '\n'
       << "geometry.geometric_rule = "
       << (cfg.geometry.geometric_rule == GeometricLossRule::clamp_only
               ? "clamp_only"
               : "step_at_twice_rayleigh")
       << '\n'
       << "atmosphere.visibility_km = "
       << format_double(cfg.atmosphere.visibility_km) << '\n'
       << "atmosphere.altitude_m = " << format_double(cfg.atmosphere.altitude_m)
       << '\n'
       << "atmosphere.wind_mps = " << format_double(cfg.atmosphere.wind_mps)
       << '\n';
    if (cfg.atmosphere.cn2_override)
        os << "atmosphere.cn2_override = "
           << format_double(*cfg.atmosphere.cn2_override) << '\n';
    os << "atmosphere.rayleigh_beta0_per_km = "
       << format_double(cfg.atmosphere.rayleigh.beta0_per_km) << '\n'
       << "atmosphere.rayleigh_exponent = "
       << format_double(cfg.atmosphere.rayleigh.exponent) << '\n'
       << "atmosphere.absorption_csv = " << cfg.absorption_csv << '\n'
       << "run.n_packets = " << cfg.n_packets << '\n'
       << "run.seed = " << cfg.seed << '\n'
       << "run.n_bits = " << cfg.n_bits << '\n';
    return os.str();
}

} // namespace fsolink
