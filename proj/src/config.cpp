#include "phi4lab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phi4lab {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line) +
                                ": " + what);
}

double parse_double(const std::string& v, int line) {
    double x = 0.0;
    size_t used = 0;
    try {
        x = std::stod(v, &used);
    } catch (const std::invalid_argument&) {
        fail(line, "not a number: '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(line, "number out of range: '" + v + "'");
    }
    if (used != v.size()) fail(line, "trailing junk in number '" + v + "'");
    return x;
}

long long parse_int(const std::string& v, int line) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        fail(line, "not an integer: '" + v + "'");
    }
    return out;
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(line, "empty entry in list");
        out.push_back(parse_double(item, line));
    }
    if (out.empty()) fail(line, "empty list");
    return out;
}

}  // namespace

LabConfig default_config(const std::string& profile) {
    LabConfig cfg;
    if (profile == "smoke") return cfg;
    if (profile == "full") {
        cfg.dim = 3;
        cfg.points = 32;
        cfg.dt = 5e-4;
        return cfg;
    }
    throw std::invalid_argument("unknown profile '" + profile +
                                "' (expected smoke or full)");
}

void validate_config(const LabConfig& cfg) {
    if (cfg.dim < 1 || cfg.dim > 3) {
        throw std::invalid_argument("dim must be 1, 2, or 3");
    }
    if (cfg.points < 8 || (cfg.points & (cfg.points - 1)) != 0) {
        throw std::invalid_argument("points must be a power of 2, >= 8");
    }
    if (!(cfg.epsilon > 0.0) || cfg.epsilon > 0.25) {
        throw std::invalid_argument(
            "epsilon must lie in (0, 1/4]: beyond 1/4 the exponent table "
            "degenerates (m_B and the coupling-window powers lose "
            "integrability)");
    }
    if (!(cfg.eta > 0.0)) throw std::invalid_argument("eta must be > 0");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(cfg.m_tol > 0.0)) throw std::invalid_argument("m_tol must be > 0");
    if (cfg.replicas < 1) {
        throw std::invalid_argument("replicas must be >= 1");
    }
    if (cfg.windows < 1) throw std::invalid_argument("windows must be >= 1");
    if (cfg.ells.empty()) throw std::invalid_argument("ells must be nonempty");
    for (double l : cfg.ells) {
        if (!(l >= 0.0)) throw std::invalid_argument("ell values must be >= 0");
    }
    if (!(cfg.c_cap > 0.0)) throw std::invalid_argument("c_cap must be > 0");
    if (!(cfg.a_floor >= 0.0) || !(cfg.a_offset >= 0.0)) {
        throw std::invalid_argument("a_offset and a_floor must be >= 0");
    }
    if (cfg.out_dir.empty()) {
        throw std::invalid_argument("out_dir must be nonempty");
    }
}

LabConfig parse_config(const std::string& text, const LabConfig& base) {
    LabConfig cfg = base;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos) {
            fail(line, "expected key = value, got '" + raw + "'");
        }
        const std::string key = trim(raw.substr(0, eq));
        const std::string val = trim(raw.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        if (val.empty()) fail(line, "empty value for '" + key + "'");

        if (key == "dim") cfg.dim = static_cast<int>(parse_int(val, line));
        else if (key == "points") cfg.points = static_cast<int>(parse_int(val, line));
        else if (key == "epsilon") cfg.epsilon = parse_double(val, line);
        else if (key == "eta") cfg.eta = parse_double(val, line);
        else if (key == "dt") cfg.dt = parse_double(val, line);
        else if (key == "m_tol") cfg.m_tol = parse_double(val, line);
        else if (key == "ells") cfg.ells = parse_list(val, line);
        else if (key == "replicas") cfg.replicas = static_cast<int>(parse_int(val, line));
        else if (key == "windows") cfg.windows = static_cast<int>(parse_int(val, line));
        else if (key == "a_offset") cfg.a_offset = parse_double(val, line);
        else if (key == "a_amp") cfg.a_amp = parse_double(val, line);
        else if (key == "a_floor") cfg.a_floor = parse_double(val, line);
        else if (key == "b_amp") cfg.b_amp = parse_double(val, line);
        else if (key == "z2_amp") cfg.z2_amp = parse_double(val, line);
        else if (key == "z1_amp") cfg.z1_amp = parse_double(val, line);
        else if (key == "z0_amp") cfg.z0_amp = parse_double(val, line);
        else if (key == "z0_offset") cfg.z0_offset = parse_double(val, line);
        else if (key == "tree_amp") cfg.tree_amp = parse_double(val, line);
        else if (key == "tree_offset") cfg.tree_offset = parse_double(val, line);
        else if (key == "c_cap") cfg.c_cap = parse_double(val, line);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, line));
        else if (key == "out_dir") cfg.out_dir = val;
        else fail(line, "unknown key '" + key + "'");
    }
    try {
        validate_config(cfg);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return cfg;
}

LabConfig load_config(const std::string& path, const LabConfig& base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base);
}

}  // namespace phi4lab
