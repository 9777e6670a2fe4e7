#include "phi4lab/field_io.hpp"

#include <charconv>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace phi4lab {

namespace {

constexpr char kMagic[8] = {'P', 'H', 'I', '4', 'F', 'L', 'D', '\0'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("load_field: truncated file");
    return v;
}

}  // namespace

void save_field(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_field: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().dim));
    put<std::uint32_t>(
        out, static_cast<std::uint32_t>(f.grid().points_per_axis));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
    put<double>(out, f.grid().side_length);
    for (double v : f.values()) put<double>(out, v);
    if (!out) throw std::runtime_error("save_field: write failed on " + path);
}

Field load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_field: cannot open " + path);
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("load_field: not a field snapshot: " + path);
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kVersion) {
        throw std::runtime_error("load_field: unsupported version " +
                                 std::to_string(version));
    }
    const auto dim = get<std::uint32_t>(in);
    const auto points = get<std::uint32_t>(in);
    const auto components = get<std::uint32_t>(in);
    const auto side = get<double>(in);
    const TorusGrid g = make_torus_grid(static_cast<int>(dim),
                                        static_cast<int>(points), side);
    Field f(g, static_cast<int>(components));
    for (double& v : f.values_mut()) v = get<double>(in);
    return f;
}

CsvWriter::CsvWriter(const std::string& path,
                     std::vector<std::string> header)
    : out_(path, std::ios::binary), path_(path), width_(header.size()) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) {
        throw std::invalid_argument("CsvWriter: expected " +
                                    std::to_string(width_) + " cells, got " +
                                    std::to_string(cells.size()));
    }
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
}

std::string CsvWriter::num(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string CsvWriter::num(long long x) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

void write_verdict(
    const std::string& path, const std::string& scenario,
    const std::vector<VerdictEntry>& criteria,
    const std::vector<std::vector<std::pair<std::string, double>>>& rows) {
    nlohmann::ordered_json doc;
    doc["scenario"] = scenario;
    doc["criteria"] = nlohmann::ordered_json::array();
    bool all = true;
    for (const auto& c : criteria) {
        nlohmann::ordered_json j;
        j["criterion"] = c.criterion;
        j["observed"] = c.observed;
        j["threshold"] = c.threshold;
        j["pass"] = c.pass;
        if (!c.note.empty()) j["note"] = c.note;
        doc["criteria"].push_back(std::move(j));
        all = all && c.pass;
    }
    doc["pass"] = all;
    if (!rows.empty()) {
        doc["entries"] = nlohmann::ordered_json::array();
        for (const auto& r : rows) {
            nlohmann::ordered_json j;
            for (const auto& [k, v] : r) j[k] = v;
            doc["entries"].push_back(std::move(j));
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_verdict: cannot open " + path);
    out << doc.dump(2) << '\n';
}

}  // namespace phi4lab
