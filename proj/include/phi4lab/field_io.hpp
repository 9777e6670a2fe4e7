#pragma once

#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "phi4lab/field.hpp"

namespace phi4lab {

// Binary field snapshot (magic PHI4FLD, version 1, native doubles).
// load_field rejects anything that does not carry the magic or version.
void save_field(const Field& f, const std::string& path);
Field load_field(const std::string& path);

// CSV emitter: comma separation, '.' decimal, one header row, LF endings.
// Numbers go through shortest-round-trip formatting so identical inputs
// produce byte-identical files.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);  // size must match header
    const std::string& path() const { return path_; }

    static std::string num(double x);
    static std::string num(long long x);
    static std::string num(int x) { return num(static_cast<long long>(x)); }

  private:
    std::ofstream out_;
    std::string path_;
    size_t width_ = 0;
};

struct VerdictEntry {
    std::string criterion;
    double observed = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string note;
};

// One JSON document per scenario: the criterion verdicts plus optional
// per-case rows (ordered key/value pairs, e.g. one row per random
// configuration). Deterministic key order, two-space indent.
void write_verdict(
    const std::string& path, const std::string& scenario,
    const std::vector<VerdictEntry>& criteria,
    const std::vector<std::vector<std::pair<std::string, double>>>& rows =
        {});

}  // namespace phi4lab
