#pragma once

// CSV/JSON output helpers. All numbers are written in full-precision
// scientific notation with the C locale so identical inputs give
// byte-identical files.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mems {

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", x);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt_double(values[i]);
        }
        out_ << '\n';
    }

    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

inline void write_json(const std::string& path, const nlohmann::json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot open " + path);
    out << doc.dump(2) << '\n';
}

// Run manifest: the resolved inputs, the seed, and the wall time.
inline void write_manifest(const std::string& output_dir, const std::string& subcommand,
                           const nlohmann::json& inputs, std::uint64_t seed,
                           double wall_seconds,
                           const std::vector<std::string>& output_files) {
    nlohmann::json m;
    m["subcommand"] = subcommand;
    m["inputs"] = inputs;
    m["seed"] = seed;
    m["wall_seconds"] = wall_seconds;
    m["outputs"] = output_files;
    write_json(output_dir + "/manifest.json", m);
}

class WallClock {
  public:
    WallClock() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace mems
