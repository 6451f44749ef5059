#pragma once

#include <string>
#include <vector>

#include "rslab/config.hpp"
#include "rslab/spectral.hpp"

// Deterministic data files: CSV with a config-hash comment line and
// 17-significant-digit floats, JSON reports with a schema version, raw
// little-endian field snapshots. Provenance lives in an optional sidecar.

namespace rslab {

class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;          // numeric cells
    std::vector<std::vector<std::string>> labels;   // optional trailing text cells
};

// # config_hash=... then header row, then rows (%.17g).
void write_csv(const std::string& path, const CsvTable& table, std::uint64_t hash);

void write_text_file(const std::string& path, const std::string& contents);

// header: int64 dim, int64 points_per_axis, float64 box_half_length
// (little endian), then row-major float64 values.
void write_field_binary(const std::string& path, const Field& field);
Field read_field_binary(const std::string& path);

// <path>.meta.json with tool name/version, config echo and hash.
void write_sidecar_meta(const std::string& data_path, const RunConfig& config);

}  // namespace rslab
