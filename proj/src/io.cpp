#include "rslab/io.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace rslab {

static_assert(std::endian::native == std::endian::little,
              "field binary format is little-endian");

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << contents;
    if (!out) throw IoError("write failed: " + path);
}

void write_csv(const std::string& path, const CsvTable& table, std::uint64_t hash) {
    std::string buf;
    char tmp[64];
    std::snprintf(tmp, sizeof tmp, "# config_hash=%016" PRIx64 "\n", hash);
    buf += tmp;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (i) buf += ",";
        buf += table.header[i];
    }
    buf += "\n";
    for (std::size_t rix = 0; rix < table.rows.size(); ++rix) {
        const auto& row = table.rows[rix];
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) buf += ",";
            std::snprintf(tmp, sizeof tmp, "%.17g", row[i]);
            buf += tmp;
        }
        if (rix < table.labels.size())
            for (const auto& cell : table.labels[rix]) {
                buf += ",";
                buf += cell;
            }
        buf += "\n";
    }
    write_text_file(path, buf);
}

void write_field_binary(const std::string& path, const Field& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::int64_t dim = field.grid.dim;
    const std::int64_t n = std::int64_t(field.grid.points_per_axis);
    const double box = field.grid.box_half_length;
    out.write(reinterpret_cast<const char*>(&dim), 8);
    out.write(reinterpret_cast<const char*>(&n), 8);
    out.write(reinterpret_cast<const char*>(&box), 8);
    out.write(reinterpret_cast<const char*>(field.values.data()),
              std::streamsize(field.values.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path);
}

Field read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::int64_t dim = 0, n = 0;
    double box = 0.0;
    in.read(reinterpret_cast<char*>(&dim), 8);
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&box), 8);
    if (!in) throw IoError("truncated field header: " + path);
    Grid grid(int(dim), std::size_t(n), box);
    std::vector<double> values(grid.total_points());
    in.read(reinterpret_cast<char*>(values.data()),
            std::streamsize(values.size() * sizeof(double)));
    if (!in) throw IoError("truncated field data: " + path);
    return Field(grid, std::move(values));
}

void write_sidecar_meta(const std::string& data_path, const RunConfig& config) {
    nlohmann::json meta;
    meta["tool"] = "rslab";
    meta["version"] = 1;
    char tmp[32];
    std::snprintf(tmp, sizeof tmp, "%016" PRIx64, config_hash(config));
    meta["config_hash"] = tmp;
    meta["config"] = serialize_config(config);
    write_text_file(data_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace rslab
