#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace solitonlab {

// 17 significant digits, round-trip exact.
std::string fmt17(double v);

struct CsvTable {
  std::vector<std::string> comments;  // written as "# ..." lines before the header
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;
};

std::string to_csv_text(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Write to a sibling temp file, then rename over the target.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Stable within a build: 64-bit FNV-1a of the file bytes, hex encoded.
std::string checksum_text(const std::string& bytes);
std::string file_checksum(const std::filesystem::path& path);

// Indented, keys sorted, floats with 17 significant digits, non-finite as null.
std::string dump_json(const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace solitonlab
