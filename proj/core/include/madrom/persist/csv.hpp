#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "madrom/problems/burgers_reference.hpp"

namespace madrom::persist {

/// Shortest text that parses back to exactly `v`.
std::string format_double(double v);

/// Header line plus rows; every row must have as many cells as the header.
/// Written atomically.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);
/// Header and rows of a CSV written by write_csv.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Columns x,t,value over the whole reference mesh.
void write_field_csv(const std::filesystem::path& path, const problems::SpaceTimeField& field);

}  // namespace madrom::persist
