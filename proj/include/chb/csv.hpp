#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chb/geometry.hpp"

namespace chb {

/// Deterministic CSV writer: doubles with full round-trip precision so that
/// identical runs produce bit-identical artifacts.
class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& values);

private:
  std::ofstream out_;
};

std::string formatDouble(double v);

/// Field dump: header line "nx ny lx ly", then row-major values, one grid row
/// per CSV line. Boundary fields are written as one line per boundary line.
void dumpBulkField(const Geometry& geom, const Vec& field, const std::filesystem::path& path);
void dumpBdryField(const Geometry& geom, const Vec& field, const std::filesystem::path& path);

}  // namespace chb
