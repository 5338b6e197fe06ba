#include "chb/csv.hpp"

#include <cstdio>

#include "chb/errors.hpp"

namespace chb {

std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) {
  std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw AssertionError("cannot open " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    out_ << (i ? "," : "") << header[i];
  out_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << formatDouble(values[i]);
  out_ << "\n";
}

void CsvWriter::row(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    out_ << (i ? "," : "") << values[i];
  out_ << "\n";
}

namespace {

void writeHeader(std::ofstream& out, const Geometry& geom) {
  out << geom.nx() << " " << geom.ny() << " " << formatDouble(geom.lx()) << " "
      << formatDouble(geom.ly()) << "\n";
}

}  // namespace

void dumpBulkField(const Geometry& geom, const Vec& field, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw AssertionError("cannot open " + path.string());
  writeHeader(out, geom);
  const int cols = (geom.mode() == Geometry::Mode::Strip2d) ? geom.nx() : geom.nx() + 1;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    out << formatDouble(field[i]);
    out << (((i + 1) % cols == 0) ? "\n" : ",");
  }
}

void dumpBdryField(const Geometry& geom, const Vec& field, const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw AssertionError("cannot open " + path.string());
  writeHeader(out, geom);
  const int cols = (geom.mode() == Geometry::Mode::Strip2d) ? geom.nx() : 1;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    out << formatDouble(field[i]);
    out << (((i + 1) % cols == 0) ? "\n" : ",");
  }
}

}  // namespace chb
