#include "attfuse/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace attfuse {

CsvWriter::CsvWriter(std::vector<std::string> columns) : n_cols_(columns.size()) {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (i) text_ += ',';
    text_ += columns[i];
  }
  text_ += '\n';
}

std::string CsvWriter::format(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void CsvWriter::add_row(const std::vector<double>& values) {
  if (values.size() != n_cols_)
    throw std::invalid_argument("CsvWriter: row width disagrees with header");
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format(values[i]);
  }
  text_ += '\n';
}

void CsvWriter::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
  f << text_;
}

namespace {

constexpr const char* kImuHeader = "t,ax,ay,az,mx,my,mz,wx,wy,wz";

std::vector<double> split_numeric(const std::string& line, int lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    size_t pos = 0;
    double v;
    try {
      v = std::stod(cell, &pos);
    } catch (const std::exception&) {
      throw CsvParseError("unparseable value '" + cell + "'", lineno);
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size())
      throw CsvParseError("trailing garbage in value '" + cell + "'", lineno);
    if (!std::isfinite(v)) throw CsvParseError("non-finite value '" + cell + "'", lineno);
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<ImuLogRecord> parse_imu_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw CsvParseError("empty file", 1);
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kImuHeader)
    throw CsvParseError(std::string("bad header, expected ") + kImuHeader, 1);
  std::vector<ImuLogRecord> records;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<double> v = split_numeric(line, lineno);
    if (v.size() != 10)
      throw CsvParseError("expected 10 columns, got " + std::to_string(v.size()), lineno);
    if (v[0] <= last_t) throw CsvParseError("time not strictly increasing", lineno);
    last_t = v[0];
    ImuLogRecord r;
    r.t = v[0];
    r.acc = Vec3(v[1], v[2], v[3]);
    r.mag = Vec3(v[4], v[5], v[6]);
    r.gyro = Vec3(v[7], v[8], v[9]);
    if (r.acc.norm() < 1e-9) throw CsvParseError("zero accelerometer vector", lineno);
    if (r.mag.norm() < 1e-9) throw CsvParseError("zero magnetometer vector", lineno);
    // gravity-direction assumption; already-unit columns pass through exactly
    if (std::abs(r.acc.norm() - 1.0) > 1e-9) r.acc.normalize();
    if (std::abs(r.mag.norm() - 1.0) > 1e-9) r.mag.normalize();
    records.push_back(r);
  }
  return records;
}

std::vector<ImuLogRecord> parse_imu_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::ios_base::failure("parse_imu_csv: cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_imu_csv_text(buf.str());
}

void write_imu_csv(const std::string& path, const std::vector<ImuLogRecord>& records) {
  CsvWriter w({"t", "ax", "ay", "az", "mx", "my", "mz", "wx", "wy", "wz"});
  for (const auto& r : records)
    w.add_row({r.t, r.acc.x(), r.acc.y(), r.acc.z(), r.mag.x(), r.mag.y(), r.mag.z(),
               r.gyro.x(), r.gyro.y(), r.gyro.z()});
  w.write_file(path);
}

}  // namespace attfuse
