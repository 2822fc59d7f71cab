#pragma once

#include <string>
#include <vector>

#include "attfuse/linalg.hpp"

namespace attfuse {

// CSV with a mandatory header row; floats written with 17 significant digits
// so logs are byte-reproducible and round-trip exactly.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  const std::string& text() const { return text_; }
  void write_file(const std::string& path) const;

  static std::string format(double v);

 private:
  size_t n_cols_;
  std::string text_;
};

struct CsvParseError : std::runtime_error {
  int line;  // 1-based
  CsvParseError(const std::string& msg, int line_)
      : std::runtime_error(msg), line(line_) {}
};

// One IMU log record: time, specific force (m/s^2), magnetic direction
// (normalized), body rates (rad/s).
struct ImuLogRecord {
  double t;
  Vec3 acc;   // normalized to a gravity-direction vector at parse exit
  Vec3 mag;   // normalized
  Vec3 gyro;
};

// Header must be exactly t,ax,ay,az,mx,my,mz,wx,wy,wz. Malformed rows and
// non-monotone time raise CsvParseError with the offending line number.
// The accelerometer is treated as a gravity-direction sensor and normalized.
std::vector<ImuLogRecord> parse_imu_csv(const std::string& path);
std::vector<ImuLogRecord> parse_imu_csv_text(const std::string& text);

void write_imu_csv(const std::string& path, const std::vector<ImuLogRecord>& records);

}  // namespace attfuse
