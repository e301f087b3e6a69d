#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qhit::app {

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Row-by-row CSV text with shortest round-trip numbers.
class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header);

  Csv& add(double x);
  Csv& add(std::size_t n);
  Csv& add(std::string_view s);
  void end_row();

  const std::string& text() const noexcept { return text_; }

 private:
  std::string text_;
  bool row_open_ = false;
  void separator();
};

struct OutputRecord {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
  bool deterministic = true;
};

/// Output directory that records the checksum of every file it writes.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  void write(const std::string& name, std::string_view content, bool deterministic = true);
  const std::vector<OutputRecord>& records() const noexcept { return records_; }

 private:
  std::filesystem::path root_;
  std::vector<OutputRecord> records_;
};

/// Wall-clock seconds per named phase, in insertion order.
class Timings {
 public:
  void add(const std::string& phase, double seconds);
  const std::vector<std::pair<std::string, double>>& entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<std::string, double>> entries_;
};

/// Seconds on a steady clock since construction.
class Stopwatch {
 public:
  Stopwatch();
  double seconds() const;

 private:
  double start_;
};

/// Writes manifest.json: config snapshot, version tag, seed, checksums of
/// every recorded file and the timings. The manifest is not self-listed.
void write_manifest(const OutputDir& out, const std::string& command, const std::string& config_text,
                    unsigned long long seed, const Timings& timings);

/// Version tag of this build.
const char* version_tag() noexcept;

}  // namespace qhit::app
