#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "leiblab/fields.hpp"

namespace leiblab::io {

/// %.17g
std::string format_double(double x);

std::string sha256_hex(std::string_view data);

/// Writes through a temporary file in the same directory and renames it
/// into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Comma-separated, LF line endings, header first.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);
  const std::string& str() const { return out_; }

 private:
  std::size_t width_;
  std::string out_;
};

/// r,value table of a field.
std::string field_csv(const RadialField& u);

/// Output directory that records every file it writes; finish() adds
/// manifest.json with the SHA-256 of each file.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);
  void write(const std::string& relative, std::string_view content);
  void finish(unsigned long long seed);
  const std::filesystem::path& root() const { return root_; }
  const std::map<std::string, std::string>& hashes() const { return hashes_; }

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> hashes_;
};

}  // namespace leiblab::io
