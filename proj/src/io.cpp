#include "leiblab/io.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include "json.hpp"
#include <stdexcept>

#include "leiblab/errors.hpp"

namespace leiblab::io {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw SizeMismatch("CSV row width differs from header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_.push_back(',');
    out_ += cells[i];
  }
  out_.push_back('\n');
}

void CsvWriter::row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  row(cells);
}

std::string field_csv(const RadialField& u) {
  CsvWriter w({"r", "value"});
  for (int i = 0; i < u.size(); ++i) w.row(std::vector<double>{u.grid().center(i), u[i]});
  return w.str();
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write(const std::string& relative, std::string_view content) {
  write_atomic(root_ / relative, content);
  hashes_[relative] = sha256_hex(content);
}

void OutputDir::finish(unsigned long long seed) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& [name, hash] : hashes_) {
    files.push_back({{"path", name}, {"sha256", hash}});
  }
  const nlohmann::json manifest = {{"seed", seed}, {"files", files}};
  write_atomic(root_ / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace leiblab::io
