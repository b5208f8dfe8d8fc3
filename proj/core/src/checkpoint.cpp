#include "cellopt/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <stdexcept>

#include "cellopt/csv.hpp"

namespace cellopt {

static_assert(std::endian::native == std::endian::little,
              "checkpoint blobs assume a little-endian host");

void write_blob(const std::string& path, std::span<const double> values) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_blob: cannot open " + path);
  f.write(reinterpret_cast<const char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!f) throw std::runtime_error("write_blob: write failed for " + path);
}

std::vector<double> read_blob(const std::string& path, std::size_t expected_count) {
  std::ifstream f(path, std::ios::binary | std::ios::ate);
  if (!f) throw std::runtime_error("read_blob: cannot open " + path);
  auto bytes = static_cast<std::size_t>(f.tellg());
  if (bytes != expected_count * sizeof(double))
    throw std::runtime_error("read_blob: " + path + " holds " +
                             std::to_string(bytes / sizeof(double)) +
                             " values, expected " + std::to_string(expected_count));
  std::vector<double> out(expected_count);
  f.seekg(0);
  f.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
  if (!f) throw std::runtime_error("read_blob: read failed for " + path);
  return out;
}

std::uint64_t file_fnv1a64(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("file_fnv1a64: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f) {
    f.read(buf, sizeof(buf));
    std::streamsize got = f.gcount();
    for (std::streamsize i = 0; i < got; ++i)
      h = (h ^ static_cast<unsigned char>(buf[i])) * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace cellopt
