#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cellopt {

// Checkpoints are a JSON manifest next to a flat little-endian 64-bit float
// blob; the manifest declares the tensor layout and the blob holds the
// parameters in that order.
void write_blob(const std::string& path, std::span<const double> values);
std::vector<double> read_blob(const std::string& path, std::size_t expected_count);

std::uint64_t file_fnv1a64(const std::string& path);

}  // namespace cellopt
