#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ragg/sample_set.hpp"

namespace ragg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary matrix container:
//   bytes 0..3   magic "RAGG"
//   bytes 4..5   version, u16 LE, = 1
//   bytes 6..7   flags, u16 LE, = 0
//   bytes 8..15  n, u64 LE
//   bytes 16..23 d, u64 LE
//   then n*d IEEE-754 binary64 LE values, row-major.
// File length must be exactly 24 + 8*n*d.
void write_matrix_file(const std::string& path, const SampleSet& x);
SampleSet read_matrix_file(const std::string& path);

std::vector<std::uint8_t> encode_matrix(const SampleSet& x);
SampleSet decode_matrix(const std::vector<std::uint8_t>& bytes);

// 17 significant digits: round-trip exact for binary64.
std::string format_double(double v);

// Flat key=value configuration file; '#' starts a comment, blank lines are
// skipped. Duplicate keys keep the last value.
std::map<std::string, std::string> parse_kv_file(const std::string& path);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback);
std::uint64_t kv_u64(const std::map<std::string, std::string>& kv,
                     const std::string& key, std::uint64_t fallback);
std::string kv_string(const std::map<std::string, std::string>& kv,
                      const std::string& key, const std::string& fallback);
std::vector<double> kv_double_list(const std::map<std::string, std::string>& kv,
                                   const std::string& key,
                                   const std::vector<double>& fallback);

}  // namespace ragg
