#include "ragg/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ragg {
namespace {

constexpr char kMagic[4] = {'R', 'A', 'G', 'G'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 24;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    v >>= 8;
  }
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_matrix(const SampleSet& x) {
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * x.data.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  put_u16(out, 0);  // flags
  put_u64(out, x.n);
  put_u64(out, x.d);
  for (double v : x.data) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(out, bits);
  }
  return out;
}

SampleSet decode_matrix(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes) throw IoError("matrix file shorter than header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw IoError("matrix file has bad magic bytes");
  }
  if (get_u16(bytes.data() + 4) != kVersion) {
    throw IoError("unsupported matrix file version");
  }
  if (get_u16(bytes.data() + 6) != 0) throw IoError("unsupported matrix file flags");
  const std::uint64_t n = get_u64(bytes.data() + 8);
  const std::uint64_t d = get_u64(bytes.data() + 16);
  if (n == 0 || d == 0) throw IoError("matrix file has zero dimension");
  // Overflow-safe length check: compare against the payload word count
  // instead of computing 8*n*d.
  const std::uint64_t payload_words =
      (static_cast<std::uint64_t>(bytes.size()) - kHeaderBytes) / 8;
  if ((bytes.size() - kHeaderBytes) % 8 != 0 || n > payload_words / d ||
      n * d != payload_words) {
    throw IoError("matrix file length does not match header (n=" +
                  std::to_string(n) + ", d=" + std::to_string(d) + ", got " +
                  std::to_string(bytes.size()) + " bytes)");
  }
  SampleSet x(n, d);
  const std::uint8_t* p = bytes.data() + kHeaderBytes;
  for (std::size_t i = 0; i < x.data.size(); ++i, p += 8) {
    const std::uint64_t bits = get_u64(p);
    std::memcpy(&x.data[i], &bits, sizeof(double));
  }
  return x;
}

void write_matrix_file(const std::string& path, const SampleSet& x) {
  const auto bytes = encode_matrix(x);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

SampleSet read_matrix_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_matrix(bytes);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open spec file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_kv_text(ss.str());
}

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw IoError("spec key '" + key + "' is not a number: " + it->second);
  }
}

std::uint64_t kv_u64(const std::map<std::string, std::string>& kv,
                     const std::string& key, std::uint64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw IoError("spec key '" + key + "' is not an integer: " + it->second);
  }
}

std::string kv_string(const std::map<std::string, std::string>& kv,
                      const std::string& key, const std::string& fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::vector<double> kv_double_list(const std::map<std::string, std::string>& kv,
                                   const std::string& key,
                                   const std::vector<double>& fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::vector<double> out;
  std::stringstream ss(it->second);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw IoError("spec key '" + key + "' has a bad list entry: " + token);
    }
  }
  if (out.empty()) throw IoError("spec key '" + key + "' is an empty list");
  return out;
}

}  // namespace ragg
