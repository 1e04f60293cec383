#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "cqed/detection.hpp"
#include "cqed/errors.hpp"

namespace cqed {
namespace {

template <class T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(const unsigned char* p) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

constexpr std::size_t kRecordBytes = 1 + 8 + 8;

void check_record(const Click& c, const std::string& where) {
  if (c.detector > 1) throw InputError(where + ": detector id must be 0 or 1");
  if (!std::isfinite(c.time_ns) || c.time_ns < 0.0) throw InputError(where + ": time must be finite and >= 0");
}

}  // namespace

void write_clicks_csv(std::ostream& out, std::span<const Click> clicks) {
  out << "detector,pulse_index,time_ns\n";
  char buf[64];
  for (const auto& c : clicks) {
    // Shortest round-trip representation keeps the CSV lossless.
    const auto res = std::to_chars(buf, buf + sizeof buf, c.time_ns);
    out << static_cast<int>(c.detector) << ',' << c.pulse_index << ',';
    out.write(buf, res.ptr - buf);
    out << '\n';
  }
}

void write_clicks_binary(std::ostream& out, std::span<const Click> clicks) {
  for (const auto& c : clicks) {
    put_le<std::uint8_t>(out, c.detector);
    put_le<std::uint64_t>(out, c.pulse_index);
    put_le<double>(out, c.time_ns);
  }
}

std::vector<Click> read_clicks_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "detector,pulse_index,time_ns")
    throw InputError("line 1: expected header 'detector,pulse_index,time_ns'");
  std::vector<Click> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw InputError(where + ": expected three comma-separated fields");
    unsigned det = 0;
    std::uint64_t pulse = 0;
    double t = 0.0;
    const char* b = line.data();
    auto ok = [](auto r, const char* end) { return r.ec == std::errc{} && r.ptr == end; };
    if (!ok(std::from_chars(b, b + c1, det), b + c1) ||
        !ok(std::from_chars(b + c1 + 1, b + c2, pulse), b + c2) ||
        !ok(std::from_chars(b + c2 + 1, b + line.size(), t), b + line.size()))
      throw InputError(where + ": malformed field in '" + line + "'");
    if (det > 1) throw InputError(where + ": detector id must be 0 or 1");
    Click c{static_cast<std::uint8_t>(det), pulse, t};
    check_record(c, where);
    out.push_back(c);
  }
  return out;
}

std::vector<Click> read_clicks_binary(std::istream& in) {
  std::vector<Click> out;
  unsigned char rec[kRecordBytes];
  std::size_t index = 0;
  for (;;) {
    in.read(reinterpret_cast<char*>(rec), kRecordBytes);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != kRecordBytes)
      throw InputError("record " + std::to_string(index) + ": truncated (" + std::to_string(got) + " of " +
                       std::to_string(kRecordBytes) + " bytes)");
    Click c{rec[0], get_le<std::uint64_t>(rec + 1), get_le<double>(rec + 9)};
    check_record(c, "record " + std::to_string(index));
    out.push_back(c);
    ++index;
  }
  return out;
}

std::vector<Click> read_clicks_file(const std::string& path) {
  const bool csv = path.ends_with(".csv");
  if (!csv && !path.ends_with(".bin")) throw InputError(path + ": click files must end in .csv or .bin");
  std::ifstream in(path, csv ? std::ios::in : std::ios::binary);
  if (!in) throw InputError("cannot open click file " + path);
  try {
    return csv ? read_clicks_csv(in) : read_clicks_binary(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace cqed
