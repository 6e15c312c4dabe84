#include "ppe/iq_capture.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ppe/errors.hpp"

namespace ppe {

namespace {

void put_le(char* dst, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) dst[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
}

double get_le(const char* src) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(src[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::filesystem::path iq_header_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

void write_iq(const std::filesystem::path& path, const Field& field, bool power_normalized) {
  const Rails r = to_rails(field);
  const std::size_t n = r.size();
  const std::size_t rails = r.rails.size();
  std::vector<char> buf(n * rails * 16);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < rails; ++p) {
      char* dst = buf.data() + (i * rails + p) * 16;
      put_le(dst, r.rails[p][i].real());
      put_le(dst + 8, r.rails[p][i].imag());
    }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());

  nlohmann::json h{{"n_samples", n},
                   {"sample_period_s", r.sample_period},
                   {"center_frequency_hz", r.center_frequency},
                   {"dual_pol", rails == 2},
                   {"power_normalized", power_normalized}};
  std::ofstream hout(iq_header_path(path));
  if (!hout) throw IoError("cannot open " + iq_header_path(path).string() + " for writing");
  hout << h.dump(2) << '\n';
  if (!hout) throw IoError("write failed: " + iq_header_path(path).string());
}

IqHeader read_iq_header(const std::filesystem::path& path) {
  std::ifstream in(iq_header_path(path));
  if (!in) throw IoError("missing capture header " + iq_header_path(path).string());
  IqHeader h;
  try {
    const auto j = nlohmann::json::parse(in);
    h.n_samples = j.at("n_samples").get<std::size_t>();
    h.sample_period_s = j.at("sample_period_s").get<double>();
    h.center_frequency_hz = j.at("center_frequency_hz").get<double>();
    h.dual_pol = j.at("dual_pol").get<bool>();
    h.power_normalized = j.at("power_normalized").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed capture header " + iq_header_path(path).string() + ": " + e.what());
  }
  if (h.n_samples < 2 || !(h.sample_period_s > 0.0)) throw IoError("invalid capture header " + path.string());
  return h;
}

Field read_iq(const std::filesystem::path& path, IqHeader* header_out) {
  const IqHeader h = read_iq_header(path);
  const std::size_t rails = h.dual_pol ? 2 : 1;
  const std::size_t bytes = h.n_samples * rails * 16;
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());
  if (size != bytes) throw IoError("capture " + path.string() + " has " + std::to_string(size) + " bytes, header implies " +
                                   std::to_string(bytes));
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> buf(bytes);
  in.read(buf.data(), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError("short read: " + path.string());

  Rails r;
  r.sample_period = h.sample_period_s;
  r.center_frequency = h.center_frequency_hz;
  r.rails.assign(rails, Samples(h.n_samples));
  for (std::size_t i = 0; i < h.n_samples; ++i)
    for (std::size_t p = 0; p < rails; ++p) {
      const char* src = buf.data() + (i * rails + p) * 16;
      r.rails[p][i] = cplx(get_le(src), get_le(src + 8));
    }
  if (header_out) *header_out = h;
  try {
    return from_rails(std::move(r));
  } catch (const std::invalid_argument& e) {
    throw IoError("capture " + path.string() + " holds invalid samples: " + e.what());
  }
}

}  // namespace ppe
