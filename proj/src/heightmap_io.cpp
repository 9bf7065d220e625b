#include <bit>
#include <cstring>
#include <fstream>

#include "ose/error.hpp"
#include "ose/surface.hpp"

namespace ose {
namespace {

constexpr unsigned char kMagic[4] = {'O', 'S', 'E', 'H'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4 + 8;

template <typename U>
void put_le(std::vector<unsigned char>& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

template <typename U>
U get_le(const unsigned char* p) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<unsigned char> encode_heightmap(const HeightMap& map) {
  if (map.empty()) throw InvalidArgument("encode_heightmap: empty map");
  std::vector<unsigned char> out;
  out.reserve(kHeaderSize + map.heights().size() * 4);
  for (unsigned char c : kMagic) out.push_back(c);
  put_le<std::uint16_t>(out, kHeightMapVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.width()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(map.height()));
  put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(map.pitch()));
  for (double h : map.heights())
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(h)));
  return out;
}

HeightMap decode_heightmap(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw InvalidArgument("heightmap: missing OSEH header");
  const unsigned char* p = bytes.data() + 4;
  const auto version = get_le<std::uint16_t>(p);
  if (version != kHeightMapVersion)
    throw InvalidArgument("heightmap: unsupported version " + std::to_string(version));
  const auto nx = get_le<std::uint32_t>(p + 2);
  const auto ny = get_le<std::uint32_t>(p + 6);
  const double pitch = std::bit_cast<double>(get_le<std::uint64_t>(p + 10));
  const std::size_t n = static_cast<std::size_t>(nx) * ny;
  if (bytes.size() != kHeaderSize + 4 * n) throw InvalidArgument("heightmap: truncated payload");

  Image h(nx, ny);
  const unsigned char* q = bytes.data() + kHeaderSize;
  for (std::size_t i = 0; i < n; ++i, q += 4)
    h.data()[i] = static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(q)));
  Provenance prov;
  prov.history.push_back("decoded from OSEH");
  return HeightMap(std::move(h), pitch, std::move(prov));
}

void write_heightmap(const std::filesystem::path& path, const HeightMap& map) {
  const auto bytes = encode_heightmap(map);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError(path, "cannot open for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError(path, "write failed");
}

HeightMap read_heightmap(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path, "cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_heightmap(bytes);
  } catch (const InvalidArgument& e) {
    throw IoError(path, e.what());
  }
}

}  // namespace ose
