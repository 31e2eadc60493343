#include "journey/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts unsupported");

namespace journey {

namespace {

constexpr char kMagic[4] = {'V', 'J', 'T', '1'};

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t read_u32(std::ifstream& in, const std::string& what) {
  uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4))
    throw std::runtime_error("tensor file truncated reading " + what);
  return v;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Video& video) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic, 4);
  write_u32(out, 4);
  for (int dim : {video.frames, video.height, video.width, video.channels})
    write_u32(out, static_cast<uint32_t>(dim));
  std::vector<float> payload(video.size());
  for (size_t i = 0; i < payload.size(); ++i)
    payload[i] = static_cast<float>(video.data[i]);
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

Video read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad tensor magic in " + path.string());
  const uint32_t rank = read_u32(in, "rank");
  if (rank != 4)
    throw std::runtime_error("tensor rank " + std::to_string(rank) +
                             " unsupported in " + path.string());
  uint32_t dims[4];
  for (uint32_t& d : dims) d = read_u32(in, "dims");
  Video video(static_cast<int>(dims[0]), static_cast<int>(dims[1]),
              static_cast<int>(dims[2]), static_cast<int>(dims[3]));
  std::vector<float> payload(video.size());
  if (!in.read(reinterpret_cast<char*>(payload.data()),
               static_cast<std::streamsize>(payload.size() * sizeof(float))))
    throw std::runtime_error("tensor file truncated reading payload: " +
                             path.string());
  for (size_t i = 0; i < payload.size(); ++i)
    video.data[i] = static_cast<double>(payload[i]);
  return video;
}

namespace {

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

void write_image_8bit(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const bool color = image.channels >= 3;
  out << (color ? "P6" : "P5") << "\n"
      << image.width << " " << image.height << "\n255\n";
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      if (color) {
        for (int c = 0; c < 3; ++c) out.put(to_byte(image.at(y, x, c)));
      } else {
        out.put(to_byte(image.at(y, x, 0)));
      }
    }
}

void write_mask_8bit(const std::filesystem::path& path, const Mask& mask) {
  Image im(mask.height, mask.width, 1);
  im.data = mask.data;
  write_image_8bit(path, im);
}

std::string file_checksum(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot checksum " + path.string());
  uint64_t h = 1469598103934665603ULL;
  char buf[8192];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace journey
