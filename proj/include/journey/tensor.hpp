#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace journey {

// Dense row-major F x H x W x C tensor of doubles. Frames of a sampling run,
// noise draws, prior videos and masks all share this layout.
struct Video {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Video() = default;
  Video(int f, int h, int w, int c, double fill = 0.0)
      : frames(f), height(h), width(w), channels(c),
        data(static_cast<size_t>(f) * h * w * c, fill) {
    if (f < 1 || h < 1 || w < 1 || c < 1)
      throw std::invalid_argument("Video: all dimensions must be positive");
  }

  size_t size() const { return data.size(); }

  size_t index(int f, int y, int x, int c) const {
    return ((static_cast<size_t>(f) * height + y) * width + x) * channels + c;
  }
  double& at(int f, int y, int x, int c) { return data[index(f, y, x, c)]; }
  double at(int f, int y, int x, int c) const { return data[index(f, y, x, c)]; }

  bool same_shape(const Video& o) const {
    return frames == o.frames && height == o.height && width == o.width &&
           channels == o.channels;
  }
  std::string shape_str() const {
    return std::to_string(frames) + "x" + std::to_string(height) + "x" +
           std::to_string(width) + "x" + std::to_string(channels);
  }

  bool operator==(const Video& o) const = default;
};

// Single H x W x C image, same layout as one Video frame.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  Image() = default;
  Image(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {
    if (h < 1 || w < 1 || c < 1)
      throw std::invalid_argument("Image: all dimensions must be positive");
  }

  size_t size() const { return data.size(); }
  size_t index(int y, int x, int c) const {
    return (static_cast<size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }

  bool operator==(const Image& o) const = default;
};

inline Video video_from_image(const Image& im) {
  Video v(1, im.height, im.width, im.channels);
  v.data = im.data;
  return v;
}

inline Image frame_of(const Video& v, int f) {
  if (f < 0 || f >= v.frames) throw std::out_of_range("frame_of: frame index");
  Image im(v.height, v.width, v.channels);
  const size_t n = im.size();
  std::copy(v.data.begin() + static_cast<size_t>(f) * n,
            v.data.begin() + static_cast<size_t>(f + 1) * n, im.data.begin());
  return im;
}

inline void set_frame(Video& v, int f, const Image& im) {
  if (f < 0 || f >= v.frames) throw std::out_of_range("set_frame: frame index");
  if (im.height != v.height || im.width != v.width || im.channels != v.channels)
    throw std::invalid_argument("set_frame: image shape does not match video");
  std::copy(im.data.begin(), im.data.end(),
            v.data.begin() + static_cast<size_t>(f) * im.size());
}

// Quantize through float32, the precision of the on-disk frame format.
// Records hold f32-exact values so that save/load round-trips bit for bit.
inline void quantize_f32(std::vector<double>& data) {
  for (double& d : data) d = static_cast<double>(static_cast<float>(d));
}
inline Video quantized_f32(Video v) {
  quantize_f32(v.data);
  return v;
}
inline Image quantized_f32(Image im) {
  quantize_f32(im.data);
  return im;
}

}  // namespace journey
