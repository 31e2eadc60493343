#pragma once

#include <filesystem>
#include <string>

#include "journey/geometry.hpp"
#include "journey/tensor.hpp"

namespace journey {

// Frame tensor container: magic "VJT1", u32 LE rank, rank u32 LE dims, then
// f32 LE payload in row-major F,H,W,C order.
void write_tensor(const std::filesystem::path& path, const Video& video);
Video read_tensor(const std::filesystem::path& path);

// 8-bit viewing exports; P6 for 3-channel images, P5 for single-channel.
// Values are clamped from [0,1].
void write_image_8bit(const std::filesystem::path& path, const Image& image);
void write_mask_8bit(const std::filesystem::path& path, const Mask& mask);

// FNV-1a 64 over a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace journey
