#pragma once

#include "forge/render.h"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// Decoded PNG: 8- or 16-bit samples, channels interleaved, row-major.
struct PngImage {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1, 3 or 4
  int bit_depth = 8;
  /// 8-bit images use one entry per sample; 16-bit images two, big-endian.
  std::vector<std::uint8_t> data;
};

std::vector<std::uint8_t> encode_png(const PngImage& image);
PngImage decode_png(std::span<const std::uint8_t> bytes);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// RGB8 PNG of a render's color channel.
std::vector<std::uint8_t> encode_rgb_png(const Render& render);

/// Lossless depth transport: an RGBA8 PNG whose four samples per pixel are
/// the little-endian bytes of the IEEE-754 float32 depth in meters.
std::vector<std::uint8_t> encode_depth_png(std::span<const float> depth, int width, int height);
std::vector<float> decode_depth_png(std::span<const std::uint8_t> bytes, int* width = nullptr,
                                    int* height = nullptr);

/// 16-bit grayscale PNG of instance ids. Throws ValidationError for ids
/// above 65535.
std::vector<std::uint8_t> encode_mask_png(const Render& render);

/// Little-endian PFM ("Pf", scale -1), rows stored bottom-to-top.
void write_pfm(const std::filesystem::path& path, std::span<const float> depth, int width,
               int height);
std::vector<float> read_pfm(const std::filesystem::path& path, int* width = nullptr,
                            int* height = nullptr);

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace forge
