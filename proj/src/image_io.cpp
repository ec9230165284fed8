#include "forge/image_io.h"

#include <png.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace forge {

namespace {

struct PngWriteBuffer {
  std::vector<std::uint8_t>* out;
};

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<PngWriteBuffer*>(png_get_io_ptr(png));
  buf->out->insert(buf->out->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

struct PngReadBuffer {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* buf = static_cast<PngReadBuffer*>(png_get_io_ptr(png));
  if (buf->pos + length > buf->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(data, buf->bytes.data() + buf->pos, length);
  buf->pos += length;
}

[[noreturn]] void png_error_callback(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  *message = msg;
  png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

int color_type_for(int channels) {
  switch (channels) {
    case 1: return PNG_COLOR_TYPE_GRAY;
    case 3: return PNG_COLOR_TYPE_RGB;
    case 4: return PNG_COLOR_TYPE_RGB_ALPHA;
    default: throw ValidationError("png: unsupported channel count");
  }
}

constexpr std::string_view kBase64Alphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

}  // namespace

std::vector<std::uint8_t> encode_png(const PngImage& image) {
  const int bytes_per_sample = image.bit_depth / 8;
  const std::size_t row_bytes =
      static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
  if (image.data.size() != row_bytes * image.height)
    throw ValidationError("png: data size does not match dimensions");

  std::vector<std::uint8_t> out;
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_callback,
                                            png_warning_callback);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png: out of memory");
  }
  PngWriteBuffer buffer{&out};
  std::vector<png_bytep> rows(image.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png encode: " + message);
  }
  png_set_write_fn(png, &buffer, png_write_callback, png_flush_callback);
  png_set_IHDR(png, info, image.width, image.height, image.bit_depth,
               color_type_for(image.channels), PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  // Fixed settings keep the encoded bytes reproducible.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  for (int r = 0; r < image.height; ++r)
    rows[r] = const_cast<png_bytep>(image.data.data() + r * row_bytes);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

PngImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0)
    throw ParseError("png: bad signature");
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_callback,
                                           png_warning_callback);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png: out of memory");
  }
  PngReadBuffer buffer{bytes, 0};
  PngImage image;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError("png decode: " + message);
  }
  png_set_read_fn(png, &buffer, png_read_callback);
  png_read_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  image.width = static_cast<int>(png_get_image_width(png, info));
  image.height = static_cast<int>(png_get_image_height(png, info));
  image.bit_depth = png_get_bit_depth(png, info);
  image.channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  png_bytepp rows = png_get_rows(png, info);
  image.data.resize(row_bytes * image.height);
  for (int r = 0; r < image.height; ++r)
    std::memcpy(image.data.data() + r * row_bytes, rows[r], row_bytes);
  png_destroy_read_struct(&png, &info, nullptr);
  return image;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += kBase64Alphabet[(v >> 6) & 63];
    out += kBase64Alphabet[v & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out += kBase64Alphabet[(v >> 18) & 63];
    out += kBase64Alphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kBase64Alphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (std::size_t i = 0; i < kBase64Alphabet.size(); ++i)
    lookup[static_cast<unsigned char>(kBase64Alphabet[i])] = static_cast<int>(i);
  if (text.size() % 4 != 0) throw ParseError("base64: length not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
        v <<= 6;
        continue;
      }
      const int d = lookup[static_cast<unsigned char>(c)];
      if (d < 0 || pad > 0) throw ParseError("base64: invalid character");
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::vector<std::uint8_t> encode_rgb_png(const Render& render) {
  return encode_png({render.width, render.height, 3, 8, render.rgb});
}

std::vector<std::uint8_t> encode_depth_png(std::span<const float> depth, int width, int height) {
  static_assert(std::endian::native == std::endian::little, "depth transport assumes little-endian");
  PngImage image{width, height, 4, 8, {}};
  image.data.resize(depth.size() * 4);
  std::memcpy(image.data.data(), depth.data(), depth.size() * 4);
  return encode_png(image);
}

std::vector<float> decode_depth_png(std::span<const std::uint8_t> bytes, int* width, int* height) {
  const PngImage image = decode_png(bytes);
  if (image.channels != 4 || image.bit_depth != 8)
    throw ParseError("depth png: expected RGBA8");
  std::vector<float> depth(static_cast<std::size_t>(image.width) * image.height);
  std::memcpy(depth.data(), image.data.data(), depth.size() * 4);
  if (width) *width = image.width;
  if (height) *height = image.height;
  return depth;
}

std::vector<std::uint8_t> encode_mask_png(const Render& render) {
  PngImage image{render.width, render.height, 1, 16, {}};
  image.data.reserve(render.instance_mask.size() * 2);
  for (InstanceId id : render.instance_mask) {
    if (id > 0xffff) throw ValidationError("mask png: instance id exceeds 16 bits");
    image.data.push_back(static_cast<std::uint8_t>(id >> 8));
    image.data.push_back(static_cast<std::uint8_t>(id & 0xff));
  }
  return encode_png(image);
}

void write_pfm(const std::filesystem::path& path, std::span<const float> depth, int width,
               int height) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "Pf\n" << width << ' ' << height << "\n-1\n";
  for (int r = height - 1; r >= 0; --r)
    out.write(reinterpret_cast<const char*>(depth.data() + static_cast<std::size_t>(r) * width),
              static_cast<std::streamsize>(width * sizeof(float)));
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<float> read_pfm(const std::filesystem::path& path, int* width, int* height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  in.get();
  if (magic != "Pf" || w <= 0 || h <= 0 || scale >= 0.0)
    throw ParseError("pfm: unsupported header in " + path.string());
  std::vector<float> depth(static_cast<std::size_t>(w) * h);
  for (int r = h - 1; r >= 0; --r)
    in.read(reinterpret_cast<char*>(depth.data() + static_cast<std::size_t>(r) * w),
            static_cast<std::streamsize>(w * sizeof(float)));
  if (!in) throw ParseError("pfm: truncated data in " + path.string());
  if (width) *width = w;
  if (height) *height = h;
  return depth;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace forge
