#include "sflow/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace sflow {

namespace {

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

bool is_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  return bytes.size() >= 8 && std::equal(sig, sig + 8, bytes.begin());
}

bool is_pnm(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6');
}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::io_failure, std::string("corrupt PNG: ") + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::io_failure, "corrupt PNG: " + msg);
  }
  std::vector<double> data(raw.size());
  std::transform(raw.begin(), raw.end(), data.begin(),
                 [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
  return ImageBuffer(static_cast<int>(image.width), static_cast<int>(image.height), channels,
                     std::move(data));
}

// Parses the whitespace/comment separated header fields of a binary PNM.
class PnmHeader {
 public:
  explicit PnmHeader(std::span<const std::uint8_t> bytes) : bytes_(bytes), pos_(2) {}

  int next_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorCode::io_failure, "malformed PNM header");
    }
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 24)) throw Error(ErrorCode::io_failure, "PNM header value too large");
      ++pos_;
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() const { return pos_ + 1; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes) {
  const int channels = bytes[1] == '6' ? 3 : 1;
  PnmHeader header(bytes);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0) throw Error(ErrorCode::io_failure, "PNM has empty raster");
  if (maxval <= 0 || maxval > 255) {
    throw Error(ErrorCode::unsupported_format, "only 8-bit PNM is supported");
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                            static_cast<std::size_t>(channels);
  const std::size_t offset = header.raster_offset();
  if (offset > bytes.size() || bytes.size() - offset < count) {
    throw Error(ErrorCode::io_failure, "truncated PNM raster");
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = static_cast<double>(bytes[offset + i]) / static_cast<double>(maxval);
  }
  return ImageBuffer(width, height, channels, std::move(data));
}

std::vector<std::uint8_t> quantized(const ImageBuffer& img) {
  std::vector<std::uint8_t> raw(img.data().size());
  std::transform(img.data().begin(), img.data().end(), raw.begin(), quantize);
  return raw;
}

std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img) {
  const std::string header = std::string(img.channels() == 3 ? "P6" : "P5") + "\n" +
                             std::to_string(img.width()) + " " + std::to_string(img.height()) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const auto raw = quantized(img);
  out.insert(out.end(), raw.begin(), raw.end());
  return out;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::io_failure, "read failed for " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_failure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::io_failure, "write failed for " + path.string());
}

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pnm(bytes)) return decode_pnm(bytes);
  if (bytes.empty()) throw Error(ErrorCode::io_failure, "empty image data");
  throw Error(ErrorCode::unsupported_format, "not a PNG or binary PGM/PPM stream");
}

ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto raw = quantized(img);

  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::io_failure, std::string("PNG encode failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::io_failure, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_file(path, encode_png(img));
  } else if (ext == ".pgm" || ext == ".ppm") {
    if ((ext == ".pgm") != (img.channels() == 1)) {
      throw Error(ErrorCode::unsupported_format,
                  ext + " cannot hold a " + std::to_string(img.channels()) + "-channel image");
    }
    write_file(path, encode_pnm(img));
  } else {
    throw Error(ErrorCode::unsupported_format, "unknown image extension '" + ext + "'");
  }
}

Mask image_to_mask(const ImageBuffer& img) {
  const ImageBuffer gray = to_gray(img);
  Mask m(gray.width(), gray.height());
  for (int y = 0; y < gray.height(); ++y) {
    for (int x = 0; x < gray.width(); ++x) m.set(x, y, gray.at(x, y) >= 0.5);
  }
  return m;
}

ImageBuffer mask_to_image(const Mask& m) {
  ImageBuffer img(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) img.at(x, y) = m.hole(x, y) ? 1.0 : 0.0;
  }
  return img;
}

Mask load_mask(const std::filesystem::path& path) { return image_to_mask(load_image(path)); }

void save_mask(const Mask& m, const std::filesystem::path& path) {
  save_image(mask_to_image(m), path);
}

std::vector<std::uint8_t> encode_flo(const FlowField& flow) {
  static_assert(sizeof(float) == 4);
  std::vector<std::uint8_t> out = {'P', 'I', 'E', 'H'};
  out.reserve(12 + flow.vectors().size() * 8);
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (const FlowVector& v : flow.vectors()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v.dx)));
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v.dy)));
  }
  return out;
}

FlowField decode_flo(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "PIEH")) {
    throw Error(ErrorCode::bad_magic, "missing PIEH tag");
  }
  if (bytes.size() < 12) throw Error(ErrorCode::io_failure, "truncated .flo header");
  const auto width = static_cast<std::int32_t>(get_u32(bytes, 4));
  const auto height = static_cast<std::int32_t>(get_u32(bytes, 8));
  if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16)) {
    throw Error(ErrorCode::io_failure, "implausible .flo dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() != 12 + count * 8) throw Error(ErrorCode::io_failure, ".flo size mismatch");
  FlowField flow(width, height);
  std::size_t at = 12;
  for (FlowVector& v : flow.vectors()) {
    v.dx = std::bit_cast<float>(get_u32(bytes, at));
    v.dy = std::bit_cast<float>(get_u32(bytes, at + 4));
    at += 8;
  }
  return flow;
}

FlowField read_flo(const std::filesystem::path& path) { return decode_flo(read_file(path)); }

void write_flo(const FlowField& flow, const std::filesystem::path& path) {
  write_file(path, encode_flo(flow));
}

}  // namespace sflow
