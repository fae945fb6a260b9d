#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sflow/image.hpp"

namespace sflow {

// Reads 8-bit PNG (gray, gray+alpha, RGB, RGBA, palette) or binary PGM/PPM.
// Alpha is dropped; 16-bit PNG samples are reduced to 8 bits. Samples are
// scaled from [0, maxval] to [0, 1].
ImageBuffer load_image(const std::filesystem::path& path);

// Format follows the extension: .png, .pgm (1 channel), .ppm (3 channels).
// Samples are quantized to round(v * 255).
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

// Masks travel as 1-channel images: any sample >= 0.5 is a hole.
Mask image_to_mask(const ImageBuffer& img);
ImageBuffer mask_to_image(const Mask& m);
Mask load_mask(const std::filesystem::path& path);
void save_mask(const Mask& m, const std::filesystem::path& path);

// Middlebury .flo: "PIEH", int32 width, int32 height (little-endian), then
// row-major float32 (dx, dy) pairs. Values are narrowed to float32 on write.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const FlowField& flow, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_flo(const FlowField& flow);
FlowField decode_flo(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sflow
