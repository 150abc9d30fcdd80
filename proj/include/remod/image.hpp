#pragma once

#include <cstdint>
#include <string>
#include <vector>

// Minimal raster support. The pipeline only needs pixel access for local
// operations (mock segmentation crops, the minimum-short-side resize before
// embedding); binary PGM (P5) and PPM (P6) cover that without an image
// dependency. Remote backends receive the encoded bytes opaquely.

namespace remod {

struct ImageBuffer {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;  // 1 = gray, 3 = rgb
    std::vector<std::uint8_t> pixels;  // row-major, interleaved

    std::uint32_t short_side() const { return width < height ? width : height; }
    bool empty() const { return pixels.empty(); }
};

/// Parse P5/P6 bytes. Throws Error(image_decode_error) on anything else.
ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes);

/// Encode to P5 (1 channel) or P6 (3 channels).
std::vector<std::uint8_t> encode_image(const ImageBuffer& img);

/// Nearest-neighbour resize so that min(width, height) >= min_short_side.
/// Aspect ratio is preserved; images already large enough pass through.
ImageBuffer ensure_min_short_side(const ImageBuffer& img, std::uint32_t min_short_side);

/// Axis-aligned crop; the rectangle is clamped to the image bounds.
ImageBuffer crop(const ImageBuffer& img, std::uint32_t x, std::uint32_t y, std::uint32_t w,
                 std::uint32_t h);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace remod
