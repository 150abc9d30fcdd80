#include "remod/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

#include "remod/error.hpp"

namespace remod {

namespace {

// Reads the next whitespace/comment-delimited token of a PNM header.
std::string next_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
    while (pos < bytes.size()) {
        if (bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        } else if (std::isspace(bytes[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(char(bytes[pos++]));
    return tok;
}

std::uint32_t parse_dim(const std::string& tok, const char* what) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw Error(Errc::image_decode_error, std::string("bad ") + what + " field");
    unsigned long v = std::stoul(tok);
    if (v == 0 || v > 1u << 20)
        throw Error(Errc::image_decode_error, std::string(what) + " out of range");
    return std::uint32_t(v);
}

}  // namespace

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) throw Error(Errc::image_decode_error, "truncated header");
    std::size_t pos = 0;
    std::string magic = next_token(bytes, pos);
    std::uint32_t channels;
    if (magic == "P5")
        channels = 1;
    else if (magic == "P6")
        channels = 3;
    else
        throw Error(Errc::image_decode_error, "unsupported format (want P5/P6), got '" + magic + "'");

    ImageBuffer img;
    img.channels = channels;
    img.width = parse_dim(next_token(bytes, pos), "width");
    img.height = parse_dim(next_token(bytes, pos), "height");
    std::uint32_t maxval = parse_dim(next_token(bytes, pos), "maxval");
    if (maxval != 255) throw Error(Errc::image_decode_error, "only maxval 255 supported");
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        throw Error(Errc::image_decode_error, "missing separator after header");
    ++pos;  // single whitespace byte before raster data

    std::size_t expected = std::size_t(img.width) * img.height * channels;
    if (bytes.size() - pos < expected)
        throw Error(Errc::image_decode_error, "raster data truncated");
    img.pixels.assign(bytes.begin() + long(pos), bytes.begin() + long(pos + expected));
    return img;
}

std::vector<std::uint8_t> encode_image(const ImageBuffer& img) {
    if (img.channels != 1 && img.channels != 3)
        throw Error(Errc::image_decode_error, "encode supports 1 or 3 channels");
    if (img.pixels.size() != std::size_t(img.width) * img.height * img.channels)
        throw Error(Errc::image_decode_error, "pixel buffer size mismatch");
    char header[64];
    int len = std::snprintf(header, sizeof header, "%s\n%u %u\n255\n",
                            img.channels == 1 ? "P5" : "P6", img.width, img.height);
    std::vector<std::uint8_t> out(header, header + len);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

ImageBuffer ensure_min_short_side(const ImageBuffer& img, std::uint32_t min_short_side) {
    if (img.empty() || img.short_side() >= min_short_side) return img;
    // Scale up so the short side lands exactly on the minimum.
    double factor = double(min_short_side) / double(img.short_side());
    ImageBuffer out;
    out.channels = img.channels;
    out.width = std::max<std::uint32_t>(1, std::uint32_t(double(img.width) * factor + 0.5));
    out.height = std::max<std::uint32_t>(1, std::uint32_t(double(img.height) * factor + 0.5));
    if (img.width <= img.height)
        out.width = std::max(out.width, min_short_side);
    if (img.height <= img.width)
        out.height = std::max(out.height, min_short_side);
    out.pixels.resize(std::size_t(out.width) * out.height * out.channels);
    for (std::uint32_t y = 0; y < out.height; ++y) {
        std::uint32_t sy = std::min<std::uint32_t>(img.height - 1,
                                                   std::uint32_t(std::uint64_t(y) * img.height / out.height));
        for (std::uint32_t x = 0; x < out.width; ++x) {
            std::uint32_t sx = std::min<std::uint32_t>(img.width - 1,
                                                       std::uint32_t(std::uint64_t(x) * img.width / out.width));
            for (std::uint32_t c = 0; c < out.channels; ++c) {
                out.pixels[(std::size_t(y) * out.width + x) * out.channels + c] =
                    img.pixels[(std::size_t(sy) * img.width + sx) * img.channels + c];
            }
        }
    }
    return out;
}

ImageBuffer crop(const ImageBuffer& img, std::uint32_t x, std::uint32_t y, std::uint32_t w,
                 std::uint32_t h) {
    if (img.empty()) throw Error(Errc::image_decode_error, "crop on empty image");
    x = std::min(x, img.width - 1);
    y = std::min(y, img.height - 1);
    w = std::max<std::uint32_t>(1, std::min(w, img.width - x));
    h = std::max<std::uint32_t>(1, std::min(h, img.height - y));
    ImageBuffer out;
    out.width = w;
    out.height = h;
    out.channels = img.channels;
    out.pixels.resize(std::size_t(w) * h * img.channels);
    for (std::uint32_t row = 0; row < h; ++row) {
        const std::uint8_t* src =
            img.pixels.data() + (std::size_t(y + row) * img.width + x) * img.channels;
        std::copy(src, src + std::size_t(w) * img.channels,
                  out.pixels.data() + std::size_t(row) * w * img.channels);
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), long(bytes.size()));
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= bytes.size(); i += 3) {
        std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back(kB64[v & 63]);
    }
    std::size_t rem = bytes.size() - i;
    if (rem == 1) {
        std::uint32_t v = bytes[i] << 16;
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
        out.push_back(kB64[(v >> 18) & 63]);
        out.push_back(kB64[(v >> 12) & 63]);
        out.push_back(kB64[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t buf = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || std::isspace(static_cast<unsigned char>(c))) continue;
        int v = b64_value(c);
        if (v < 0) throw Error(Errc::parse_error, "invalid base64 character");
        buf = (buf << 6) | std::uint32_t(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(std::uint8_t((buf >> bits) & 0xff));
        }
    }
    return out;
}

}  // namespace remod
