#include "synmind/viz/png.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "synmind/common/errors.hpp"

namespace synmind::viz {

namespace {

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>(v & 0xff));
}

void push_chunk(std::vector<unsigned char>& out, const char type[4],
                const std::vector<unsigned char>& payload) {
  push_u32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const uLong crc = crc32(0L, out.data() + crc_start,
                          static_cast<uInt>(out.size() - crc_start));
  push_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png_gray(const std::filesystem::path& path,
                    const nn::Tensor<double>& image) {
  if (image.rank() != 2) {
    throw DimensionError("png: expected a 2D image, got " + image.shape_string());
  }
  const std::size_t h = image.dim(0), w = image.dim(1);

  // Filter byte 0 per scanline, 8-bit grayscale.
  std::vector<unsigned char> raw;
  raw.reserve(h * (w + 1));
  for (std::size_t y = 0; y < h; ++y) {
    raw.push_back(0);
    for (std::size_t x = 0; x < w; ++x) {
      const double v = std::clamp(image.at(y, x), 0.0, 1.0);
      raw.push_back(static_cast<unsigned char>(v * 255.0 + 0.5));
    }
  }

  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(),
                static_cast<uLong>(raw.size()), 6) != Z_OK) {
    throw FormatError("png: zlib compression failed");
  }
  compressed.resize(bound);

  std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<unsigned char> ihdr;
  push_u32(ihdr, static_cast<std::uint32_t>(w));
  push_u32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(0);  // grayscale
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // no interlace
  push_chunk(out, "IHDR", ihdr);
  push_chunk(out, "IDAT", compressed);
  push_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("png: cannot write " + path.string());
}

}  // namespace synmind::viz
