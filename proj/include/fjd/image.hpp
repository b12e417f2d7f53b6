#pragma once

#include <cstddef>
#include <vector>

namespace fjd {

/// Row-major H x W x C raster. Sprite images hold intensities in [0, 1]; label
/// rasters (masks, box maps) hold small non-negative integers.
struct Image {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<float> pixels;

  Image() = default;
  Image(int h, int w, int c = 1)
      : height(h), width(w), channels(c), pixels(static_cast<std::size_t>(h) * w * c, 0.0f) {}

  std::size_t size() const { return pixels.size(); }
  float& at(int row, int col, int ch = 0) { return pixels[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const { return pixels[index(row, col, ch)]; }

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int row, int col, int ch) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
};

}  // namespace fjd
