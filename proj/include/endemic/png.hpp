#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace endemic {

// Minimal RGB8 canvas with a PNG writer (zlib-deflated) and a 5x7 bitmap
// font covering what the report plots need.
class Canvas {
 public:
  Canvas(int width, int height);
  void fill(std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g,
            std::uint8_t b);
  void hline(int x0, int x1, int y, std::uint8_t r, std::uint8_t g,
             std::uint8_t b);
  void vline(int x, int y0, int y1, std::uint8_t r, std::uint8_t g,
             std::uint8_t b);
  // lowercase letters, digits, '.', '-', '_', '%', space
  void text(int x, int y, const std::string& s, std::uint8_t r,
            std::uint8_t g, std::uint8_t b);
  void save_png(const std::string& path) const;
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_, height_;
  std::vector<std::uint8_t> pixels_;
};

// Labeled bar chart in [0,1]; one bar per (label, value).
void write_bar_plot(const std::string& path, const std::string& title,
                    const std::vector<std::pair<std::string, double>>& bars);

}  // namespace endemic
