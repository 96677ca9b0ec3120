#include "endemic/png.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace endemic {

namespace {

// 5x7 glyphs, row-major bits (MSB = leftmost column).
struct Glyph {
  char c;
  std::uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {'a', {0x00, 0x00, 0x70, 0x08, 0x78, 0x88, 0x78}},
    {'b', {0x80, 0x80, 0xf0, 0x88, 0x88, 0x88, 0xf0}},
    {'c', {0x00, 0x00, 0x78, 0x80, 0x80, 0x80, 0x78}},
    {'d', {0x08, 0x08, 0x78, 0x88, 0x88, 0x88, 0x78}},
    {'e', {0x00, 0x00, 0x70, 0x88, 0xf8, 0x80, 0x78}},
    {'f', {0x30, 0x48, 0x40, 0xe0, 0x40, 0x40, 0x40}},
    {'g', {0x00, 0x78, 0x88, 0x88, 0x78, 0x08, 0x70}},
    {'h', {0x80, 0x80, 0xf0, 0x88, 0x88, 0x88, 0x88}},
    {'i', {0x20, 0x00, 0x60, 0x20, 0x20, 0x20, 0x70}},
    {'j', {0x10, 0x00, 0x30, 0x10, 0x10, 0x90, 0x60}},
    {'k', {0x80, 0x80, 0x90, 0xa0, 0xc0, 0xa0, 0x90}},
    {'l', {0x60, 0x20, 0x20, 0x20, 0x20, 0x20, 0x70}},
    {'m', {0x00, 0x00, 0xd0, 0xa8, 0xa8, 0xa8, 0xa8}},
    {'n', {0x00, 0x00, 0xf0, 0x88, 0x88, 0x88, 0x88}},
    {'o', {0x00, 0x00, 0x70, 0x88, 0x88, 0x88, 0x70}},
    {'p', {0x00, 0xf0, 0x88, 0x88, 0xf0, 0x80, 0x80}},
    {'q', {0x00, 0x78, 0x88, 0x88, 0x78, 0x08, 0x08}},
    {'r', {0x00, 0x00, 0xb0, 0xc8, 0x80, 0x80, 0x80}},
    {'s', {0x00, 0x00, 0x78, 0x80, 0x70, 0x08, 0xf0}},
    {'t', {0x40, 0x40, 0xe0, 0x40, 0x40, 0x48, 0x30}},
    {'u', {0x00, 0x00, 0x88, 0x88, 0x88, 0x98, 0x68}},
    {'v', {0x00, 0x00, 0x88, 0x88, 0x50, 0x50, 0x20}},
    {'w', {0x00, 0x00, 0xa8, 0xa8, 0xa8, 0xa8, 0x50}},
    {'x', {0x00, 0x00, 0x88, 0x50, 0x20, 0x50, 0x88}},
    {'y', {0x00, 0x88, 0x88, 0x78, 0x08, 0x88, 0x70}},
    {'z', {0x00, 0x00, 0xf8, 0x10, 0x20, 0x40, 0xf8}},
    {'0', {0x70, 0x88, 0x98, 0xa8, 0xc8, 0x88, 0x70}},
    {'1', {0x20, 0x60, 0x20, 0x20, 0x20, 0x20, 0x70}},
    {'2', {0x70, 0x88, 0x08, 0x30, 0x40, 0x80, 0xf8}},
    {'3', {0x70, 0x88, 0x08, 0x30, 0x08, 0x88, 0x70}},
    {'4', {0x10, 0x30, 0x50, 0x90, 0xf8, 0x10, 0x10}},
    {'5', {0xf8, 0x80, 0xf0, 0x08, 0x08, 0x88, 0x70}},
    {'6', {0x30, 0x40, 0x80, 0xf0, 0x88, 0x88, 0x70}},
    {'7', {0xf8, 0x08, 0x10, 0x20, 0x40, 0x40, 0x40}},
    {'8', {0x70, 0x88, 0x88, 0x70, 0x88, 0x88, 0x70}},
    {'9', {0x70, 0x88, 0x88, 0x78, 0x08, 0x10, 0x60}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x60, 0x60}},
    {'-', {0x00, 0x00, 0x00, 0xf8, 0x00, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xf8}},
    {'%', {0xc8, 0xc8, 0x10, 0x20, 0x40, 0x98, 0x98}},
};

const Glyph* find_glyph(char c) {
  for (const auto& g : kFont)
    if (g.c == c) return &g;
  return nullptr;
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char type[4],
               const std::vector<std::uint8_t>& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto crc = crc32(0, out.data() + crc_start,
                         static_cast<uInt>(out.size() - crc_start));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

Canvas::Canvas(int width, int height)
    : width_(width),
      height_(height),
      pixels_(static_cast<std::size_t>(width) * height * 3, 255) {}

void Canvas::fill(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) set(x, y, r, g, b);
}

void Canvas::set(int x, int y, std::uint8_t r, std::uint8_t g,
                 std::uint8_t b) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const std::size_t i =
      (static_cast<std::size_t>(y) * width_ + static_cast<std::size_t>(x)) * 3;
  pixels_[i] = r;
  pixels_[i + 1] = g;
  pixels_[i + 2] = b;
}

void Canvas::rect(int x0, int y0, int x1, int y1, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) set(x, y, r, g, b);
}

void Canvas::hline(int x0, int x1, int y, std::uint8_t r, std::uint8_t g,
                   std::uint8_t b) {
  for (int x = x0; x <= x1; ++x) set(x, y, r, g, b);
}

void Canvas::vline(int x, int y0, int y1, std::uint8_t r, std::uint8_t g,
                   std::uint8_t b) {
  for (int y = y0; y <= y1; ++y) set(x, y, r, g, b);
}

void Canvas::text(int x, int y, const std::string& s, std::uint8_t r,
                  std::uint8_t g, std::uint8_t b) {
  int cx = x;
  for (char c : s) {
    if (const Glyph* gl = find_glyph(c)) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if (gl->rows[row] & (0x80 >> col)) set(cx + col, y + row, r, g, b);
    }
    cx += 6;
  }
}

void Canvas::save_png(const std::string& path) const {
  // filter byte 0 per scanline
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height_) * (1 + 3 * width_));
  for (int y = 0; y < height_; ++y) {
    raw.push_back(0);
    const std::size_t off = static_cast<std::size_t>(y) * width_ * 3;
    raw.insert(raw.end(), pixels_.begin() + static_cast<long>(off),
               pixels_.begin() + static_cast<long>(off + 3 * width_));
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(),
                static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw std::runtime_error("png deflate failed");
  comp.resize(comp_len);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(width_));
  put_u32_be(ihdr, static_cast<std::uint32_t>(height_));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type: truecolor
  ihdr.push_back(0);
  ihdr.push_back(0);
  ihdr.push_back(0);
  put_chunk(out, "IHDR", ihdr);
  put_chunk(out, "IDAT", comp);
  put_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
}

void write_bar_plot(const std::string& path, const std::string& title,
                    const std::vector<std::pair<std::string, double>>& bars) {
  const int w = 60 + static_cast<int>(bars.size()) * 70 + 20;
  const int h = 240;
  Canvas c(std::max(w, 220), h);
  const int left = 40, bottom = h - 30, top = 30;
  c.text(10, 8, title, 30, 30, 30);
  c.vline(left, top, bottom, 0, 0, 0);
  c.hline(left, c.width() - 10, bottom, 0, 0, 0);
  for (int grid = 0; grid <= 4; ++grid) {
    const int y = bottom - grid * (bottom - top) / 4;
    c.hline(left - 3, left, y, 0, 0, 0);
    char lbl[8];
    std::snprintf(lbl, sizeof(lbl), "%.2f", grid * 0.25);
    c.text(left - 30, y - 3, lbl, 90, 90, 90);
  }
  int x = left + 15;
  for (const auto& [label, value] : bars) {
    const double v = std::min(1.0, std::max(0.0, value));
    const int bh = static_cast<int>(v * (bottom - top));
    c.rect(x, bottom - bh, x + 40, bottom - 1, 70, 110, 190);
    c.text(x, bottom + 6, label.substr(0, 9), 30, 30, 30);
    char val[8];
    std::snprintf(val, sizeof(val), "%.3f", value);
    c.text(x + 4, bottom - bh - 10, val, 30, 30, 30);
    x += 70;
  }
  c.save_png(path);
}

}  // namespace endemic
