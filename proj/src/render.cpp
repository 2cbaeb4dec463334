#include "zapfield/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <zlib.h>

namespace zapfield::render {

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || x >= width || y < 0 || y >= height) return;
    const size_t i = (static_cast<size_t>(y) * width + x) * 3;
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
}

void Image::line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
    const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        set(x0, y0, r, g, b);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) { err += dy; x0 += sx; }
        if (e2 <= dx) { err += dx; y0 += sy; }
    }
}

void Image::disc(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int y = -radius; y <= radius; ++y)
        for (int x = -radius; x <= radius; ++x)
            if (x * x + y * y <= radius * radius) set(cx + x, cy + y, r, g, b);
}

namespace {

void append_u32(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xFF));
    out.push_back(static_cast<char>((v >> 16) & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
    append_u32(out, static_cast<std::uint32_t>(data.size()));
    std::string body(type, 4);
    body += data;
    out += body;
    const auto crc = crc32(0, reinterpret_cast<const Bytef*>(body.data()),
                           static_cast<uInt>(body.size()));
    append_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::string encode_png(const Image& image) {
    std::string out("\x89PNG\r\n\x1a\n", 8);

    std::string ihdr;
    append_u32(ihdr, static_cast<std::uint32_t>(image.width));
    append_u32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr += '\x08';  // bit depth
    ihdr += '\x02';  // truecolor
    ihdr += std::string(3, '\0');
    append_chunk(out, "IHDR", ihdr);

    // filter byte 0 before each scanline
    std::string raw;
    raw.reserve(static_cast<size_t>(image.height) * (1 + static_cast<size_t>(image.width) * 3));
    for (int y = 0; y < image.height; ++y) {
        raw.push_back('\0');
        raw.append(reinterpret_cast<const char*>(&image.rgb[static_cast<size_t>(y) * image.width * 3]),
                   static_cast<size_t>(image.width) * 3);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
        throw std::runtime_error("PNG compression failed");
    compressed.resize(bound);
    append_chunk(out, "IDAT", compressed);
    append_chunk(out, "IEND", "");
    return out;
}

namespace {

constexpr int kPlotW = 640, kPlotH = 480, kMargin = 40;

}  // namespace

Image plot_distance_series(const std::vector<double>& series) {
    Image img(kPlotW, kPlotH);
    img.line(kMargin, kPlotH - kMargin, kPlotW - kMargin, kPlotH - kMargin, 0, 0, 0);
    img.line(kMargin, kMargin, kMargin, kPlotH - kMargin, 0, 0, 0);
    if (series.size() < 2) return img;
    double lo = series[0], hi = series[0];
    for (double v : series) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (hi == lo) hi = lo + 1.0;
    const double xw = kPlotW - 2.0 * kMargin;
    const double yh = kPlotH - 2.0 * kMargin;
    auto px = [&](size_t i) {
        return kMargin + static_cast<int>(xw * static_cast<double>(i) / (series.size() - 1));
    };
    auto py = [&](double v) {
        return kPlotH - kMargin - static_cast<int>(yh * (v - lo) / (hi - lo));
    };
    for (size_t i = 1; i < series.size(); ++i)
        img.line(px(i - 1), py(series[i - 1]), px(i), py(series[i]), 30, 60, 200);
    return img;
}

Image plot_final_layout(const std::vector<sim::Vec2>& positions, const sim::VectorField& field,
                        const sim::SimConfig& config) {
    Image img(kPlotW, kPlotH);
    const double sx = (kPlotW - 2.0 * kMargin) / config.width;
    const double sy = (kPlotH - 2.0 * kMargin) / config.height;
    auto px = [&](double x) { return kMargin + static_cast<int>(x * sx); };
    auto py = [&](double y) { return kPlotH - kMargin - static_cast<int>(y * sy); };
    img.line(px(0), py(0), px(config.width), py(0), 0, 0, 0);
    img.line(px(config.width), py(0), px(config.width), py(config.height), 0, 0, 0);
    img.line(px(config.width), py(config.height), px(0), py(config.height), 0, 0, 0);
    img.line(px(0), py(config.height), px(0), py(0), 0, 0, 0);

    double max_mag = 1e-12;
    for (const sim::Vec2& v : field.vectors) max_mag = std::max(max_mag, v.norm());
    const double arrow = 0.4 * config.width / field.n;
    for (int iy = 0; iy < field.n; ++iy) {
        for (int ix = 0; ix < field.n; ++ix) {
            const double cx = (ix + 0.5) * config.width / field.n;
            const double cy = (iy + 0.5) * config.height / field.n;
            const sim::Vec2 v = field.at(ix, iy);
            const double tip_x = cx + arrow * v.x / max_mag;
            const double tip_y = cy + arrow * v.y / max_mag;
            img.line(px(cx), py(cy), px(tip_x), py(tip_y), 180, 180, 180);
            img.disc(px(tip_x), py(tip_y), 2, 180, 180, 180);
        }
    }
    for (const sim::Vec2& p : positions) img.disc(px(p.x), py(p.y), 3, 200, 40, 40);
    return img;
}

}  // namespace zapfield::render
