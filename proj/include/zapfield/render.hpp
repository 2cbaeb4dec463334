#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zapfield/sim.hpp"

namespace zapfield::render {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major

    Image(int w, int h) : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3, 255) {}
    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);
    void disc(int cx, int cy, int radius, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

// 8-bit RGB PNG, zlib-compressed
std::string encode_png(const Image& image);

// 640x480 line plot of the average-distance series
Image plot_distance_series(const std::vector<double>& series);

// 640x480 scatter of final positions with the field drawn as arrows
Image plot_final_layout(const std::vector<sim::Vec2>& positions, const sim::VectorField& field,
                        const sim::SimConfig& config);

}  // namespace zapfield::render
