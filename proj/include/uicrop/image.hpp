#pragma once

#include <cstdint>
#include <vector>

#include "uicrop/errors.hpp"

namespace uicrop {

// Axis-aligned pixel rectangle; (x, y) is the top-left corner.
struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

// 8-bit RGB raster, row-major, tightly packed.
class PixelImage {
public:
    PixelImage() = default;
    PixelImage(int width, int height, uint8_t r = 0, uint8_t g = 0, uint8_t b = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0; }

    const uint8_t* data() const { return data_.data(); }
    uint8_t* data() { return data_.data(); }
    size_t byte_size() const { return data_.size(); }

    const uint8_t* pixel(int x, int y) const {
        return data_.data() + (static_cast<size_t>(y) * width_ + x) * 3;
    }
    uint8_t* pixel(int x, int y) {
        return data_.data() + (static_cast<size_t>(y) * width_ + x) * 3;
    }
    void set_pixel(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
        uint8_t* p = pixel(x, y);
        p[0] = r;
        p[1] = g;
        p[2] = b;
    }

    bool same_bytes(const PixelImage& other) const {
        return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

// 8-bit single-channel raster, row-major.
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, uint8_t fill = 0);

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return width_ == 0; }

    const uint8_t* data() const { return data_.data(); }
    uint8_t* data() { return data_.data(); }
    size_t size() const { return data_.size(); }

    uint8_t at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
    void set(int x, int y, uint8_t v) { data_[static_cast<size_t>(y) * width_ + x] = v; }

    bool same_bytes(const GrayImage& other) const {
        return width_ == other.width_ && height_ == other.height_ && data_ == other.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> data_;
};

// Rec.601 luma, rounded to nearest.
GrayImage to_grayscale(const PixelImage& img);

// Throws OutOfBoundsError if r is not fully inside img.
PixelImage crop_rect(const PixelImage& img, const Rect& r);

// Bilinear interpolation with pixel-center alignment and edge clamping.
// Resizing to the source dimensions is the identity. Throws
// InvalidTargetError when a target dimension is < 1.
PixelImage bilinear_resize(const PixelImage& img, int target_w, int target_h);

}  // namespace uicrop
