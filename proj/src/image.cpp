#include "uicrop/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace uicrop {

PixelImage::PixelImage(int width, int height, uint8_t r, uint8_t g, uint8_t b)
    : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw Error("PixelImage dimensions must be at least 1x1");
    }
    data_.resize(static_cast<size_t>(width) * height * 3);
    if (r == g && g == b) {
        std::memset(data_.data(), r, data_.size());
    } else {
        for (size_t i = 0; i < data_.size(); i += 3) {
            data_[i] = r;
            data_[i + 1] = g;
            data_[i + 2] = b;
        }
    }
}

GrayImage::GrayImage(int width, int height, uint8_t fill) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
        throw Error("GrayImage dimensions must be at least 1x1");
    }
    data_.assign(static_cast<size_t>(width) * height, fill);
}

GrayImage to_grayscale(const PixelImage& img) {
    GrayImage out(img.width(), img.height());
    const uint8_t* src = img.data();
    uint8_t* dst = out.data();
    const size_t n = out.size();
    for (size_t i = 0; i < n; ++i) {
        const uint8_t* p = src + i * 3;
        double y = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        long v = std::lround(y);
        dst[i] = static_cast<uint8_t>(std::clamp(v, 0L, 255L));
    }
    return out;
}

PixelImage crop_rect(const PixelImage& img, const Rect& r) {
    if (r.w < 1 || r.h < 1 || r.x < 0 || r.y < 0 || r.x + r.w > img.width() ||
        r.y + r.h > img.height()) {
        throw OutOfBoundsError("crop rectangle exceeds image extent");
    }
    PixelImage out(r.w, r.h);
    const size_t row_bytes = static_cast<size_t>(r.w) * 3;
    for (int y = 0; y < r.h; ++y) {
        std::memcpy(out.pixel(0, y), img.pixel(r.x, r.y + y), row_bytes);
    }
    return out;
}

PixelImage bilinear_resize(const PixelImage& img, int target_w, int target_h) {
    if (target_w < 1 || target_h < 1) {
        throw InvalidTargetError("resize target must be at least 1x1");
    }
    const int sw = img.width();
    const int sh = img.height();
    PixelImage out(target_w, target_h);

    const double sx = static_cast<double>(sw) / target_w;
    const double sy = static_cast<double>(sh) / target_h;

    std::vector<int> x0(target_w);
    std::vector<int> x1(target_w);
    std::vector<double> wx(target_w);
    for (int x = 0; x < target_w; ++x) {
        double fx = (x + 0.5) * sx - 0.5;
        fx = std::clamp(fx, 0.0, static_cast<double>(sw - 1));
        x0[x] = static_cast<int>(fx);
        x1[x] = std::min(x0[x] + 1, sw - 1);
        wx[x] = fx - x0[x];
    }

    for (int y = 0; y < target_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(sh - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, sh - 1);
        const double vy = fy - y0;
        for (int x = 0; x < target_w; ++x) {
            const uint8_t* p00 = img.pixel(x0[x], y0);
            const uint8_t* p01 = img.pixel(x1[x], y0);
            const uint8_t* p10 = img.pixel(x0[x], y1);
            const uint8_t* p11 = img.pixel(x1[x], y1);
            const double vx = wx[x];
            uint8_t* q = out.pixel(x, y);
            for (int c = 0; c < 3; ++c) {
                double top = (1.0 - vx) * p00[c] + vx * p01[c];
                double bot = (1.0 - vx) * p10[c] + vx * p11[c];
                double v = (1.0 - vy) * top + vy * bot;
                q[c] = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace uicrop
