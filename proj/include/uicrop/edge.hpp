#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uicrop/image.hpp"

namespace uicrop {

struct EdgeConfig {
    double clahe_clip_limit = 2.0;
    int clahe_grid = 8;        // tiles per axis; images smaller than the grid
                               // fall back to a single global tile
    double gaussian_sigma = 1.4;
    // Thresholds apply to min(255, round(hypot(gx,gy)/4)). A full-contrast
    // step smoothed at sigma 1.4 peaks near 129 on that scale, so the
    // defaults sit at half of the classic 50/150 pair.
    int hysteresis_low = 25;
    int hysteresis_high = 75;
    int dilation_radius = 1;   // Chebyshev

    void validate() const;
};

// Binary information-indication matrix. rows x cols matches the source
// image (rows = height).
class InfoMatrix {
public:
    InfoMatrix() = default;
    InfoMatrix(int rows, int cols);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    uint8_t at(int r, int c) const { return bits_[static_cast<size_t>(r) * cols_ + c]; }
    void set(int r, int c, uint8_t v) { bits_[static_cast<size_t>(r) * cols_ + c] = v ? 1 : 0; }

    const std::vector<uint8_t>& bits() const { return bits_; }
    std::vector<uint8_t>& bits() { return bits_; }

    long long ones() const;

    bool operator==(const InfoMatrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && bits_ == other.bits_;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<uint8_t> bits_;
};

struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<int> gx;           // raw 3x3 Sobel responses, range [-1020, 1020]
    std::vector<int> gy;
    std::vector<float> magnitude;  // hypot(gx, gy)
    std::vector<float> direction;  // atan2(gy, gx), (-pi, pi]
};

// CLAHE: per-tile clipped histograms, excess redistributed, bilinear
// blending between neighboring tile mappings.
GrayImage equalize_adaptive(const GrayImage& img, const EdgeConfig& cfg);

// Separable Gaussian, kernel half-width ceil(3*sigma), normalized to sum 1,
// edge replication at borders. Throws InvalidSigmaError for sigma <= 0.
GrayImage gaussian_smooth(const GrayImage& img, double sigma);

// 3x3 Sobel with edge replication. Throws TooSmallError below 3x3.
GradientField sobel_gradients(const GrayImage& img);

// Thins ridges: a pixel survives when its magnitude is >= both neighbors
// along the quantized gradient direction and strictly greater than at least
// one of them (plateaus keep their endpoints only). Survivors are written as
// min(255, round(hypot(gx,gy)/4)); everything else is 0.
GrayImage non_max_suppress(const GradientField& g);

// Pixels >= high are strong; pixels in [low, high) become 1 iff 8-connected
// (transitively) to a strong pixel. Throws BadThresholdsError if low >= high.
InfoMatrix hysteresis_threshold(const GrayImage& nms, const EdgeConfig& cfg);

// output(i,j) = 1 iff any input 1 within Chebyshev distance radius.
InfoMatrix dilate(const InfoMatrix& m, int radius);

// Full pipeline: grayscale -> CLAHE -> Gaussian -> Sobel -> NMS ->
// hysteresis -> dilation. Deterministic; output dims equal input dims.
InfoMatrix detect_information(const PixelImage& img, const EdgeConfig& cfg);

// PBM (P4) serialization for inspection.
void write_pbm(const InfoMatrix& m, const std::string& path);
InfoMatrix read_pbm(const std::string& path);

}  // namespace uicrop
