#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "uicrop/edge.hpp"
#include "uicrop/image.hpp"

namespace uicrop {

struct ISCConfig {
    int k_min = 64;               // initial window side
    double rho_min = 0.10;        // density threshold at k_min
    double alpha = 1.5;           // window expansion factor
    int n_max = 16;               // region budget
    int target_size = 224;        // uniform resize target S
    double rho_floor = 0.005;     // lower clamp for the scaled threshold
    bool include_context_thumbnail = false;

    void validate() const;
};

struct Region {
    int x = 0;
    int y = 0;
    int k = 0;          // square side; 0 marks the whole-frame thumbnail
    int id = 0;         // extraction order, starting at 1; 0 = thumbnail
    double density = 0.0;
};

struct CropManifest {
    std::string source_path;
    int source_width = 0;
    int source_height = 0;
    ISCConfig config;
    std::vector<Region> regions;        // density-descending, ties by id;
                                        // optional thumbnail appended last
    std::vector<PixelImage> sub_images; // aligned 1:1 with regions
    double residual_coverage = 0.0;     // original 1-pixels covered by regions
    InfoMatrix info;                    // the detected matrix
};

// Exact fraction of 1-entries in the k x k window at (x, y).
// Throws OutOfBoundsError when the window leaves the matrix.
double window_density(const InfoMatrix& m, int x, int y, int k);

// max(rho_min / (k / k_min)^2, rho_floor)
double scale_threshold(const ISCConfig& cfg, int k);

// Multi-scale sliding-window extraction. Scans row-major with step
// max(k/4, 32) per scale, zeroes accepted windows in a private copy so each
// 1-pixel feeds at most one region's density, grows k by ceil(alpha*k), and
// stops at n_max regions. Result is sorted by density descending, ties by
// extraction id.
std::vector<Region> adaptive_extract(const InfoMatrix& m, const ISCConfig& cfg);

// Crops and resizes each region to target_size^2, computes residual
// coverage against the original matrix, optionally appends the whole-image
// context thumbnail (id 0).
CropManifest finalize_crops(const PixelImage& img, const InfoMatrix& m,
                            const std::vector<Region>& regions, const ISCConfig& cfg);

// detect_information -> adaptive_extract -> finalize_crops.
CropManifest isc_pipeline(const PixelImage& img, const EdgeConfig& ecfg, const ISCConfig& icfg);

// Row-major run-length encoding, starting with the count of leading zeros,
// then alternating 1-runs and 0-runs.
std::vector<long long> rle_encode(const InfoMatrix& m);
InfoMatrix rle_decode(int rows, int cols, const std::vector<long long>& runs);

nlohmann::ordered_json manifest_to_json(const CropManifest& manifest);

}  // namespace uicrop
