#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uicrop/isc.hpp"

namespace uicrop {

struct TokenBudgetModel {
    int patch_size = 14;    // vision-encoder patch edge p
    int target_size = 224;  // sub-image edge S
    int max_subimages = 16; // M
    int attn_heads = 16;    // H
    int head_dim = 64;      // d

    void validate() const;
};

// ceil(w*h / p^2)
long long token_count_full(int w, int h, const TokenBudgetModel& model);

// tokens for one S x S sub-image: ceil(S/p)^2
long long tokens_per_subimage(const TokenBudgetModel& model);

// |sub_images| * tokens_per_subimage
long long token_count_isc(const CropManifest& manifest, const TokenBudgetModel& model);

// Normalized attention-cost model (big-O constants fixed at 1):
//   T_standard = N_full^2 * H * d
//   T_ISC      = w*h + |sub_images| * N_sub^2 * H * d
std::pair<double, double> modeled_costs(int w, int h, const CropManifest& manifest,
                                        const TokenBudgetModel& model);

struct ScalingRow {
    int w = 0;
    int h = 0;
    long long pixels = 0;
    double ms_median = 0.0;
    long long tokens_full = 0;
    long long tokens_isc = 0;
    double t_standard = 0.0;
    double t_isc = 0.0;
    double ratio = 0.0;  // t_standard / t_isc
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    double slope = 0.0;      // ms per pixel
    double intercept = 0.0;  // ms
    double r2 = 0.0;
};

// Times isc_pipeline on seeded synthetic screens at each size (median of
// `repeats` runs after one warm-up, single-threaded, monotonic clock) and
// fits wall-clock against pixel count by least squares.
ScalingReport scaling_probe(const std::vector<std::pair<int, int>>& sizes,
                            const EdgeConfig& ecfg, const ISCConfig& icfg,
                            const TokenBudgetModel& model, int repeats);

// CSV columns: w,h,pixels,ms_median,tokens_full,tokens_isc,t_standard,t_isc,ratio
std::string scaling_report_csv(const ScalingReport& report);
nlohmann::ordered_json scaling_report_summary(const ScalingReport& report);

}  // namespace uicrop
