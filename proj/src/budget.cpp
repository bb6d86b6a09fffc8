#include "uicrop/budget.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "uicrop/synth.hpp"

namespace uicrop {

void TokenBudgetModel::validate() const {
    if (patch_size < 1) throw ConfigError("patch-size must be at least 1");
    if (target_size < 1) throw ConfigError("target-size must be at least 1");
    if (max_subimages < 1) throw ConfigError("max-subimages must be at least 1");
    if (attn_heads < 1 || head_dim < 1) throw ConfigError("attention shape must be positive");
}

long long token_count_full(int w, int h, const TokenBudgetModel& model) {
    const long long pixels = static_cast<long long>(w) * h;
    const long long patch = static_cast<long long>(model.patch_size) * model.patch_size;
    return (pixels + patch - 1) / patch;
}

long long tokens_per_subimage(const TokenBudgetModel& model) {
    const long long per_axis =
        (model.target_size + model.patch_size - 1) / model.patch_size;
    return per_axis * per_axis;
}

long long token_count_isc(const CropManifest& manifest, const TokenBudgetModel& model) {
    return static_cast<long long>(manifest.sub_images.size()) * tokens_per_subimage(model);
}

std::pair<double, double> modeled_costs(int w, int h, const CropManifest& manifest,
                                        const TokenBudgetModel& model) {
    const double n_full = static_cast<double>(token_count_full(w, h, model));
    const double n_sub = static_cast<double>(tokens_per_subimage(model));
    const double hd = static_cast<double>(model.attn_heads) * model.head_dim;
    const double t_standard = n_full * n_full * hd;
    const double t_isc = static_cast<double>(w) * h +
                         static_cast<double>(manifest.sub_images.size()) * n_sub * n_sub * hd;
    return {t_standard, t_isc};
}

ScalingReport scaling_probe(const std::vector<std::pair<int, int>>& sizes,
                            const EdgeConfig& ecfg, const ISCConfig& icfg,
                            const TokenBudgetModel& model, int repeats) {
    if (sizes.size() < 4) throw ConfigError("scaling probe needs at least 4 sizes");
    if (repeats < 3) throw ConfigError("scaling probe needs at least 3 repeats");

    using clock = std::chrono::steady_clock;
    ScalingReport report;

    for (const auto& [w, h] : sizes) {
        ScreenSpec spec;
        spec.width = w;
        spec.height = h;
        spec.seed = 7;
        spec.profile = DensityProfile::dense;
        spec.element_count = std::max(6, static_cast<int>(
            (static_cast<long long>(w) * h) / 120000));
        auto [img, gt] = generate_screen(spec);

        CropManifest manifest = isc_pipeline(img, ecfg, icfg);  // warm-up

        std::vector<double> ms(repeats);
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = clock::now();
            manifest = isc_pipeline(img, ecfg, icfg);
            const auto t1 = clock::now();
            ms[r] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        std::sort(ms.begin(), ms.end());
        const double median = (repeats % 2 == 1)
                                  ? ms[repeats / 2]
                                  : 0.5 * (ms[repeats / 2 - 1] + ms[repeats / 2]);

        ScalingRow row;
        row.w = w;
        row.h = h;
        row.pixels = static_cast<long long>(w) * h;
        row.ms_median = median;
        row.tokens_full = token_count_full(w, h, model);
        row.tokens_isc = token_count_isc(manifest, model);
        auto [ts, ti] = modeled_costs(w, h, manifest, model);
        row.t_standard = ts;
        row.t_isc = ti;
        row.ratio = ts / ti;
        report.rows.push_back(row);
    }

    // Least squares ms ~ slope * pixels + intercept.
    const size_t n = report.rows.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const ScalingRow& r : report.rows) {
        const double x = static_cast<double>(r.pixels);
        sx += x;
        sy += r.ms_median;
        sxx += x * x;
        sxy += x * r.ms_median;
    }
    const double denom = n * sxx - sx * sx;
    report.slope = denom != 0 ? (n * sxy - sx * sy) / denom : 0.0;
    report.intercept = (sy - report.slope * sx) / n;

    const double mean_y = sy / n;
    double ss_res = 0, ss_tot = 0;
    for (const ScalingRow& r : report.rows) {
        const double fit = report.slope * static_cast<double>(r.pixels) + report.intercept;
        ss_res += (r.ms_median - fit) * (r.ms_median - fit);
        ss_tot += (r.ms_median - mean_y) * (r.ms_median - mean_y);
    }
    report.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return report;
}

std::string scaling_report_csv(const ScalingReport& report) {
    std::string out = "w,h,pixels,ms_median,tokens_full,tokens_isc,t_standard,t_isc,ratio\n";
    char line[256];
    for (const ScalingRow& r : report.rows) {
        std::snprintf(line, sizeof(line), "%d,%d,%lld,%.3f,%lld,%lld,%.0f,%.0f,%.3f\n", r.w,
                      r.h, r.pixels, r.ms_median, r.tokens_full, r.tokens_isc, r.t_standard,
                      r.t_isc, r.ratio);
        out += line;
    }
    return out;
}

nlohmann::ordered_json scaling_report_summary(const ScalingReport& report) {
    nlohmann::ordered_json j;
    j["sizes"] = nlohmann::ordered_json::array();
    for (const ScalingRow& r : report.rows) {
        j["sizes"].push_back({{"w", r.w},
                              {"h", r.h},
                              {"pixels", r.pixels},
                              {"ms_median", r.ms_median},
                              {"tokens_full", r.tokens_full},
                              {"tokens_isc", r.tokens_isc},
                              {"ratio", r.ratio}});
    }
    j["slope_ms_per_pixel"] = report.slope;
    j["intercept_ms"] = report.intercept;
    j["r2"] = report.r2;
    return j;
}

}  // namespace uicrop
