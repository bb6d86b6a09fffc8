#include "doctest.h"
#include "uicrop/budget.hpp"
#include "uicrop/synth.hpp"

using namespace uicrop;

TEST_CASE("full-image token counts") {
    TokenBudgetModel model;
    CHECK(token_count_full(1920, 1080, model) == 10580);
    CHECK(token_count_full(224, 224, model) == 256);
    CHECK(token_count_full(14, 14, model) == 1);
    CHECK(token_count_full(1, 1, model) == 1);
}

TEST_CASE("per-crop token counts") {
    TokenBudgetModel model;
    CHECK(tokens_per_subimage(model) == 256);

    CropManifest manifest;
    manifest.sub_images.resize(16, PixelImage(1, 1));
    CHECK(token_count_isc(manifest, model) == 4096);

    CropManifest empty;
    CHECK(token_count_isc(empty, model) == 0);

    TokenBudgetModel odd;
    odd.target_size = 225;  // not a patch multiple: ceil(225/14) = 17
    CHECK(tokens_per_subimage(odd) == 289);
}

TEST_CASE("modeled costs reduce to the preprocessing term for empty manifests") {
    TokenBudgetModel model;
    CropManifest empty;
    auto [ts, ti] = modeled_costs(1920, 1080, empty, model);
    CHECK(ti == 1920.0 * 1080.0);
    CHECK(ts == doctest::Approx(10580.0 * 10580.0 * 16 * 64));
}

TEST_CASE("the 1080p/16-crop attention ratio matches the closed forms") {
    TokenBudgetModel model;
    CropManifest manifest;
    manifest.sub_images.resize(16, PixelImage(1, 1));
    auto [ts, ti] = modeled_costs(1920, 1080, manifest, model);
    const double n_full = 10580.0;
    const double expected_ts = n_full * n_full * 16.0 * 64.0;
    const double expected_ti = 1920.0 * 1080.0 + 16.0 * 256.0 * 256.0 * 16.0 * 64.0;
    CHECK(ts == expected_ts);
    CHECK(ti == expected_ti);
    CHECK(ts / ti == doctest::Approx(106.545).epsilon(1e-3));
}

TEST_CASE("doubling resolution squares the standard cost but not the ISC cost") {
    TokenBudgetModel model;
    CropManifest manifest;
    manifest.sub_images.resize(8, PixelImage(1, 1));
    auto [ts1, ti1] = modeled_costs(960, 540, manifest, model);
    auto [ts2, ti2] = modeled_costs(1920, 1080, manifest, model);
    CHECK(ts2 / ts1 == doctest::Approx(16.0).epsilon(0.01));  // tokens x4 -> cost x16
    const double fixed = 8.0 * 256.0 * 256.0 * 16.0 * 64.0;
    CHECK(ti2 - fixed == doctest::Approx(4.0 * (ti1 - fixed)));
}

TEST_CASE("ISC cost is monotone in resolution and crop count") {
    TokenBudgetModel model;
    CropManifest small;
    small.sub_images.resize(2, PixelImage(1, 1));
    CropManifest big;
    big.sub_images.resize(9, PixelImage(1, 1));
    CHECK(modeled_costs(800, 600, small, model).second <
          modeled_costs(800, 600, big, model).second);
    CHECK(modeled_costs(800, 600, small, model).second <
          modeled_costs(801, 600, small, model).second);
}

TEST_CASE("token counts from real manifests respect the budget cap") {
    EdgeConfig ecfg;
    ISCConfig icfg;
    TokenBudgetModel model;
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        ScreenSpec spec;
        spec.width = 960;
        spec.height = 640;
        spec.seed = seed;
        spec.element_count = 18;
        spec.profile = DensityProfile::dense;
        auto [img, gt] = generate_screen(spec);
        CropManifest manifest = isc_pipeline(img, ecfg, icfg);
        CHECK(token_count_isc(manifest, model) <=
              static_cast<long long>(model.max_subimages) * tokens_per_subimage(model));
    }
}

TEST_CASE("the ratio grows with resolution for a fixed manifest") {
    TokenBudgetModel model;
    CropManifest manifest;
    manifest.sub_images.resize(12, PixelImage(1, 1));
    double prev = 0.0;
    for (int scale = 1; scale <= 4; ++scale) {
        auto [ts, ti] = modeled_costs(640 * scale, 480 * scale, manifest, model);
        CHECK(ts / ti > prev);
        prev = ts / ti;
    }
}

TEST_CASE("the scaling probe produces a full report") {
    EdgeConfig ecfg;
    ISCConfig icfg;
    TokenBudgetModel model;
    std::vector<std::pair<int, int>> sizes = {{256, 160}, {320, 240}, {480, 320}, {640, 400}};
    ScalingReport report = scaling_probe(sizes, ecfg, icfg, model, 3);
    REQUIRE(report.rows.size() == 4);
    for (size_t i = 0; i < 4; ++i) {
        CHECK(report.rows[i].pixels ==
              static_cast<long long>(sizes[i].first) * sizes[i].second);
        CHECK(report.rows[i].ms_median > 0.0);
        CHECK(report.rows[i].tokens_full ==
              token_count_full(sizes[i].first, sizes[i].second, model));
        CHECK(report.rows[i].ratio > 1.0);
    }
    const std::string csv = scaling_report_csv(report);
    CHECK(csv.rfind("w,h,pixels,ms_median,tokens_full,tokens_isc,t_standard,t_isc,ratio\n",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

    auto j = scaling_report_summary(report);
    CHECK(j.contains("slope_ms_per_pixel"));
    CHECK(j.contains("r2"));
    CHECK(j["sizes"].size() == 4);
}

TEST_CASE("probe preconditions are enforced") {
    EdgeConfig ecfg;
    ISCConfig icfg;
    TokenBudgetModel model;
    std::vector<std::pair<int, int>> three = {{100, 100}, {200, 200}, {300, 300}};
    CHECK_THROWS_AS(scaling_probe(three, ecfg, icfg, model, 3), ConfigError);
    std::vector<std::pair<int, int>> four = {{100, 100}, {200, 200}, {300, 300}, {400, 400}};
    CHECK_THROWS_AS(scaling_probe(four, ecfg, icfg, model, 2), ConfigError);
}
