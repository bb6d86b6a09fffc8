#include <cmath>
#include <cstdio>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "uicrop/edge.hpp"
#include "uicrop/rng.hpp"

using namespace uicrop;

namespace {

GradientField field_from(int w, int h, const std::vector<int>& gx, const std::vector<int>& gy) {
    GradientField g;
    g.width = w;
    g.height = h;
    g.gx = gx;
    g.gy = gy;
    g.magnitude.resize(gx.size());
    g.direction.resize(gx.size());
    for (size_t i = 0; i < gx.size(); ++i) {
        g.magnitude[i] = static_cast<float>(std::hypot(gx[i], gy[i]));
        g.direction[i] = static_cast<float>(std::atan2(gy[i], gx[i]));
    }
    return g;
}

}  // namespace

TEST_CASE("CLAHE keeps constant images constant") {
    EdgeConfig cfg;
    GrayImage img(64, 48, 77);
    GrayImage out = equalize_adaptive(img, cfg);
    const uint8_t v = out.at(0, 0);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == v);
}

TEST_CASE("CLAHE keeps two levels distinct and ordered") {
    EdgeConfig cfg;
    GrayImage img(64, 64, 0);
    for (int y = 0; y < 64; ++y) {
        for (int x = 32; x < 64; ++x) img.set(x, y, 255);
    }
    GrayImage out = equalize_adaptive(img, cfg);
    uint8_t dark_max = 0;
    uint8_t bright_min = 255;
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            if (img.at(x, y) == 0) {
                dark_max = std::max(dark_max, out.at(x, y));
            } else {
                bright_min = std::min(bright_min, out.at(x, y));
            }
        }
    }
    CHECK(dark_max < bright_min);
}

TEST_CASE("CLAHE widens a low-contrast ramp") {
    EdgeConfig cfg;
    GrayImage img(64, 64);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            img.set(x, y, static_cast<uint8_t>(100 + (x * 21) / 64));  // values 100..120
        }
    }
    GrayImage out = equalize_adaptive(img, cfg);
    uint8_t in_lo = 255, in_hi = 0, out_lo = 255, out_hi = 0;
    for (size_t i = 0; i < img.size(); ++i) {
        in_lo = std::min(in_lo, img.data()[i]);
        in_hi = std::max(in_hi, img.data()[i]);
        out_lo = std::min(out_lo, out.data()[i]);
        out_hi = std::max(out_hi, out.data()[i]);
    }
    CHECK(out_hi - out_lo > in_hi - in_lo);
}

TEST_CASE("CLAHE falls back to a single tile for tiny images") {
    EdgeConfig cfg;
    GrayImage img(5, 5, 10);
    img.set(2, 2, 200);
    GrayImage out = equalize_adaptive(img, cfg);  // must not crash; stays 5x5
    CHECK(out.width() == 5);
    CHECK(out.height() == 5);
}

TEST_CASE("Gaussian smoothing keeps constants exactly") {
    GrayImage img(20, 10, 137);
    GrayImage out = gaussian_smooth(img, 1.4);
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 137);
}

TEST_CASE("Gaussian impulse response matches the dense oracle") {
    GrayImage img(15, 15, 0);
    img.set(7, 7, 255);
    GrayImage got = gaussian_smooth(img, 1.4);
    GrayImage want = oracles::dense_gaussian(img, 1.4);
    for (int y = 0; y < 15; ++y) {
        for (int x = 0; x < 15; ++x) {
            CHECK(std::abs(static_cast<int>(got.at(x, y)) - static_cast<int>(want.at(x, y))) <=
                  1);
        }
    }
}

TEST_CASE("Gaussian impulse keeps total mass within quantization slack") {
    GrayImage img(15, 15, 0);
    img.set(7, 7, 255);
    GrayImage out = gaussian_smooth(img, 1.4);
    long long sum = std::accumulate(out.data(), out.data() + out.size(), 0LL);
    // The normalized kernel preserves mass exactly in real arithmetic; the
    // 8-bit rounding of ~120 output pixels costs a couple of counts.
    CHECK(std::abs(sum - 255) <= std::llround(0.01 * 255));
}

TEST_CASE("Gaussian rejects non-positive sigma") {
    GrayImage img(4, 4);
    CHECK_THROWS_AS(gaussian_smooth(img, 0.0), InvalidSigmaError);
    CHECK_THROWS_AS(gaussian_smooth(img, -1.0), InvalidSigmaError);
}

TEST_CASE("Sobel of a constant image is zero") {
    GrayImage img(8, 8, 50);
    GradientField g = sobel_gradients(img);
    for (size_t i = 0; i < g.gx.size(); ++i) {
        CHECK(g.gx[i] == 0);
        CHECK(g.gy[i] == 0);
        CHECK(g.magnitude[i] == 0.0f);
    }
}

TEST_CASE("Sobel response at a vertical step") {
    GrayImage img(8, 8, 0);
    for (int y = 0; y < 8; ++y) {
        for (int x = 4; x < 8; ++x) img.set(x, y, 200);
    }
    GradientField g = sobel_gradients(img);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const int expected = (x == 3 || x == 4) ? 800 : 0;
            CHECK(g.gx[static_cast<size_t>(y) * 8 + x] == expected);
            CHECK(g.gy[static_cast<size_t>(y) * 8 + x] == 0);
        }
    }
}

TEST_CASE("Sobel transposes consistently") {
    GrayImage img = oracles::random_gray(9, 6, 31);
    GrayImage imgT(6, 9);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 9; ++x) imgT.set(y, x, img.at(x, y));
    }
    GradientField g = sobel_gradients(img);
    GradientField gT = sobel_gradients(imgT);
    for (int y = 0; y < 6; ++y) {
        for (int x = 0; x < 9; ++x) {
            CHECK(gT.gx[static_cast<size_t>(x) * 6 + y] == g.gy[static_cast<size_t>(y) * 9 + x]);
            CHECK(gT.gy[static_cast<size_t>(x) * 6 + y] == g.gx[static_cast<size_t>(y) * 9 + x]);
        }
    }
}

TEST_CASE("Sobel requires 3x3") {
    GrayImage img(2, 5);
    CHECK_THROWS_AS(sobel_gradients(img), TooSmallError);
}

TEST_CASE("NMS keeps a one-pixel ridge") {
    // Vertical ridge with raw |gx| = 400 -> 8-bit magnitude 100.
    const int w = 9, h = 7;
    std::vector<int> gx(static_cast<size_t>(w) * h, 0);
    std::vector<int> gy(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) gx[static_cast<size_t>(y) * w + 4] = 400;
    GrayImage out = non_max_suppress(field_from(w, h, gx, gy));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            CHECK(out.at(x, y) == (x == 4 ? 100 : 0));
        }
    }
}

TEST_CASE("NMS thins a 3-wide plateau to at most 2") {
    const int w = 11, h = 5;
    std::vector<int> gx(static_cast<size_t>(w) * h, 0);
    std::vector<int> gy(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 4; x <= 6; ++x) gx[static_cast<size_t>(y) * w + x] = 400;
    }
    GrayImage out = non_max_suppress(field_from(w, h, gx, gy));
    for (int y = 0; y < h; ++y) {
        int kept = 0;
        for (int x = 0; x < w; ++x) {
            if (out.at(x, y)) {
                ++kept;
                CHECK(x >= 4);
                CHECK(x <= 6);
            }
        }
        CHECK(kept <= 2);
        CHECK(kept >= 1);
    }
}

TEST_CASE("NMS of a zero field is zero") {
    const int w = 6, h = 6;
    std::vector<int> zero(static_cast<size_t>(w) * h, 0);
    GrayImage out = non_max_suppress(field_from(w, h, zero, zero));
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == 0);
}

TEST_CASE("hysteresis trivial bands") {
    EdgeConfig cfg;  // low 50 high 150
    GrayImage below(8, 8, 30);
    InfoMatrix none = hysteresis_threshold(below, cfg);
    CHECK(none.ones() == 0);

    GrayImage above(8, 8, 200);
    InfoMatrix all = hysteresis_threshold(above, cfg);
    CHECK(all.ones() == 64);
}

TEST_CASE("hysteresis connects weak chains to strong anchors") {
    EdgeConfig cfg;
    GrayImage img(16, 3, 0);
    img.set(2, 1, 200);
    for (int x = 3; x <= 8; ++x) img.set(x, 1, 80);  // weak chain
    img.set(9, 1, 200);
    img.set(13, 1, 80);  // isolated weak pixel
    InfoMatrix m = hysteresis_threshold(img, cfg);
    for (int x = 2; x <= 9; ++x) CHECK(m.at(1, x) == 1);
    CHECK(m.at(1, 13) == 0);
    CHECK(m == oracles::hysteresis_fixpoint(img, cfg.hysteresis_low, cfg.hysteresis_high));
}

TEST_CASE("hysteresis equals the fixpoint oracle on random inputs") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        GrayImage img = oracles::random_gray(24, 18, 1000 + seed);
        EdgeConfig cfg;
        cfg.hysteresis_low = 40 + static_cast<int>(seed % 60);
        cfg.hysteresis_high = cfg.hysteresis_low + 30 + static_cast<int>(seed % 90);
        InfoMatrix got = hysteresis_threshold(img, cfg);
        InfoMatrix want =
            oracles::hysteresis_fixpoint(img, cfg.hysteresis_low, cfg.hysteresis_high);
        CHECK(got == want);
    }
}

TEST_CASE("raising hysteresis thresholds never adds pixels") {
    SplitMix64 rng(555);
    for (int trial = 0; trial < 30; ++trial) {
        GrayImage img = oracles::random_gray(20, 20, 2000 + trial);
        EdgeConfig a;
        a.hysteresis_low = 20 + static_cast<int>(rng.next_below(50));
        a.hysteresis_high = a.hysteresis_low + 20 + static_cast<int>(rng.next_below(100));
        EdgeConfig b = a;
        if (trial % 2 == 0) {
            b.hysteresis_low = a.hysteresis_low + 1 + static_cast<int>(rng.next_below(20));
            b.hysteresis_low = std::min(b.hysteresis_low, b.hysteresis_high - 1);
        } else {
            b.hysteresis_high = a.hysteresis_high + 1 + static_cast<int>(rng.next_below(50));
            b.hysteresis_high = std::min(b.hysteresis_high, 255);
        }
        InfoMatrix loose = hysteresis_threshold(img, a);
        InfoMatrix tight = hysteresis_threshold(img, b);
        for (size_t i = 0; i < loose.bits().size(); ++i) {
            if (tight.bits()[i]) CHECK(loose.bits()[i] == 1);
        }
    }
}

TEST_CASE("hysteresis rejects bad thresholds") {
    EdgeConfig cfg;
    cfg.hysteresis_low = 150;
    cfg.hysteresis_high = 150;
    GrayImage img(4, 4);
    CHECK_THROWS_AS(hysteresis_threshold(img, cfg), BadThresholdsError);
}

TEST_CASE("dilation basics") {
    InfoMatrix empty(10, 10);
    CHECK(dilate(empty, 1).ones() == 0);

    InfoMatrix one(11, 11);
    one.set(5, 5, 1);
    InfoMatrix d = dilate(one, 1);
    CHECK(d.ones() == 9);
    for (int r = 4; r <= 6; ++r) {
        for (int c = 4; c <= 6; ++c) CHECK(d.at(r, c) == 1);
    }

    InfoMatrix m = oracles::random_matrix(32, 32, 99, 0.1);
    CHECK(dilate(m, 0) == m);
    CHECK(dilate(m, 2) == dilate(dilate(m, 1), 1));
}

TEST_CASE("dilation is extensive and monotone in radius") {
    InfoMatrix m = oracles::random_matrix(20, 26, 123, 0.15);
    InfoMatrix d1 = dilate(m, 1);
    InfoMatrix d3 = dilate(m, 3);
    for (size_t i = 0; i < m.bits().size(); ++i) {
        if (m.bits()[i]) CHECK(d1.bits()[i] == 1);
        if (d1.bits()[i]) CHECK(d3.bits()[i] == 1);
    }
}

TEST_CASE("solid screenshots produce an empty matrix") {
    EdgeConfig cfg;
    PixelImage img(320, 200, 240, 240, 240);
    InfoMatrix m = detect_information(img, cfg);
    CHECK(m.rows() == 200);
    CHECK(m.cols() == 320);
    CHECK(m.ones() == 0);
}

TEST_CASE("a bordered button is detected near its border") {
    EdgeConfig cfg;
    PixelImage img(200, 150, 255, 255, 255);
    // Black 2px border of a button at (50,40) size 100x60.
    InfoMatrix border(150, 200);
    for (int t = 0; t < 2; ++t) {
        for (int x = 50; x < 150; ++x) {
            img.set_pixel(x, 40 + t, 0, 0, 0);
            img.set_pixel(x, 99 - t, 0, 0, 0);
            border.set(40 + t, x, 1);
            border.set(99 - t, x, 1);
        }
        for (int y = 40; y < 100; ++y) {
            img.set_pixel(50 + t, y, 0, 0, 0);
            img.set_pixel(149 - t, y, 0, 0, 0);
            border.set(y, 50 + t, 1);
            border.set(y, 149 - t, 1);
        }
    }
    InfoMatrix m = detect_information(img, cfg);
    REQUIRE(m.ones() > 0);

    InfoMatrix near = dilate(border, cfg.dilation_radius + 1);
    long long close = 0;
    for (size_t i = 0; i < m.bits().size(); ++i) {
        if (m.bits()[i] && near.bits()[i]) ++close;
    }
    CHECK(static_cast<double>(close) / static_cast<double>(m.ones()) >= 0.9);
}

TEST_CASE("detect_information is deterministic") {
    EdgeConfig cfg;
    PixelImage img(120, 90, 250, 250, 250);
    for (int x = 20; x < 100; ++x) {
        img.set_pixel(x, 30, 10, 10, 10);
        img.set_pixel(x, 60, 10, 10, 10);
    }
    InfoMatrix a = detect_information(img, cfg);
    InfoMatrix b = detect_information(img, cfg);
    CHECK(a == b);
}

TEST_CASE("PBM round trip") {
    InfoMatrix m = oracles::random_matrix(13, 21, 4242, 0.3);
    const std::string path = "/tmp/uicrop_test_roundtrip.pbm";
    write_pbm(m, path);
    InfoMatrix back = read_pbm(path);
    CHECK(back == m);
    std::remove(path.c_str());
}
