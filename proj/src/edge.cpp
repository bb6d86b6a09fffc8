#include "uicrop/edge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <numeric>

namespace uicrop {

void EdgeConfig::validate() const {
    if (clahe_clip_limit <= 0) throw ConfigError("clahe-clip must be positive");
    if (clahe_grid < 1) throw ConfigError("clahe-grid must be at least 1");
    if (gaussian_sigma <= 0) throw ConfigError("gaussian-sigma must be positive");
    if (!(0 < hysteresis_low && hysteresis_low < hysteresis_high && hysteresis_high <= 255)) {
        throw ConfigError("hysteresis thresholds must satisfy 0 < low < high <= 255");
    }
    if (dilation_radius < 0) throw ConfigError("dilation-radius must be >= 0");
}

InfoMatrix::InfoMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw Error("InfoMatrix dimensions must be at least 1x1");
    bits_.assign(static_cast<size_t>(rows) * cols, 0);
}

long long InfoMatrix::ones() const {
    long long n = 0;
    for (uint8_t b : bits_) n += b;
    return n;
}

// ---------------------------------------------------------------------------
// CLAHE

namespace {

// Even partition of [0, extent) into n segments differing by at most 1.
std::vector<int> partition(int extent, int n) {
    std::vector<int> bounds(n + 1);
    for (int i = 0; i <= n; ++i) {
        bounds[i] = static_cast<int>(static_cast<long long>(i) * extent / n);
    }
    return bounds;
}

void build_tile_lut(const GrayImage& img, int x0, int x1, int y0, int y1, double clip_limit,
                    uint8_t* lut) {
    long long hist[256] = {0};
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) ++hist[img.at(x, y)];
    }
    const long long area = static_cast<long long>(x1 - x0) * (y1 - y0);

    const long long clip = std::max<long long>(1, std::llround(clip_limit * area / 256.0));
    long long excess = 0;
    for (long long& h : hist) {
        if (h > clip) {
            excess += h - clip;
            h = clip;
        }
    }
    const long long base = excess / 256;
    const long long rem = excess % 256;
    for (int i = 0; i < 256; ++i) hist[i] += base + (i < rem ? 1 : 0);

    long long cum = 0;
    for (int i = 0; i < 256; ++i) {
        cum += hist[i];
        lut[i] = static_cast<uint8_t>(std::clamp(std::llround(255.0 * cum / area), 0LL, 255LL));
    }
}

// Per-pixel blend coordinates along one axis: the two bracketing tiles and
// the weight of the second one.
void blend_axis(const std::vector<int>& bounds, int extent, std::vector<int>& t_lo,
                std::vector<int>& t_hi, std::vector<double>& weight) {
    const int n = static_cast<int>(bounds.size()) - 1;
    std::vector<double> centers(n);
    for (int t = 0; t < n; ++t) centers[t] = (bounds[t] + bounds[t + 1] - 1) / 2.0;

    t_lo.resize(extent);
    t_hi.resize(extent);
    weight.resize(extent);
    int t = 0;
    for (int p = 0; p < extent; ++p) {
        if (p <= centers[0]) {
            t_lo[p] = t_hi[p] = 0;
            weight[p] = 0.0;
        } else if (p >= centers[n - 1]) {
            t_lo[p] = t_hi[p] = n - 1;
            weight[p] = 0.0;
        } else {
            while (centers[t + 1] < p) ++t;
            t_lo[p] = t;
            t_hi[p] = t + 1;
            weight[p] = (p - centers[t]) / (centers[t + 1] - centers[t]);
        }
    }
}

}  // namespace

GrayImage equalize_adaptive(const GrayImage& img, const EdgeConfig& cfg) {
    const int w = img.width();
    const int h = img.height();
    // Images smaller than one tile per axis get a single global tile.
    const int nx = (w < cfg.clahe_grid || h < cfg.clahe_grid) ? 1 : cfg.clahe_grid;
    const int ny = nx;

    const std::vector<int> bx = partition(w, nx);
    const std::vector<int> by = partition(h, ny);

    std::vector<uint8_t> luts(static_cast<size_t>(nx) * ny * 256);
    for (int ty = 0; ty < ny; ++ty) {
        for (int tx = 0; tx < nx; ++tx) {
            build_tile_lut(img, bx[tx], bx[tx + 1], by[ty], by[ty + 1], cfg.clahe_clip_limit,
                           &luts[(static_cast<size_t>(ty) * nx + tx) * 256]);
        }
    }

    std::vector<int> txl, txh, tyl, tyh;
    std::vector<double> wx, wy;
    blend_axis(bx, w, txl, txh, wx);
    blend_axis(by, h, tyl, tyh, wy);

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const uint8_t* lut_row_lo = &luts[static_cast<size_t>(tyl[y]) * nx * 256];
        const uint8_t* lut_row_hi = &luts[static_cast<size_t>(tyh[y]) * nx * 256];
        const double vy = wy[y];
        for (int x = 0; x < w; ++x) {
            const uint8_t v = img.at(x, y);
            const double vx = wx[x];
            const double top = (1.0 - vx) * lut_row_lo[txl[x] * 256 + v] +
                               vx * lut_row_lo[txh[x] * 256 + v];
            const double bot = (1.0 - vx) * lut_row_hi[txl[x] * 256 + v] +
                               vx * lut_row_hi[txh[x] * 256 + v];
            const double blended = (1.0 - vy) * top + vy * bot;
            out.set(x, y, static_cast<uint8_t>(std::clamp(std::llround(blended), 0LL, 255LL)));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gaussian smoothing

GrayImage gaussian_smooth(const GrayImage& img, double sigma) {
    if (sigma <= 0) throw InvalidSigmaError("sigma must be positive");
    const int w = img.width();
    const int h = img.height();
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int ksize = 2 * radius + 1;

    std::vector<double> kernel(ksize);
    double sum = 0.0;
    for (int i = 0; i < ksize; ++i) {
        const double x = i - radius;
        kernel[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += kernel[i];
    }
    for (double& k : kernel) k /= sum;

    std::vector<double> temp(static_cast<size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        const uint8_t* row = img.data() + static_cast<size_t>(y) * w;
        double* trow = temp.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < ksize; ++k) {
                const int sx = std::clamp(x + k - radius, 0, w - 1);
                acc += kernel[k] * row[sx];
            }
            trow[x] = acc;
        }
    }

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        uint8_t* orow = out.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = 0; k < ksize; ++k) {
                const int sy = std::clamp(y + k - radius, 0, h - 1);
                acc += kernel[k] * temp[static_cast<size_t>(sy) * w + x];
            }
            orow[x] = static_cast<uint8_t>(std::clamp(std::llround(acc), 0LL, 255LL));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sobel

namespace {

void sobel_core(const GrayImage& img, std::vector<int>& gx, std::vector<int>& gy) {
    const int w = img.width();
    const int h = img.height();
    gx.assign(static_cast<size_t>(w) * h, 0);
    gy.assign(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
        const uint8_t* r0 = img.data() + static_cast<size_t>(std::max(y - 1, 0)) * w;
        const uint8_t* r1 = img.data() + static_cast<size_t>(y) * w;
        const uint8_t* r2 = img.data() + static_cast<size_t>(std::min(y + 1, h - 1)) * w;
        int* gxr = gx.data() + static_cast<size_t>(y) * w;
        int* gyr = gy.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            const int xl = std::max(x - 1, 0);
            const int xr = std::min(x + 1, w - 1);
            const int tl = r0[xl], tc = r0[x], tr = r0[xr];
            const int ml = r1[xl], mr = r1[xr];
            const int bl = r2[xl], bc = r2[x], br = r2[xr];
            gxr[x] = (tr + 2 * mr + br) - (tl + 2 * ml + bl);
            gyr[x] = (bl + 2 * bc + br) - (tl + 2 * tc + tr);
        }
    }
}

}  // namespace

GradientField sobel_gradients(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3) {
        throw TooSmallError("sobel_gradients requires at least a 3x3 image");
    }
    GradientField g;
    g.width = img.width();
    g.height = img.height();
    sobel_core(img, g.gx, g.gy);
    const size_t n = g.gx.size();
    g.magnitude.resize(n);
    g.direction.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double dx = g.gx[i];
        const double dy = g.gy[i];
        g.magnitude[i] = static_cast<float>(std::sqrt(dx * dx + dy * dy));
        g.direction[i] = static_cast<float>(std::atan2(dy, dx));
    }
    return g;
}

// ---------------------------------------------------------------------------
// Non-maximum suppression

namespace {

// Quantizes atan2(gy, gx) mod pi into 4 bins without evaluating atan2.
// Integer gradients never land exactly on the 22.5-degree boundaries, so
// the tangent comparisons decide the same bin the angle would.
inline int direction_bin(int gx, int gy) {
    static const double kTanLo = 0.41421356237309503;  // tan(22.5 deg)
    static const double kTanHi = 2.414213562373095;    // tan(67.5 deg)
    const double ax = std::abs(static_cast<double>(gx));
    const double ay = std::abs(static_cast<double>(gy));
    if (ay <= kTanLo * ax) return 0;  // ~0 deg: horizontal gradient
    if (ay >= kTanHi * ax) return 2;  // ~90 deg: vertical gradient
    const bool same_sign = (gx > 0) == (gy > 0);
    return same_sign ? 1 : 3;  // ~45 deg : ~135 deg
}

}  // namespace

GrayImage non_max_suppress(const GradientField& g) {
    const int w = g.width;
    const int h = g.height;
    // Direction-bin neighbor offsets (x, y), both sides.
    static const int kOff[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};

    std::vector<int64_t> mag2(static_cast<size_t>(w) * h);
    for (size_t i = 0; i < mag2.size(); ++i) {
        mag2[i] = static_cast<int64_t>(g.gx[i]) * g.gx[i] + static_cast<int64_t>(g.gy[i]) * g.gy[i];
    }

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const size_t i = static_cast<size_t>(y) * w + x;
            const int64_t m = mag2[i];
            if (m == 0) continue;
            const int bin = direction_bin(g.gx[i], g.gy[i]);
            const int ax = std::clamp(x + kOff[bin][0], 0, w - 1);
            const int ay = std::clamp(y + kOff[bin][1], 0, h - 1);
            const int bx = std::clamp(x - kOff[bin][0], 0, w - 1);
            const int by = std::clamp(y - kOff[bin][1], 0, h - 1);
            const int64_t a = mag2[static_cast<size_t>(ay) * w + ax];
            const int64_t b = mag2[static_cast<size_t>(by) * w + bx];
            const bool keep = (m > a && m >= b) || (m >= a && m > b);
            if (keep) {
                const long long v = std::llround(std::sqrt(static_cast<double>(m)) / 4.0);
                out.set(x, y, static_cast<uint8_t>(std::min(v, 255LL)));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hysteresis

InfoMatrix hysteresis_threshold(const GrayImage& nms, const EdgeConfig& cfg) {
    if (cfg.hysteresis_low >= cfg.hysteresis_high) {
        throw BadThresholdsError("hysteresis requires low < high");
    }
    const int w = nms.width();
    const int h = nms.height();
    const int low = cfg.hysteresis_low;
    const int high = cfg.hysteresis_high;

    InfoMatrix out(h, w);
    std::vector<uint8_t> weak(static_cast<size_t>(w) * h, 0);
    std::vector<int> stack;
    stack.reserve(1024);

    const uint8_t* v = nms.data();
    for (int i = 0; i < w * h; ++i) {
        if (v[i] >= high) {
            out.bits()[i] = 1;
            stack.push_back(i);
        } else if (v[i] >= low) {
            weak[i] = 1;
        }
    }

    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % w;
        const int y = i / w;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx;
                const int ny = y + dy;
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const int j = ny * w + nx;
                if (weak[j] && !out.bits()[j]) {
                    out.bits()[j] = 1;
                    stack.push_back(j);
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dilation

InfoMatrix dilate(const InfoMatrix& m, int radius) {
    if (radius < 0) throw Error("dilation radius must be >= 0");
    if (radius == 0) return m;
    const int h = m.rows();
    const int w = m.cols();

    // Chebyshev dilation separates into a horizontal and a vertical max run.
    InfoMatrix horiz(h, w);
    for (int y = 0; y < h; ++y) {
        const uint8_t* in = &m.bits()[static_cast<size_t>(y) * w];
        uint8_t* out = &horiz.bits()[static_cast<size_t>(y) * w];
        int count = 0;  // ones in the active window
        for (int x = -radius; x < w; ++x) {
            const int add = x + radius;
            if (add < w && in[add]) ++count;
            const int remove = x - radius - 1;
            if (remove >= 0 && in[remove]) --count;
            if (x >= 0) out[x] = count > 0 ? 1 : 0;
        }
    }

    InfoMatrix out(h, w);
    for (int x = 0; x < w; ++x) {
        int count = 0;
        for (int y = -radius; y < h; ++y) {
            const int add = y + radius;
            if (add < h && horiz.at(add, x)) ++count;
            const int remove = y - radius - 1;
            if (remove >= 0 && horiz.at(remove, x)) --count;
            if (y >= 0) out.set(y, x, count > 0 ? 1 : 0);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

InfoMatrix detect_information(const PixelImage& img, const EdgeConfig& cfg) {
    cfg.validate();
    const GrayImage gray = to_grayscale(img);
    const GrayImage eq = equalize_adaptive(gray, cfg);
    const GrayImage smooth = gaussian_smooth(eq, cfg.gaussian_sigma);

    // Same gradients and suppression decisions as
    // non_max_suppress(sobel_gradients(smooth)), skipping the per-pixel
    // magnitude/direction arrays the public field type carries.
    if (smooth.width() < 3 || smooth.height() < 3) {
        throw TooSmallError("detect_information requires at least a 3x3 image");
    }
    GradientField g;
    g.width = smooth.width();
    g.height = smooth.height();
    sobel_core(smooth, g.gx, g.gy);
    const GrayImage nms = non_max_suppress(g);

    const InfoMatrix edges = hysteresis_threshold(nms, cfg);
    return dilate(edges, cfg.dilation_radius);
}

// ---------------------------------------------------------------------------
// PBM

void write_pbm(const InfoMatrix& m, const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    std::fprintf(f, "P4\n%d %d\n", m.cols(), m.rows());
    const int row_bytes = (m.cols() + 7) / 8;
    std::vector<uint8_t> row(row_bytes);
    for (int y = 0; y < m.rows(); ++y) {
        std::fill(row.begin(), row.end(), 0);
        for (int x = 0; x < m.cols(); ++x) {
            if (m.at(y, x)) row[x / 8] |= static_cast<uint8_t>(0x80 >> (x % 8));
        }
        std::fwrite(row.data(), 1, row.size(), f);
    }
    if (std::fclose(f) != 0) throw IoError("failed to write '" + path + "'");
}

InfoMatrix read_pbm(const std::string& path) {
    FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::unique_ptr<FILE, int (*)(FILE*)> guard(f, std::fclose);

    char magic[3] = {0};
    int w = 0, h = 0;
    if (std::fscanf(f, "%2s %d %d", magic, &w, &h) != 3 || std::strcmp(magic, "P4") != 0 ||
        w < 1 || h < 1) {
        throw DecodeError("'" + path + "' is not a binary PBM");
    }
    std::fgetc(f);  // single whitespace byte after the header
    const int row_bytes = (w + 7) / 8;
    std::vector<uint8_t> row(row_bytes);
    InfoMatrix m(h, w);
    for (int y = 0; y < h; ++y) {
        if (std::fread(row.data(), 1, row.size(), f) != row.size()) {
            throw DecodeError("truncated PBM '" + path + "'");
        }
        for (int x = 0; x < w; ++x) {
            m.set(y, x, (row[x / 8] >> (7 - x % 8)) & 1);
        }
    }
    return m;
}

}  // namespace uicrop
