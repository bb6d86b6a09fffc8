#include "uicrop/isc.hpp"

#include <algorithm>
#include <cmath>

namespace uicrop {

void ISCConfig::validate() const {
    if (k_min < 8) throw ConfigError("k-min must be at least 8");
    if (!(rho_min > 0 && rho_min <= 1)) throw ConfigError("rho-min must be in (0, 1]");
    if (!(alpha > 1)) throw ConfigError("alpha must be greater than 1");
    if (n_max < 1) throw ConfigError("n-max must be at least 1");
    if (target_size < 32) throw ConfigError("target-size must be at least 32");
    if (rho_floor < 0) throw ConfigError("rho-floor must be >= 0");
}

double window_density(const InfoMatrix& m, int x, int y, int k) {
    if (k < 1 || x < 0 || y < 0 || x + k > m.cols() || y + k > m.rows()) {
        throw OutOfBoundsError("density window exceeds matrix extent");
    }
    long long count = 0;
    for (int yy = y; yy < y + k; ++yy) {
        const uint8_t* row = &m.bits()[static_cast<size_t>(yy) * m.cols()];
        for (int xx = x; xx < x + k; ++xx) count += row[xx];
    }
    return static_cast<double>(count) / (static_cast<double>(k) * k);
}

double scale_threshold(const ISCConfig& cfg, int k) {
    const double ratio = static_cast<double>(k) / cfg.k_min;
    return std::max(cfg.rho_min / (ratio * ratio), cfg.rho_floor);
}

std::vector<Region> adaptive_extract(const InfoMatrix& m, const ISCConfig& cfg) {
    const int h = m.rows();
    const int w = m.cols();
    std::vector<uint8_t> bits = m.bits();  // private working copy
    std::vector<Region> regions;

    const int maxdim = std::max(h, w);
    long long k = cfg.k_min;
    std::vector<int> colsum(w);  // ones per column inside the current row band

    bool full = false;
    while (k <= maxdim && !full) {
        const int ki = static_cast<int>(k);
        const int step = std::max(ki / 4, 32);
        const double rho_k = scale_threshold(cfg, ki);

        int prev_y = -1;
        for (int y = 0; y + ki <= h && !full; y += step) {
            if (prev_y < 0) {
                std::fill(colsum.begin(), colsum.end(), 0);
                for (int yy = y; yy < y + ki; ++yy) {
                    const uint8_t* row = &bits[static_cast<size_t>(yy) * w];
                    for (int x = 0; x < w; ++x) colsum[x] += row[x];
                }
            } else {
                for (int yy = prev_y; yy < y; ++yy) {
                    const uint8_t* row = &bits[static_cast<size_t>(yy) * w];
                    for (int x = 0; x < w; ++x) colsum[x] -= row[x];
                }
                for (int yy = prev_y + ki; yy < y + ki; ++yy) {
                    const uint8_t* row = &bits[static_cast<size_t>(yy) * w];
                    for (int x = 0; x < w; ++x) colsum[x] += row[x];
                }
            }
            prev_y = y;

            for (int x = 0; x + ki <= w; x += step) {
                long long count = 0;
                for (int c = x; c < x + ki; ++c) count += colsum[c];
                const double density =
                    static_cast<double>(count) / (static_cast<double>(ki) * ki);
                if (density >= rho_k) {
                    regions.push_back(
                        {x, y, ki, static_cast<int>(regions.size()) + 1, density});
                    // Zero the window so its ones cannot feed another region.
                    for (int yy = y; yy < y + ki; ++yy) {
                        uint8_t* row = &bits[static_cast<size_t>(yy) * w];
                        for (int xx = x; xx < x + ki; ++xx) {
                            if (row[xx]) {
                                row[xx] = 0;
                                --colsum[xx];
                            }
                        }
                    }
                    if (static_cast<int>(regions.size()) >= cfg.n_max) {
                        full = true;
                        break;
                    }
                }
            }
        }
        k = static_cast<long long>(std::ceil(cfg.alpha * static_cast<double>(k)));
    }

    std::stable_sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
        if (a.density != b.density) return a.density > b.density;
        return a.id < b.id;
    });
    return regions;
}

CropManifest finalize_crops(const PixelImage& img, const InfoMatrix& m,
                            const std::vector<Region>& regions, const ISCConfig& cfg) {
    CropManifest out;
    out.source_width = img.width();
    out.source_height = img.height();
    out.config = cfg;
    out.info = m;
    out.regions = regions;

    const int s = cfg.target_size;
    for (const Region& r : regions) {
        if (r.x < 0 || r.y < 0 || r.k < 1 || r.x + r.k > img.width() ||
            r.y + r.k > img.height()) {
            throw OutOfBoundsError("region does not fit the image");
        }
        out.sub_images.push_back(bilinear_resize(crop_rect(img, {r.x, r.y, r.k, r.k}), s, s));
    }

    // Coverage of the original ones by the union of the extracted windows.
    const long long total = m.ones();
    if (total == 0 || regions.empty()) {
        out.residual_coverage = 0.0;
    } else {
        std::vector<uint8_t> covered(static_cast<size_t>(m.rows()) * m.cols(), 0);
        for (const Region& r : regions) {
            for (int y = r.y; y < r.y + r.k; ++y) {
                std::fill(&covered[static_cast<size_t>(y) * m.cols() + r.x],
                          &covered[static_cast<size_t>(y) * m.cols() + r.x + r.k],
                          static_cast<uint8_t>(1));
            }
        }
        long long hit = 0;
        for (size_t i = 0; i < covered.size(); ++i) hit += covered[i] & m.bits()[i];
        out.residual_coverage = static_cast<double>(hit) / static_cast<double>(total);
    }

    if (cfg.include_context_thumbnail) {
        const long long cells = static_cast<long long>(m.rows()) * m.cols();
        out.regions.push_back({0, 0, 0, 0, static_cast<double>(total) / cells});
        out.sub_images.push_back(bilinear_resize(img, s, s));
    }
    return out;
}

CropManifest isc_pipeline(const PixelImage& img, const EdgeConfig& ecfg, const ISCConfig& icfg) {
    icfg.validate();
    const InfoMatrix m = detect_information(img, ecfg);
    const std::vector<Region> regions = adaptive_extract(m, icfg);
    return finalize_crops(img, m, regions, icfg);
}

std::vector<long long> rle_encode(const InfoMatrix& m) {
    std::vector<long long> runs;
    uint8_t current = 0;  // first run counts zeros
    long long length = 0;
    for (uint8_t b : m.bits()) {
        if (b == current) {
            ++length;
        } else {
            runs.push_back(length);
            current = b;
            length = 1;
        }
    }
    runs.push_back(length);
    return runs;
}

InfoMatrix rle_decode(int rows, int cols, const std::vector<long long>& runs) {
    InfoMatrix m(rows, cols);
    const long long cells = static_cast<long long>(rows) * cols;
    long long pos = 0;
    uint8_t value = 0;
    for (long long run : runs) {
        if (run < 0 || pos + run > cells) throw DecodeError("run-length data exceeds matrix size");
        for (long long i = 0; i < run; ++i) m.bits()[pos++] = value;
        value ^= 1;
    }
    if (pos != cells) throw DecodeError("run-length data does not fill the matrix");
    return m;
}

nlohmann::ordered_json manifest_to_json(const CropManifest& manifest) {
    nlohmann::ordered_json j;
    j["source"] = {{"path", manifest.source_path},
                   {"width", manifest.source_width},
                   {"height", manifest.source_height}};
    j["config"] = {{"k_min", manifest.config.k_min},
                   {"rho_min", manifest.config.rho_min},
                   {"alpha", manifest.config.alpha},
                   {"n_max", manifest.config.n_max},
                   {"target_size", manifest.config.target_size},
                   {"rho_floor", manifest.config.rho_floor},
                   {"include_context_thumbnail", manifest.config.include_context_thumbnail}};
    j["regions"] = nlohmann::ordered_json::array();
    for (const Region& r : manifest.regions) {
        j["regions"].push_back({{"x", r.x},
                                {"y", r.y},
                                {"k", r.k},
                                {"id", r.id},
                                {"density", r.density}});
    }
    j["residual_coverage"] = manifest.residual_coverage;
    j["info_matrix_rle"] = rle_encode(manifest.info);
    return j;
}

}  // namespace uicrop
