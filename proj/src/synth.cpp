#include "uicrop/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "uicrop/rng.hpp"

namespace uicrop {

const char* profile_name(DensityProfile p) {
    switch (p) {
        case DensityProfile::sparse: return "sparse";
        case DensityProfile::clustered: return "clustered";
        case DensityProfile::dense: return "dense";
    }
    return "clustered";
}

DensityProfile profile_from_name(const std::string& name) {
    if (name == "sparse") return DensityProfile::sparse;
    if (name == "clustered") return DensityProfile::clustered;
    if (name == "dense") return DensityProfile::dense;
    throw ConfigError("unknown density profile '" + name + "'");
}

const char* kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::button: return "button";
        case ElementKind::input_field: return "input";
        case ElementKind::icon: return "icon";
        case ElementKind::text_label: return "text";
        case ElementKind::menu: return "menu";
    }
    return "button";
}

namespace {

ElementKind kind_from_name(const std::string& name) {
    if (name == "button") return ElementKind::button;
    if (name == "input") return ElementKind::input_field;
    if (name == "icon") return ElementKind::icon;
    if (name == "text") return ElementKind::text_label;
    if (name == "menu") return ElementKind::menu;
    throw DecodeError("unknown element kind '" + name + "'");
}

const char* kind_noun(ElementKind k) {
    switch (k) {
        case ElementKind::button: return "button";
        case ElementKind::input_field: return "input field";
        case ElementKind::icon: return "icon";
        case ElementKind::text_label: return "text label";
        case ElementKind::menu: return "menu";
    }
    return "button";
}

const char* kNames[] = {"alpha",   "bravo", "charlie", "delta",  "echo",   "foxtrot", "golf",
                        "hotel",   "india", "juliett", "kilo",   "lima",   "mike",    "november",
                        "oscar",   "papa",  "quebec",  "romeo",  "sierra", "tango",   "uniform",
                        "victor",  "whiskey", "xray",  "yankee", "zulu"};

std::string element_name(int index) {
    std::string name = kNames[index % 26];
    if (index >= 26) name += std::to_string(index / 26 + 1);
    return name;
}

struct ProfileParams {
    int min_side;
    int max_side;
    int hatch_spacing;
    bool full_hatch;  // hatch the full interior instead of the middle band
    int clusters_per_elements;  // 0 = uniform placement
};

ProfileParams params_for(DensityProfile p) {
    switch (p) {
        case DensityProfile::sparse: return {100, 180, 8, false, 0};
        case DensityProfile::clustered: return {48, 120, 4, false, 4};
        case DensityProfile::dense: return {40, 90, 2, true, 0};
    }
    return {48, 120, 4, false, 4};
}

struct Canvas {
    PixelImage* img;
    InfoMatrix* mask;

    void stroke(int x, int y, const std::array<uint8_t, 3>& c) {
        if (x < 0 || y < 0 || x >= img->width() || y >= img->height()) return;
        img->set_pixel(x, y, c[0], c[1], c[2]);
        mask->set(y, x, 1);
    }
    void hline(int x0, int x1, int y, const std::array<uint8_t, 3>& c) {
        for (int x = x0; x <= x1; ++x) stroke(x, y, c);
    }
    void vline(int x, int y0, int y1, const std::array<uint8_t, 3>& c) {
        for (int y = y0; y <= y1; ++y) stroke(x, y, c);
    }
};

void draw_border(Canvas& cv, int x, int y, int w, int h, int t,
                 const std::array<uint8_t, 3>& c) {
    for (int i = 0; i < t; ++i) {
        cv.hline(x, x + w - 1, y + i, c);
        cv.hline(x, x + w - 1, y + h - 1 - i, c);
        cv.vline(x + i, y, y + h - 1, c);
        cv.vline(x + w - 1 - i, y, y + h - 1, c);
    }
}

void draw_element(Canvas& cv, const GtElement& e, int border, const ProfileParams& pp,
                  const std::array<uint8_t, 3>& c) {
    const int x = static_cast<int>(e.box.x1);
    const int y = static_cast<int>(e.box.y1);
    const int w = static_cast<int>(e.box.x2 - e.box.x1);
    const int h = static_cast<int>(e.box.y2 - e.box.y1);
    draw_border(cv, x, y, w, h, border, c);

    const int ix0 = x + border + 2;
    const int ix1 = x + w - border - 3;
    const int iy0 = y + border + 2;
    const int iy1 = y + h - border - 3;
    if (ix1 <= ix0 || iy1 <= iy0) return;

    switch (e.kind) {
        case ElementKind::button: {
            // Label strokes in the middle band (or everywhere when dense).
            const int by0 = pp.full_hatch ? iy0 : y + h / 3;
            const int by1 = pp.full_hatch ? iy1 : y + 2 * h / 3;
            const int bx0 = pp.full_hatch ? ix0 : x + w / 6;
            const int bx1 = pp.full_hatch ? ix1 : x + w - w / 6 - 1;
            for (int yy = by0; yy <= by1; yy += pp.hatch_spacing) cv.hline(bx0, bx1, yy, c);
            break;
        }
        case ElementKind::input_field: {
            cv.vline(ix0 + 1, iy0, iy1, c);  // caret
            const int by0 = pp.full_hatch ? iy0 : y + h / 3;
            const int by1 = pp.full_hatch ? iy1 : y + 2 * h / 3;
            for (int yy = by0; yy <= by1; yy += pp.hatch_spacing) {
                cv.hline(ix0 + 3, ix0 + 3 + (ix1 - ix0) / 2, yy, c);
            }
            break;
        }
        case ElementKind::icon: {
            const int n = std::min(ix1 - ix0, iy1 - iy0);
            for (int i = 0; i <= n; ++i) {
                cv.stroke(ix0 + i, iy0 + i, c);
                cv.stroke(ix0 + n - i, iy0 + i, c);
            }
            if (pp.full_hatch) {
                for (int yy = iy0; yy <= iy1; yy += pp.hatch_spacing) cv.hline(ix0, ix1, yy, c);
            }
            break;
        }
        case ElementKind::text_label: {
            for (int yy = iy0; yy <= iy1; yy += pp.hatch_spacing) {
                cv.hline(ix0, pp.full_hatch ? ix1 : ix0 + 3 * (ix1 - ix0) / 4, yy, c);
            }
            break;
        }
        case ElementKind::menu: {
            const int bars = 3;
            for (int b = 0; b < bars; ++b) {
                const int yy = iy0 + (iy1 - iy0) * b / std::max(bars - 1, 1);
                cv.hline(ix0, ix1, yy, c);
                if (pp.full_hatch && yy + 1 <= iy1) cv.hline(ix0, ix1, yy + 1, c);
            }
            break;
        }
    }
}

bool overlaps(const BBox& a, const BBox& b, double gap) {
    return a.x1 - gap < b.x2 && b.x1 - gap < a.x2 && a.y1 - gap < b.y2 && b.y1 - gap < a.y2;
}

}  // namespace

std::pair<PixelImage, GroundTruth> generate_screen(const ScreenSpec& spec) {
    if (spec.width < 32 || spec.height < 32) throw Error("screen must be at least 32x32");
    if (spec.element_count < 0) throw Error("element_count must be >= 0");

    const ProfileParams pp = params_for(spec.profile);
    SplitMix64 rng(spec.seed ^ 0x5eedULL);

    PixelImage img(spec.width, spec.height, spec.palette.background[0],
                   spec.palette.background[1], spec.palette.background[2]);
    GroundTruth gt;
    gt.width = spec.width;
    gt.height = spec.height;
    gt.seed = spec.seed;
    gt.info_mask = InfoMatrix(spec.height, spec.width);

    const int margin = 8;
    const double gap = 6.0;
    const int max_side_w = std::min(pp.max_side, spec.width - 2 * margin);
    const int max_side_h = std::min(pp.max_side, spec.height - 2 * margin);
    if (spec.element_count > 0 && (max_side_w < pp.min_side || max_side_h < pp.min_side)) {
        throw PlacementFailureError("screen too small for the requested profile");
    }

    // Cluster centers for the clustered profile; elements go round-robin.
    std::vector<std::pair<int, int>> centers;
    if (pp.clusters_per_elements > 0 && spec.element_count > 0) {
        const int n_clusters =
            (spec.element_count + pp.clusters_per_elements - 1) / pp.clusters_per_elements;
        for (int i = 0; i < n_clusters; ++i) {
            centers.emplace_back(
                margin + static_cast<int>(rng.next_below(std::max(spec.width - 2 * margin, 1))),
                margin + static_cast<int>(rng.next_below(std::max(spec.height - 2 * margin, 1))));
        }
    }
    const int spread = 170;

    Canvas cv{&img, &gt.info_mask};
    for (int i = 0; i < spec.element_count; ++i) {
        const ElementKind kind = static_cast<ElementKind>(rng.next_below(5));
        bool placed = false;
        for (int attempt = 0; attempt < 120 && !placed; ++attempt) {
            const int w = rng.next_int(pp.min_side, max_side_w);
            const int h = rng.next_int(pp.min_side, max_side_h);
            int x, y;
            if (!centers.empty()) {
                const auto& c = centers[i % centers.size()];
                x = c.first + rng.next_int(-spread / 2, spread / 2) - w / 2;
                y = c.second + rng.next_int(-spread / 2, spread / 2) - h / 2;
                x = std::clamp(x, margin, spec.width - margin - w);
                y = std::clamp(y, margin, spec.height - margin - h);
            } else {
                x = rng.next_int(margin, spec.width - margin - w);
                y = rng.next_int(margin, spec.height - margin - h);
            }
            const BBox box{static_cast<double>(x), static_cast<double>(y),
                           static_cast<double>(x + w), static_cast<double>(y + h)};
            bool clash = false;
            for (const GtElement& other : gt.elements) {
                if (overlaps(box, other.box, gap)) {
                    clash = true;
                    break;
                }
            }
            if (clash) continue;

            GtElement e;
            e.id = i + 1;
            e.box = box;
            e.kind = kind;
            e.description = "the " + element_name(i) + " " + kind_noun(kind);
            gt.elements.push_back(e);
            placed = true;
        }
        if (!placed) {
            throw PlacementFailureError("could not place element " + std::to_string(i + 1) +
                                        " without overlap");
        }
    }

    for (const GtElement& e : gt.elements) {
        const int border = 1 + static_cast<int>(rng.next_below(2));
        const auto& color = spec.palette.widget[e.id % spec.palette.widget.size()];
        draw_element(cv, e, border, pp, color);
    }
    return {std::move(img), std::move(gt)};
}

nlohmann::ordered_json ground_truth_to_json(const GroundTruth& gt) {
    nlohmann::ordered_json j;
    j["width"] = gt.width;
    j["height"] = gt.height;
    j["seed"] = gt.seed;
    j["elements"] = nlohmann::ordered_json::array();
    for (const GtElement& e : gt.elements) {
        j["elements"].push_back({{"id", e.id},
                                 {"kind", kind_name(e.kind)},
                                 {"bbox", {e.box.x1, e.box.y1, e.box.x2, e.box.y2}},
                                 {"description", e.description}});
    }
    return j;
}

GroundTruth ground_truth_from_json(const nlohmann::json& j) {
    GroundTruth gt;
    try {
        gt.width = j.at("width").get<int>();
        gt.height = j.at("height").get<int>();
        gt.seed = j.value("seed", 0ULL);
        for (const auto& ej : j.at("elements")) {
            GtElement e;
            e.id = ej.at("id").get<int>();
            e.kind = kind_from_name(ej.at("kind").get<std::string>());
            const auto& b = ej.at("bbox");
            e.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                     b.at(3).get<double>()};
            e.description = ej.at("description").get<std::string>();
            gt.elements.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("malformed ground-truth JSON: ") + e.what());
    }
    return gt;
}

// ---------------------------------------------------------------------------
// Oracle agents

namespace {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    return tokens;
}

int token_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    int n = 0;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) {
            ++n;
            ++i;
            ++j;
        } else if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return n;
}

}  // namespace

void PerfectAgent::add_screen(const std::string& image_id, const GroundTruth& gt) {
    GroundTruth copy = gt;
    copy.info_mask = InfoMatrix();  // agents never look at pixels
    screens_[image_id] = std::move(copy);
}

const GroundTruth& PerfectAgent::resolve(const std::string& image_id) const {
    auto it = screens_.find(image_id);
    if (it != screens_.end()) return it->second;
    if (screens_.size() == 1) return screens_.begin()->second;
    throw AgentError("agent has no ground truth for image '" + image_id + "'");
}

std::vector<ElementDescription> PerfectAgent::enumerate(const std::string& image_id) {
    const GroundTruth& gt = resolve(image_id);
    std::vector<ElementDescription> out;
    out.reserve(gt.elements.size());
    for (const GtElement& e : gt.elements) {
        ElementDescription d;
        d.text = e.description;
        d.kind = DescKind::basic;
        d.origin.source = Provenance::Source::enumeration;
        out.push_back(std::move(d));
    }
    return out;
}

BBox PerfectAgent::ground(const std::string& image_id, const std::string& description) {
    const GroundTruth& gt = resolve(image_id);
    for (const GtElement& e : gt.elements) {
        if (e.description == description) return e.box;
    }
    const std::vector<std::string> query = tokenize(description);
    int best = 0;
    const GtElement* match = nullptr;
    for (const GtElement& e : gt.elements) {
        const int overlap = token_overlap(query, tokenize(e.description));
        if (overlap > best) {
            best = overlap;
            match = &e;
        }
    }
    if (!match) {
        throw UnknownDescriptionError("no element matches description '" + description + "'");
    }
    return match->box;
}

ElementDescription PerfectAgent::refer(const std::string& image_id, const BBox& box) {
    const GroundTruth& gt = resolve(image_id);
    if (gt.elements.empty()) throw AgentError("screen has no elements");
    if (!box.valid()) throw AgentError("refer requires a box with positive area");

    const GtElement* best = nullptr;
    double best_iou = -1.0;
    double best_dist = 0.0;
    for (const GtElement& e : gt.elements) {
        const double v = iou(e.box, box);
        const double dx = e.box.cx() - box.cx();
        const double dy = e.box.cy() - box.cy();
        const double dist = dx * dx + dy * dy;
        if (v > best_iou || (v == best_iou && dist < best_dist)) {
            best_iou = v;
            best_dist = dist;
            best = &e;
        }
    }
    ElementDescription d;
    d.text = best->description;
    d.kind = DescKind::referred;
    d.origin.source = Provenance::Source::referring;
    return d;
}

BBox NoisyAgent::ground(const std::string& image_id, const std::string& description) {
    BBox b = inner_.ground(image_id, description);
    b.x1 += rng_.uniform(-jitter_, jitter_);
    b.y1 += rng_.uniform(-jitter_, jitter_);
    b.x2 += rng_.uniform(-jitter_, jitter_);
    b.y2 += rng_.uniform(-jitter_, jitter_);

    auto frame = frames_.find(image_id);
    if (frame == frames_.end() && frames_.size() == 1) frame = frames_.begin();
    if (frame != frames_.end()) {
        b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(frame->second.first));
        b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(frame->second.first));
        b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(frame->second.second));
        b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(frame->second.second));
    }
    if (b.x2 <= b.x1) b.x2 = b.x1 + 1e-3;
    if (b.y2 <= b.y1) b.y2 = b.y1 + 1e-3;
    return b;
}

BBox DriftingAgent::ground(const std::string& image_id, const std::string& description) {
    BBox b = inner_.ground(image_id, description);
    offset_ += drift_;
    b.x1 += offset_;
    b.x2 += offset_;
    b.y1 += offset_;
    b.y2 += offset_;
    return b;
}

std::unique_ptr<AgentInterface> perfect_agent(const GroundTruth& gt) {
    return std::make_unique<PerfectAgent>(gt);
}

std::unique_ptr<AgentInterface> noisy_agent(const GroundTruth& gt, double jitter_px,
                                            uint64_t seed) {
    return std::make_unique<NoisyAgent>(gt, jitter_px, seed);
}

std::unique_ptr<AgentInterface> drifting_agent(const GroundTruth& gt, double drift_px_per_call) {
    return std::make_unique<DriftingAgent>(gt, drift_px_per_call);
}

}  // namespace uicrop
