#include "uicrop/srdl.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "uicrop/rng.hpp"
#include "uicrop/spectral.hpp"

namespace uicrop {

void DualLoopConfig::validate() const {
    if (!(tau > 0 && tau <= 1)) throw ConfigError("tau must be in (0, 1]");
    if (max_iters < 1) throw ConfigError("max-iters must be at least 1");
}

double iou(const BBox& a, const BBox& b) {
    if (!a.valid() || !b.valid()) {
        throw DegenerateBoxError("iou requires boxes with positive area");
    }
    const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
    const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

int SelfAnnotationSet::count_source(const std::string& source) const {
    int n = 0;
    for (const auto& s : samples) {
        if (s.source == source) ++n;
    }
    return n;
}

std::string normalize_description(const std::string& text) {
    std::string out;
    bool pending_space = false;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dual loop

void dual_loop_element(AgentInterface& agent, const std::string& image_id,
                       const ElementDescription& desc, const DualLoopConfig& cfg,
                       const std::string& source, SelfAnnotationSet& out) {
    try {
        BBox p = agent.ground(image_id, desc.text);
        ElementDescription refined = agent.refer(image_id, p);
        refined.kind = DescKind::referred;
        refined.origin.source = Provenance::Source::referring;

        // The initial ground/refer does not count toward max_iters; each
        // loop iteration grounds the refined description once and reuses
        // that box for both the convergence test and the next position.
        for (int n = 1; n <= cfg.max_iters; ++n) {
            const BBox g = agent.ground(image_id, refined.text);
            const double sim = iou(p, g);
            if (sim > cfg.tau) {
                out.samples.push_back({desc, p, image_id, n, sim, refined.text, source});
                return;
            }
            if (n == cfg.max_iters) break;
            p = g;
            refined = agent.refer(image_id, p);
            refined.kind = DescKind::referred;
            refined.origin.source = Provenance::Source::referring;
            refined.origin.iteration = n;
        }
        out.rejected.push_back({desc, image_id, "max-iterations", cfg.max_iters});
    } catch (const AgentError& e) {
        out.rejected.push_back({desc, image_id, e.what(), 0});
    }
}

SelfAnnotationSet dual_loop(AgentInterface& agent, const std::string& image_id,
                            const DualLoopConfig& cfg) {
    cfg.validate();
    SelfAnnotationSet out;
    for (const ElementDescription& desc : agent.enumerate(image_id)) {
        dual_loop_element(agent, image_id, desc, cfg, "baseline", out);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Functional mining

std::vector<std::string> TemplateAugmenter::augment(const std::string& seed_text,
                                                    int n_variants) {
    if (n_variants < 1) throw AugmenterError("n_variants must be at least 1");
    if (seed_text.empty()) throw AugmenterError("cannot augment an empty description");

    static const char* kTemplates[] = {
        "click the %",         "select the %",
        "locate the %",        "the % control",
        "activate the %",      "the % element",
        "press the %",         "find the % in the layout",
        "the clickable %",     "point at the %",
        "the % widget",        "the % on this screen",
    };
    constexpr int kCount = static_cast<int>(sizeof(kTemplates) / sizeof(kTemplates[0]));

    // Every template embeds the full seed phrase, so any distinguishing
    // token of the seed (head noun included) survives in all variants.
    std::string core = seed_text;
    if (core.rfind("the ", 0) == 0) core = core.substr(4);

    SplitMix64 rng(seed_ ^ fnv1a64(seed_text.c_str()));
    const int start = static_cast<int>(rng.next_below(kCount));

    std::vector<std::string> out;
    out.reserve(n_variants);
    for (int i = 0; i < n_variants; ++i) {
        const char* tpl = kTemplates[(start + i) % kCount];
        std::string v;
        for (const char* c = tpl; *c; ++c) {
            if (*c == '%') {
                v += core;
            } else {
                v.push_back(*c);
            }
        }
        const int wrap = i / kCount;
        for (int r = 0; r < wrap; ++r) v += " again";
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<MinedCase> mine_functional_cases(const PerformanceHistory& history,
                                             DescriptionAugmenter& augmenter, int n_variants,
                                             double iou_floor) {
    if (n_variants < 1) throw Error("n_variants must be at least 1");

    // Unique failing (image, description) seeds, first occurrence order.
    std::vector<std::pair<std::string, std::string>> seeds;
    std::set<std::pair<std::string, std::string>> seen;
    for (const PerformanceRecord& rec : history.records) {
        if (rec.success && rec.iou_value >= iou_floor) continue;
        auto key = std::make_pair(rec.image_id, normalize_description(rec.description));
        if (seen.insert(key).second) seeds.emplace_back(rec.image_id, rec.description);
    }

    std::vector<MinedCase> out;
    for (const auto& [image_id, seed_text] : seeds) {
        std::vector<std::string> variants;
        try {
            variants = augmenter.augment(seed_text, n_variants);
        } catch (const AugmenterError&) {
            continue;  // skip this seed, keep mining
        }
        for (const std::string& v : variants) {
            ElementDescription d;
            d.text = v;
            d.kind = DescKind::augmented;
            d.origin.source = Provenance::Source::augmenter;
            d.origin.seed = seed_text;
            out.push_back({image_id, std::move(d)});
        }
    }
    return out;
}

std::vector<ElementDescription> mine_functional(const PerformanceHistory& history,
                                                DescriptionAugmenter& augmenter, int n_variants,
                                                double iou_floor) {
    std::vector<ElementDescription> out;
    for (MinedCase& c : mine_functional_cases(history, augmenter, n_variants, iou_floor)) {
        out.push_back(std::move(c.desc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full run

SelfAnnotationSet run_srdl(const std::vector<CorpusEntry>& corpus, AgentInterface& agent,
                           double entropy_h_min, const DualLoopConfig& loop_cfg,
                           const PerformanceHistory& history, const SrdlOptions& opts) {
    loop_cfg.validate();

    std::vector<std::pair<std::string, EntropyReport>> reports;
    reports.reserve(corpus.size());
    for (const CorpusEntry& entry : corpus) {
        const InfoMatrix m = detect_information(entry.image, opts.edge);
        reports.emplace_back(entry.image_id, spectral_entropy(dft2(m), entropy_h_min));
    }
    const std::vector<std::string> hard_ids = select_visual_hard_cases(reports, entropy_h_min);
    const std::set<std::string> visual(hard_ids.begin(), hard_ids.end());

    TemplateAugmenter default_augmenter(opts.augmenter_seed);
    DescriptionAugmenter& augmenter = opts.augmenter ? *opts.augmenter : default_augmenter;
    std::vector<MinedCase> mined =
        mine_functional_cases(history, augmenter, opts.n_variants, opts.iou_floor);

    std::set<std::string> corpus_ids;
    std::set<std::string> functional_ids;
    for (const CorpusEntry& e : corpus) corpus_ids.insert(e.image_id);

    SelfAnnotationSet out;
    for (MinedCase& c : mined) {
        if (corpus_ids.count(c.image_id)) {
            functional_ids.insert(c.image_id);
        } else {
            out.rejected.push_back({c.desc, c.image_id, "image-not-in-corpus"});
        }
    }

    std::set<std::pair<std::string, std::string>> seen;
    for (const CorpusEntry& entry : corpus) {
        const bool is_visual = visual.count(entry.image_id) > 0;
        const bool is_functional = functional_ids.count(entry.image_id) > 0;
        if (!is_visual && !is_functional) continue;

        try {
            for (const ElementDescription& desc : agent.enumerate(entry.image_id)) {
                if (!seen.insert({entry.image_id, normalize_description(desc.text)}).second) {
                    continue;
                }
                dual_loop_element(agent, entry.image_id, desc, loop_cfg,
                                  is_visual ? "visual" : "baseline", out);
            }
        } catch (const AgentError& e) {
            out.rejected.push_back(
                {{"<enumerate>", DescKind::basic, {}}, entry.image_id, e.what(), 0});
        }

        for (const MinedCase& c : mined) {
            if (c.image_id != entry.image_id) continue;
            if (!seen.insert({entry.image_id, normalize_description(c.desc.text)}).second) {
                continue;
            }
            dual_loop_element(agent, entry.image_id, c.desc, loop_cfg, "functional", out);
        }
    }
    return out;
}

}  // namespace uicrop
