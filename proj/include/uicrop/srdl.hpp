#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uicrop/edge.hpp"
#include "uicrop/errors.hpp"
#include "uicrop/image.hpp"

namespace uicrop {

// Half-open box [x1, x2) x [y1, y2) in continuous pixel coordinates.
struct BBox {
    double x1 = 0.0;
    double y1 = 0.0;
    double x2 = 0.0;
    double y2 = 0.0;

    bool valid() const { return x2 > x1 && y2 > y1; }
    double area() const { return (x2 - x1) * (y2 - y1); }
    double cx() const { return (x1 + x2) / 2.0; }
    double cy() const { return (y1 + y2) / 2.0; }
};

// area(a n b) / area(a u b). Throws DegenerateBoxError when either box has
// nonpositive area.
double iou(const BBox& a, const BBox& b);

enum class DescKind { basic, referred, augmented };

struct Provenance {
    enum class Source { enumeration, referring, augmenter };
    Source source = Source::enumeration;
    int iteration = 0;      // referring iteration that produced it
    std::string seed;       // seed text for augmented descriptions
};

struct ElementDescription {
    std::string text;
    DescKind kind = DescKind::basic;
    Provenance origin;
};

// Behavior contract for referring/grounding agents. Implementations must be
// deterministic for a fixed internal state within one dual-loop run.
class AgentInterface {
public:
    virtual ~AgentInterface() = default;

    virtual std::vector<ElementDescription> enumerate(const std::string& image_id) = 0;
    virtual BBox ground(const std::string& image_id, const std::string& description) = 0;
    virtual ElementDescription refer(const std::string& image_id, const BBox& box) = 0;

    // Agents that mutate internal state on calls must stay single-caller.
    virtual bool tolerates_concurrency() const { return false; }
};

struct DualLoopConfig {
    double tau = 0.7;   // IoU convergence threshold, (0, 1]
    int max_iters = 5;  // convergence checks after the initial ground/refer

    void validate() const;
};

struct AnnotationSample {
    ElementDescription description;  // the original basic description
    BBox box;
    std::string image_id;
    int iterations_used = 0;
    double final_iou = 0.0;
    std::string final_refined_text;  // description whose grounding converged
    std::string source = "baseline"; // baseline | visual | functional
};

struct RejectedSample {
    ElementDescription description;
    std::string image_id;
    std::string reason;
    int iterations_used = 0;
};

struct SelfAnnotationSet {
    std::vector<AnnotationSample> samples;
    std::vector<RejectedSample> rejected;

    int count_source(const std::string& source) const;
};

struct PerformanceRecord {
    std::string image_id;
    std::string description;
    BBox predicted;
    std::optional<BBox> truth;
    double iou_value = 0.0;
    bool success = false;
};

struct PerformanceHistory {
    std::vector<PerformanceRecord> records;
};

// Description augmenter contract; the default is a seeded template rewriter,
// so an LLM-backed implementation can be swapped in behind the same surface.
class DescriptionAugmenter {
public:
    virtual ~DescriptionAugmenter() = default;
    virtual std::vector<std::string> augment(const std::string& seed_text, int n_variants) = 0;
};

class TemplateAugmenter : public DescriptionAugmenter {
public:
    explicit TemplateAugmenter(uint64_t seed = 0) : seed_(seed) {}
    std::vector<std::string> augment(const std::string& seed_text, int n_variants) override;

private:
    uint64_t seed_;
};

// Runs the dual loop for one description on one image: ground, refer, then
// re-ground until the position stabilizes above tau or max_iters checks are
// spent. One grounding call per check, reused for both the test and the
// update. Agent failures land in `rejected` with the failure reason.
void dual_loop_element(AgentInterface& agent, const std::string& image_id,
                       const ElementDescription& desc, const DualLoopConfig& cfg,
                       const std::string& source, SelfAnnotationSet& out);

// Enumerates the image's elements and runs each through the loop.
SelfAnnotationSet dual_loop(AgentInterface& agent, const std::string& image_id,
                            const DualLoopConfig& cfg);

struct MinedCase {
    std::string image_id;
    ElementDescription desc;
};

// Functional hard cases: descriptions whose history records failed outright
// or scored below iou_floor, each expanded into exactly n_variants augmented
// descriptions tracing back to the seed.
std::vector<MinedCase> mine_functional_cases(const PerformanceHistory& history,
                                             DescriptionAugmenter& augmenter, int n_variants,
                                             double iou_floor = 0.3);
std::vector<ElementDescription> mine_functional(const PerformanceHistory& history,
                                                DescriptionAugmenter& augmenter, int n_variants,
                                                double iou_floor = 0.3);

struct CorpusEntry {
    std::string image_id;
    PixelImage image;
};

struct SrdlOptions {
    EdgeConfig edge;                   // for the per-image information matrix
    int n_variants = 4;                // augmentations per functional seed
    double iou_floor = 0.3;            // functional-failure criterion
    uint64_t augmenter_seed = 0;
    DescriptionAugmenter* augmenter = nullptr;  // default: TemplateAugmenter
};

// Full mining + annotation run. Visual hard cases are the images whose
// information-matrix spectral entropy exceeds entropy_h_min; functional
// hard cases come from the history and are injected as extra targets on
// their source images. Elements are deduplicated by (image, normalized
// text); single-element failures never abort the run.
SelfAnnotationSet run_srdl(const std::vector<CorpusEntry>& corpus, AgentInterface& agent,
                           double entropy_h_min, const DualLoopConfig& loop_cfg,
                           const PerformanceHistory& history, const SrdlOptions& opts = {});

std::string normalize_description(const std::string& text);

}  // namespace uicrop
