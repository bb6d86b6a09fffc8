#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uicrop/edge.hpp"
#include "uicrop/image.hpp"
#include "uicrop/rng.hpp"
#include "uicrop/srdl.hpp"

namespace uicrop {

enum class DensityProfile { sparse, clustered, dense };

const char* profile_name(DensityProfile p);
DensityProfile profile_from_name(const std::string& name);

struct Palette {
    std::array<uint8_t, 3> background = {245, 246, 248};
    std::vector<std::array<uint8_t, 3>> widget = {
        {40, 44, 52}, {52, 101, 164}, {136, 0, 21}, {20, 120, 70}, {90, 60, 140}};
};

struct ScreenSpec {
    int width = 1280;
    int height = 800;
    uint64_t seed = 0;
    int element_count = 8;
    DensityProfile profile = DensityProfile::clustered;
    Palette palette;
};

enum class ElementKind { button, input_field, icon, text_label, menu };

const char* kind_name(ElementKind k);

struct GtElement {
    int id = 0;
    BBox box;
    ElementKind kind = ElementKind::button;
    std::string description;  // unique per screen
};

struct GroundTruth {
    int width = 0;
    int height = 0;
    uint64_t seed = 0;
    std::vector<GtElement> elements;
    InfoMatrix info_mask;  // exactly the drawn stroke pixels
};

// Renders a deterministic screenshot: bordered rectangles with hatch strokes
// for text and small glyphs for icons, placed without overlap by rejection
// sampling. Throws PlacementFailureError when placement cannot be satisfied.
std::pair<PixelImage, GroundTruth> generate_screen(const ScreenSpec& spec);

nlohmann::ordered_json ground_truth_to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const nlohmann::json& j);

// Idealized referring/grounding oracle over one or more screens' ground
// truth. ground() resolves exact description matches first, then the element
// with the largest token overlap; refer() returns the canonical description
// of the max-IoU element (nearest center as fallback).
class PerfectAgent : public AgentInterface {
public:
    PerfectAgent() = default;
    explicit PerfectAgent(const GroundTruth& gt) { add_screen("", gt); }

    void add_screen(const std::string& image_id, const GroundTruth& gt);

    std::vector<ElementDescription> enumerate(const std::string& image_id) override;
    BBox ground(const std::string& image_id, const std::string& description) override;
    ElementDescription refer(const std::string& image_id, const BBox& box) override;
    bool tolerates_concurrency() const override { return true; }

protected:
    const GroundTruth& resolve(const std::string& image_id) const;

private:
    std::map<std::string, GroundTruth> screens_;
};

// Perturbs every grounded box edge by seeded uniform noise in
// [-jitter_px, +jitter_px], clamped to the frame.
class NoisyAgent : public AgentInterface {
public:
    NoisyAgent(double jitter_px, uint64_t seed) : jitter_(jitter_px), rng_(seed) {
        if (jitter_px < 0) throw Error("jitter must be >= 0");
    }
    NoisyAgent(const GroundTruth& gt, double jitter_px, uint64_t seed)
        : NoisyAgent(jitter_px, seed) {
        add_screen("", gt);
    }

    void add_screen(const std::string& image_id, const GroundTruth& gt) {
        inner_.add_screen(image_id, gt);
        frames_[image_id] = {gt.width, gt.height};
    }

    std::vector<ElementDescription> enumerate(const std::string& image_id) override {
        return inner_.enumerate(image_id);
    }
    BBox ground(const std::string& image_id, const std::string& description) override;
    ElementDescription refer(const std::string& image_id, const BBox& box) override {
        return inner_.refer(image_id, box);
    }

private:
    PerfectAgent inner_;
    std::map<std::string, std::pair<int, int>> frames_;
    double jitter_;
    SplitMix64 rng_;
};

// Translates every grounded box by a cumulative diagonal offset that grows
// drift_px_per_call on each ground() call; never converges for positive
// drift. Stateful: single caller by contract.
class DriftingAgent : public AgentInterface {
public:
    explicit DriftingAgent(double drift_px_per_call) : drift_(drift_px_per_call) {
        if (drift_px_per_call < 0) throw Error("drift must be >= 0");
    }
    DriftingAgent(const GroundTruth& gt, double drift_px_per_call)
        : DriftingAgent(drift_px_per_call) {
        add_screen("", gt);
    }

    void add_screen(const std::string& image_id, const GroundTruth& gt) {
        inner_.add_screen(image_id, gt);
    }

    std::vector<ElementDescription> enumerate(const std::string& image_id) override {
        return inner_.enumerate(image_id);
    }
    BBox ground(const std::string& image_id, const std::string& description) override;
    ElementDescription refer(const std::string& image_id, const BBox& box) override {
        return inner_.refer(image_id, box);
    }

private:
    PerfectAgent inner_;
    double drift_;
    double offset_ = 0.0;
};

std::unique_ptr<AgentInterface> perfect_agent(const GroundTruth& gt);
std::unique_ptr<AgentInterface> noisy_agent(const GroundTruth& gt, double jitter_px,
                                            uint64_t seed);
std::unique_ptr<AgentInterface> drifting_agent(const GroundTruth& gt,
                                               double drift_px_per_call);

}  // namespace uicrop
