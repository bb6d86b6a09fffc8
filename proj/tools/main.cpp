// uicrop: information-sensitive screenshot cropping and self-annotation
// toolkit. One binary, one subcommand per pipeline stage.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "uicrop/agent_wire.hpp"
#include "uicrop/budget.hpp"
#include "uicrop/edge.hpp"
#include "uicrop/isc.hpp"
#include "uicrop/png_io.hpp"
#include "uicrop/spectral.hpp"
#include "uicrop/srdl.hpp"
#include "uicrop/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using namespace uicrop;

// ---------------------------------------------------------------------------
// Shared plumbing

void require_readable(const std::string& path) {
    if (!fs::exists(path)) throw IoError("no such file: " + path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("failed to write '" + path + "'");
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
    if (path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + path + "' for writing");
    return file;
}

void attach_config(CLI::App* sub) {
    sub->set_config("--config", "", "flat key=value config file (also via ISC_CONFIG)")
        ->envname("ISC_CONFIG");
    sub->allow_config_extras(CLI::config_extras_mode::error);
}

void add_edge_flags(CLI::App* sub, EdgeConfig& cfg) {
    sub->add_option("--clahe-clip", cfg.clahe_clip_limit, "CLAHE clip limit");
    sub->add_option("--clahe-grid", cfg.clahe_grid, "CLAHE tiles per axis");
    sub->add_option("--gaussian-sigma", cfg.gaussian_sigma, "Gaussian smoothing sigma");
    sub->add_option("--hysteresis-low", cfg.hysteresis_low, "weak edge threshold");
    sub->add_option("--hysteresis-high", cfg.hysteresis_high, "strong edge threshold");
    sub->add_option("--dilation-radius", cfg.dilation_radius, "edge dilation radius");
}

void add_isc_flags(CLI::App* sub, ISCConfig& cfg) {
    sub->add_option("--k-min", cfg.k_min, "initial window size");
    sub->add_option("--rho-min", cfg.rho_min, "base density threshold");
    sub->add_option("--alpha", cfg.alpha, "window expansion factor");
    sub->add_option("--n-max", cfg.n_max, "maximum region count");
    sub->add_option("--target-size", cfg.target_size, "uniform resize target");
    sub->add_option("--rho-floor", cfg.rho_floor, "threshold lower clamp");
    sub->add_flag("--context-thumbnail", cfg.include_context_thumbnail,
                  "append a whole-image thumbnail");
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------------------
// edges

struct EdgesArgs {
    std::string input;
    std::string pbm_path;
    std::string stats_path;
    EdgeConfig edge;
};

void run_edges(const EdgesArgs& a) {
    a.edge.validate();
    require_readable(a.input);
    const PixelImage img = read_png(a.input);
    const InfoMatrix m = detect_information(img, a.edge);

    const std::string stem = stem_of(a.input);
    const std::string pbm = a.pbm_path.empty() ? stem + "_edges.pbm" : a.pbm_path;
    const std::string stats = a.stats_path.empty() ? stem + "_edges.json" : a.stats_path;

    write_pbm(m, pbm);
    ordered_json j;
    j["ones"] = m.ones();
    j["density"] = static_cast<double>(m.ones()) /
                   (static_cast<double>(m.rows()) * m.cols());
    j["dims"] = {m.rows(), m.cols()};
    write_text(stats, j.dump() + "\n");
}

// ---------------------------------------------------------------------------
// crop

struct CropArgs {
    std::string input;
    std::string out_dir = ".";
    bool dry_run = false;
    EdgeConfig edge;
    ISCConfig isc;
};

void run_crop(const CropArgs& a) {
    a.edge.validate();
    a.isc.validate();
    require_readable(a.input);
    const PixelImage img = read_png(a.input);

    CropManifest manifest = isc_pipeline(img, a.edge, a.isc);
    manifest.source_path = a.input;

    const std::string stem = stem_of(a.input);
    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    write_text((dir / (stem + "_manifest.json")).string(), manifest_to_json(manifest).dump() + "\n");
    if (!a.dry_run) {
        for (size_t i = 0; i < manifest.regions.size(); ++i) {
            const std::string name = stem + "_r" + std::to_string(manifest.regions[i].id) + ".png";
            write_png(manifest.sub_images[i], (dir / name).string());
        }
    }
}

// ---------------------------------------------------------------------------
// entropy

struct EntropyArgs {
    std::vector<std::string> inputs;
    double h_min = kDefaultHMin;
    std::string out = "-";
    EdgeConfig edge;
};

void run_entropy(const EntropyArgs& a) {
    a.edge.validate();
    for (const std::string& in : a.inputs) require_readable(in);

    // Scoring is pure per file; batch in parallel, emit in input order.
    std::vector<std::future<std::string>> lines;
    for (const std::string& in : a.inputs) {
        lines.push_back(std::async(std::launch::async, [&a, in]() {
            const PixelImage img = read_png(in);
            const InfoMatrix m = detect_information(img, a.edge);
            const EntropyReport rep = spectral_entropy(dft2(m), a.h_min);
            ordered_json j;
            j["image_id"] = in;
            j["entropy"] = rep.entropy;
            j["is_hard"] = rep.is_hard;
            j["dims"] = {rep.rows, rep.cols};
            return j.dump() + "\n";
        }));
    }
    std::ofstream file;
    std::ostream& sink = open_sink(a.out, file);
    for (auto& f : lines) sink << f.get();
    sink.flush();
}

// ---------------------------------------------------------------------------
// srdl

struct SrdlArgs {
    std::string corpus_dir;
    std::string agent_kind;
    std::string agent_cmd;
    std::string history_path;
    std::string out = "-";
    double h_min = kDefaultHMin;
    double jitter = 2.0;
    double drift = 8.0;
    uint64_t seed = 0;
    int n_variants = 4;
    double iou_floor = 0.3;
    DualLoopConfig loop;
    EdgeConfig edge;
};

PerformanceHistory load_history(const std::string& path) {
    PerformanceHistory history;
    if (path.empty()) return history;
    require_readable(path);
    std::ifstream in(path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            PerformanceRecord rec;
            rec.image_id = j.at("image").get<std::string>();
            rec.description = j.at("description").get<std::string>();
            const auto& b = j.at("bbox");
            rec.predicted = {b.at(0).get<double>(), b.at(1).get<double>(),
                             b.at(2).get<double>(), b.at(3).get<double>()};
            if (j.contains("gt_bbox") && j["gt_bbox"].is_array()) {
                const auto& g = j["gt_bbox"];
                rec.truth = BBox{g.at(0).get<double>(), g.at(1).get<double>(),
                                 g.at(2).get<double>(), g.at(3).get<double>()};
            }
            rec.iou_value = j.value("iou", 0.0);
            rec.success = j.value("success", false);
            history.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw DecodeError("history line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return history;
}

void run_srdl(const SrdlArgs& a) {
    a.edge.validate();
    a.loop.validate();
    if (!fs::is_directory(a.corpus_dir)) throw IoError("no such directory: " + a.corpus_dir);

    std::vector<std::string> pngs;
    for (const auto& entry : fs::directory_iterator(a.corpus_dir)) {
        if (entry.path().extension() == ".png") pngs.push_back(entry.path().string());
    }
    std::sort(pngs.begin(), pngs.end());
    if (pngs.empty()) throw IoError("corpus has no .png files: " + a.corpus_dir);

    std::vector<CorpusEntry> corpus;
    for (const std::string& path : pngs) corpus.push_back({path, read_png(path)});

    // Oracle agents take ground truth from the sibling .json files.
    auto load_truths = [&](auto& agent) {
        for (const std::string& path : pngs) {
            const std::string gt_path = fs::path(path).replace_extension(".json").string();
            require_readable(gt_path);
            std::ifstream in(gt_path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw DecodeError(gt_path + ": " + e.what());
            }
            agent.add_screen(path, ground_truth_from_json(j));
        }
    };

    std::unique_ptr<AgentInterface> agent;
    if (a.agent_kind == "perfect") {
        auto p = std::make_unique<PerfectAgent>();
        load_truths(*p);
        agent = std::move(p);
    } else if (a.agent_kind == "noisy") {
        auto p = std::make_unique<NoisyAgent>(a.jitter, a.seed);
        load_truths(*p);
        agent = std::move(p);
    } else if (a.agent_kind == "drift") {
        auto p = std::make_unique<DriftingAgent>(a.drift);
        load_truths(*p);
        agent = std::move(p);
    } else if (a.agent_kind == "cmd") {
        if (a.agent_cmd.empty()) throw ConfigError("--agent cmd requires --agent-cmd");
        agent = std::make_unique<CmdAgent>(a.agent_cmd);
    } else {
        throw ConfigError("unknown agent kind '" + a.agent_kind + "'");
    }

    const PerformanceHistory history = load_history(a.history_path);
    SrdlOptions opts;
    opts.edge = a.edge;
    opts.n_variants = a.n_variants;
    opts.iou_floor = a.iou_floor;
    opts.augmenter_seed = a.seed;

    const SelfAnnotationSet result =
        run_srdl(corpus, *agent, a.h_min, a.loop, history, opts);

    std::ofstream file;
    std::ostream& sink = open_sink(a.out, file);
    for (const AnnotationSample& s : result.samples) {
        ordered_json j;
        j["image"] = s.image_id;
        j["description"] = s.description.text;
        j["bbox"] = {s.box.x1, s.box.y1, s.box.x2, s.box.y2};
        j["iters"] = s.iterations_used;
        j["iou"] = s.final_iou;
        j["source"] = s.source;
        sink << j.dump() << "\n";
    }
    sink.flush();
    std::cerr << "accepted " << result.samples.size() << " (visual "
              << result.count_source("visual") << ", functional "
              << result.count_source("functional") << ", baseline "
              << result.count_source("baseline") << "), rejected "
              << result.rejected.size() << "\n";
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    ScreenSpec spec;
    std::string profile = "clustered";
    std::string out_prefix;
};

void run_synth(SynthArgs a) {
    a.spec.profile = profile_from_name(a.profile);
    auto [img, gt] = generate_screen(a.spec);
    write_png(img, a.out_prefix + ".png");
    write_text(a.out_prefix + ".json", ground_truth_to_json(gt).dump(2) + "\n");
    write_pbm(gt.info_mask, a.out_prefix + ".pbm");
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
    std::string sizes = "854x480,1280x720,1920x1080,2560x1440";
    int repeats = 5;
    std::string out_csv = "bench.csv";
    std::string out_json = "bench.json";
    EdgeConfig edge;
    ISCConfig isc;
    TokenBudgetModel model;
};

std::vector<std::pair<int, int>> parse_sizes(const std::string& spec) {
    std::vector<std::pair<int, int>> sizes;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const size_t x = item.find('x');
        if (x == std::string::npos) throw ConfigError("sizes must look like 1920x1080");
        try {
            sizes.emplace_back(std::stoi(item.substr(0, x)), std::stoi(item.substr(x + 1)));
        } catch (const std::exception&) {
            throw ConfigError("bad size '" + item + "'");
        }
    }
    return sizes;
}

void run_bench(const BenchArgs& a) {
    a.edge.validate();
    a.isc.validate();
    a.model.validate();
    const ScalingReport report =
        scaling_probe(parse_sizes(a.sizes), a.edge, a.isc, a.model, a.repeats);
    write_text(a.out_csv, scaling_report_csv(report));
    write_text(a.out_json, scaling_report_summary(report).dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// agent (serve oracle agents over the wire protocol)

struct AgentArgs {
    std::string kind;
    std::string corpus_dir;
    double jitter = 2.0;
    double drift = 8.0;
    uint64_t seed = 0;
};

// Maps requested image paths onto the stem the ground truth was loaded
// under, so callers can pass paths from any directory.
class StemAdapter : public AgentInterface {
public:
    explicit StemAdapter(AgentInterface& inner) : inner_(inner) {}
    std::vector<ElementDescription> enumerate(const std::string& image_id) override {
        return inner_.enumerate(stem_of(image_id));
    }
    BBox ground(const std::string& image_id, const std::string& description) override {
        return inner_.ground(stem_of(image_id), description);
    }
    ElementDescription refer(const std::string& image_id, const BBox& box) override {
        return inner_.refer(stem_of(image_id), box);
    }

private:
    AgentInterface& inner_;
};

void run_agent(const AgentArgs& a) {
    if (!fs::is_directory(a.corpus_dir)) throw IoError("no such directory: " + a.corpus_dir);

    std::vector<std::string> gt_files;
    for (const auto& entry : fs::directory_iterator(a.corpus_dir)) {
        if (entry.path().extension() == ".json") gt_files.push_back(entry.path().string());
    }
    std::sort(gt_files.begin(), gt_files.end());
    if (gt_files.empty()) throw IoError("corpus has no ground-truth .json files");

    auto load_all = [&](auto& agent) {
        for (const std::string& path : gt_files) {
            std::ifstream in(path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw DecodeError(path + ": " + e.what());
            }
            agent.add_screen(stem_of(path), ground_truth_from_json(j));
        }
    };

    std::unique_ptr<AgentInterface> agent;
    if (a.kind == "perfect") {
        auto p = std::make_unique<PerfectAgent>();
        load_all(*p);
        agent = std::move(p);
    } else if (a.kind == "noisy") {
        auto p = std::make_unique<NoisyAgent>(a.jitter, a.seed);
        load_all(*p);
        agent = std::move(p);
    } else if (a.kind == "drift") {
        auto p = std::make_unique<DriftingAgent>(a.drift);
        load_all(*p);
        agent = std::move(p);
    } else {
        throw ConfigError("unknown agent kind '" + a.kind + "'");
    }

    StemAdapter adapter(*agent);
    serve_agent(adapter, std::cin, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-sensitive screenshot cropping and self-annotation toolkit"};
    app.require_subcommand(1);

    EdgesArgs edges;
    CLI::App* c_edges = app.add_subcommand("edges", "detect the information matrix of a PNG");
    c_edges->add_option("input", edges.input, "input PNG")->required();
    c_edges->add_option("--pbm", edges.pbm_path, "output PBM path");
    c_edges->add_option("--stats", edges.stats_path, "output stats JSON path");
    add_edge_flags(c_edges, edges.edge);
    attach_config(c_edges);

    CropArgs crop;
    CLI::App* c_crop = app.add_subcommand("crop", "extract information-balanced sub-images");
    c_crop->add_option("input", crop.input, "input PNG")->required();
    c_crop->add_option("--out-dir", crop.out_dir, "output directory");
    c_crop->add_flag("--dry-run", crop.dry_run, "write the manifest only");
    add_edge_flags(c_crop, crop.edge);
    add_isc_flags(c_crop, crop.isc);
    attach_config(c_crop);

    EntropyArgs entropy;
    CLI::App* c_entropy = app.add_subcommand("entropy", "score visual complexity of PNGs");
    c_entropy->add_option("inputs", entropy.inputs, "input PNGs")->required();
    c_entropy->add_option("--h-min", entropy.h_min, "hard-case threshold in nats");
    c_entropy->add_option("--out", entropy.out, "output path or - for stdout");
    add_edge_flags(c_entropy, entropy.edge);
    attach_config(c_entropy);

    SrdlArgs srdl;
    CLI::App* c_srdl = app.add_subcommand("srdl", "run the self-annotation loop over a corpus");
    c_srdl->add_option("--corpus", srdl.corpus_dir, "directory of PNGs (+ .json ground truth)")
        ->required();
    c_srdl->add_option("--agent", srdl.agent_kind, "perfect|noisy|drift|cmd")->required();
    c_srdl->add_option("--agent-cmd", srdl.agent_cmd, "command for --agent cmd");
    c_srdl->add_option("--history", srdl.history_path, "performance history JSONL");
    c_srdl->add_option("--out", srdl.out, "output path or - for stdout");
    c_srdl->add_option("--h-min", srdl.h_min, "visual hard-case threshold in nats");
    c_srdl->add_option("--tau", srdl.loop.tau, "convergence IoU threshold");
    c_srdl->add_option("--max-iters", srdl.loop.max_iters, "maximum loop iterations");
    c_srdl->add_option("--jitter", srdl.jitter, "noisy agent jitter in px");
    c_srdl->add_option("--drift", srdl.drift, "drifting agent px per call");
    c_srdl->add_option("--seed", srdl.seed, "seed for noisy agent and augmenter");
    c_srdl->add_option("--n-variants", srdl.n_variants, "augmentations per functional seed");
    c_srdl->add_option("--iou-floor", srdl.iou_floor, "functional failure IoU floor");
    add_edge_flags(c_srdl, srdl.edge);
    attach_config(c_srdl);

    SynthArgs synth;
    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic screenshot");
    c_synth->add_option("--width", synth.spec.width, "screen width");
    c_synth->add_option("--height", synth.spec.height, "screen height");
    c_synth->add_option("--seed", synth.spec.seed, "generator seed");
    c_synth->add_option("--elements", synth.spec.element_count, "element count");
    c_synth->add_option("--profile", synth.profile, "sparse|clustered|dense");
    c_synth->add_option("--out-prefix", synth.out_prefix, "output path prefix")->required();
    attach_config(c_synth);

    BenchArgs bench;
    CLI::App* c_bench = app.add_subcommand("bench", "scaling probe and token budget report");
    c_bench->add_option("--sizes", bench.sizes, "comma-separated WxH list");
    c_bench->add_option("--repeats", bench.repeats, "timed repeats per size");
    c_bench->add_option("--out-csv", bench.out_csv, "CSV output path");
    c_bench->add_option("--out-json", bench.out_json, "JSON summary path");
    c_bench->add_option("--patch-size", bench.model.patch_size, "vision patch size");
    c_bench->add_option("--attn-heads", bench.model.attn_heads, "attention heads");
    c_bench->add_option("--head-dim", bench.model.head_dim, "attention head dim");
    add_edge_flags(c_bench, bench.edge);
    add_isc_flags(c_bench, bench.isc);
    attach_config(c_bench);

    AgentArgs agent;
    CLI::App* c_agent = app.add_subcommand("agent", "serve an oracle agent over stdio");
    c_agent->add_option("--kind", agent.kind, "perfect|noisy|drift")->required();
    c_agent->add_option("--corpus", agent.corpus_dir, "directory of ground-truth .json files")
        ->required();
    c_agent->add_option("--jitter", agent.jitter, "noisy agent jitter in px");
    c_agent->add_option("--drift", agent.drift, "drifting agent px per call");
    c_agent->add_option("--seed", agent.seed, "noisy agent seed");
    attach_config(c_agent);

    try {
        app.parse(argc, argv);
        bench.model.target_size = bench.isc.target_size;
        if (c_edges->parsed()) run_edges(edges);
        if (c_crop->parsed()) run_crop(crop);
        if (c_entropy->parsed()) run_entropy(entropy);
        if (c_srdl->parsed()) run_srdl(srdl);
        if (c_synth->parsed()) run_synth(synth);
        if (c_bench->parsed()) run_bench(bench);
        if (c_agent->parsed()) run_agent(agent);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 5;
    } catch (const uicrop::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const uicrop::DecodeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const uicrop::ProtocolError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const uicrop::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
