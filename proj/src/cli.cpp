#include "wildsieve/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "wildsieve/augment.hpp"
#include "wildsieve/camera.hpp"
#include "wildsieve/grabcut.hpp"
#include "wildsieve/grid_io.hpp"
#include "wildsieve/metrics.hpp"
#include "wildsieve/parallel.hpp"
#include "wildsieve/pseudomask.hpp"

namespace wildsieve::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

int default_threads() {
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Shortest decimal form that parses back to the same double.
std::string num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

std::string abs_path(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

fs::path parent_or_cwd(const fs::path& file) {
    const fs::path p = fs::absolute(file).parent_path();
    return p.empty() ? fs::current_path() : p;
}

// Records the fully expanded command line plus the structured knobs, so a
// rerun from this file reproduces the outputs.
void write_echo(const fs::path& dir, const std::vector<std::string>& argv, json knobs) {
    ensure_dir(dir);
    const json echo = {{"subcommand", argv.front()}, {"argv", argv}, {"knobs", std::move(knobs)}};
    write_text(dir / "config.echo.json", echo.dump(2) + "\n");
}

std::vector<std::string> list_stems(const fs::path& dir, const std::string& ext) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ext) {
            stems.push_back(entry.path().stem().string());
        }
    }
    std::sort(stems.begin(), stems.end());
    return stems;
}

// Pairs frames across directories by sorted filename stem.
std::vector<std::string> pair_frames(const std::vector<std::pair<fs::path, std::string>>& dirs) {
    const auto reference = list_stems(dirs.front().first, dirs.front().second);
    if (reference.empty()) {
        throw InvalidArgument("no *" + dirs.front().second + " frames in " + dirs.front().first.string());
    }
    for (std::size_t i = 1; i < dirs.size(); ++i) {
        const auto other = list_stems(dirs[i].first, dirs[i].second);
        if (other == reference) continue;
        std::vector<std::string> only_a;
        std::vector<std::string> only_b;
        std::set_difference(reference.begin(), reference.end(), other.begin(), other.end(),
                            std::back_inserter(only_a));
        std::set_difference(other.begin(), other.end(), reference.begin(), reference.end(),
                            std::back_inserter(only_b));
        std::string msg = "frame sets differ between " + dirs.front().first.string() + " and " +
                          dirs[i].first.string() + ":";
        for (const auto& s : only_a) msg += " -" + s;
        for (const auto& s : only_b) msg += " +" + s;
        throw InvalidArgument(msg);
    }
    return reference;
}

SoftMask read_soft_mask(const fs::path& path) {
    const auto gray = io::read_gray8_png(path);
    RealGrid g(gray.height(), gray.width());
    for (int y = 0; y < gray.height(); ++y) {
        for (int x = 0; x < gray.width(); ++x) g(y, x) = gray(y, x) / 255.0;
    }
    return SoftMask(std::move(g));
}

// ---------------------------------------------------------------- pseudomask

struct PseudomaskArgs {
    std::string observed, rendered, features, rendered_features, out;
    pseudomask::PseudoMaskConfig cfg;
};

void add_pseudomask(CLI::App& app, PseudomaskArgs& a) {
    auto* s = app.add_subcommand("pseudomask", "Build pseudo motion masks from rendering residuals");
    s->add_option("--observed", a.observed, "Observed frames (PNG)")->required();
    s->add_option("--rendered", a.rendered, "Static renderings (PNG)")->required();
    s->add_option("--features", a.features, "Observed patch features (WRZF)")->required();
    s->add_option("--rendered-features", a.rendered_features, "Rendered patch features (WRZF)")->required();
    s->add_option("--out", a.out, "Output directory")->required();
    auto& c = a.cfg;
    c.threads = default_threads();
    s->add_option("--k", c.k_clusters, "K-means clusters")->capture_default_str();
    s->add_option("--psnr-gate", c.psnr_gate, "Frames with PSNR <= gate are skipped")->capture_default_str();
    s->add_option("--seed", c.seed)->capture_default_str();
    s->add_option("--threads", c.threads)->capture_default_str();
    s->add_option("--dilate-kernel", c.dilate_kernel)->capture_default_str();
    s->add_option("--dilate-iterations", c.dilate_iterations)->capture_default_str();
    s->add_option("--min-component-fraction", c.min_component_fraction)->capture_default_str();
    s->add_option("--seed-erode-kernel", c.seed_erode_kernel)->capture_default_str();
    s->add_option("--seed-erode-iterations", c.seed_erode_iterations)->capture_default_str();
    s->add_option("--refine-band", c.refine_band)->capture_default_str();
    s->add_option("--refine", c.refine, "GrabCut refinement (true/false)")->capture_default_str();
    s->add_option("--gamma", c.grabcut.gamma)->capture_default_str();
    s->add_option("--grabcut-iterations", c.grabcut.iterations)->capture_default_str();
    s->add_option("--grabcut-components", c.grabcut.components)->capture_default_str();
    s->add_option("--top-fraction", c.selection.top_fraction)->capture_default_str();
    s->add_option("--percentile", c.selection.saliency_percentile)->capture_default_str();
    s->add_option("--min-frames", c.selection.min_frames)->capture_default_str();
}

int run_pseudomask(const PseudomaskArgs& a) {
    const auto& c = a.cfg;
    c.validate();
    const auto frames = pair_frames({{a.observed, ".png"},
                                     {a.rendered, ".png"},
                                     {a.features, ".wrzf"},
                                     {a.rendered_features, ".wrzf"}});
    const int n = static_cast<int>(frames.size());
    std::vector<ImageGrid> obs(frames.size()), ren(frames.size());
    std::vector<PatchFeatureMap> fo(frames.size()), fr(frames.size());
    parallel_for(n, c.threads, [&](int i) {
        const auto& f = frames[static_cast<std::size_t>(i)];
        obs[static_cast<std::size_t>(i)] = io::read_image_png(fs::path(a.observed) / (f + ".png"));
        ren[static_cast<std::size_t>(i)] = io::read_image_png(fs::path(a.rendered) / (f + ".png"));
        fo[static_cast<std::size_t>(i)] = io::read_features(fs::path(a.features) / (f + ".wrzf"));
        fr[static_cast<std::size_t>(i)] = io::read_features(fs::path(a.rendered_features) / (f + ".wrzf"));
    });
    spdlog::info("pseudomask: {} frames, k={}, gate={} dB", n, c.k_clusters, c.psnr_gate);

    const auto result = pseudomask::build_pseudo_masks(obs, ren, fo, fr, c);
    if (result.all_gated) spdlog::warn("pseudomask: every frame is below the PSNR gate");

    const fs::path out(a.out);
    ensure_dir(out);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (result.masks[i]) io::write_mask_png(out / (frames[i] + ".png"), *result.masks[i]);
    }
    json diag = result.diagnostics_json();
    for (std::size_t i = 0; i < frames.size(); ++i) diag["frames"][i]["name"] = frames[i];
    write_text(out / "diagnostics.json", diag.dump(2) + "\n");

    write_echo(out,
               {"pseudomask", "--observed", abs_path(a.observed), "--rendered", abs_path(a.rendered),
                "--features", abs_path(a.features), "--rendered-features", abs_path(a.rendered_features),
                "--out", abs_path(a.out), "--k", num(c.k_clusters), "--psnr-gate", num(c.psnr_gate),
                "--seed", num(c.seed), "--threads", num(c.threads), "--dilate-kernel", num(c.dilate_kernel),
                "--dilate-iterations", num(c.dilate_iterations), "--min-component-fraction",
                num(c.min_component_fraction), "--seed-erode-kernel", num(c.seed_erode_kernel),
                "--seed-erode-iterations", num(c.seed_erode_iterations), "--refine-band", num(c.refine_band),
                "--refine", c.refine ? "true" : "false", "--gamma", num(c.grabcut.gamma),
                "--grabcut-iterations", num(c.grabcut.iterations), "--grabcut-components",
                num(c.grabcut.components), "--top-fraction", num(c.selection.top_fraction), "--percentile",
                num(c.selection.saliency_percentile), "--min-frames", num(c.selection.min_frames)},
               c.to_json());
    return kExitOk;
}

// ------------------------------------------------------------------- metrics

struct MetricsArgs {
    std::string observed, rendered, mask, lpips, report;
    std::string region = "transient";
    int threads = default_threads();
};

void add_metrics(CLI::App& app, MetricsArgs& a) {
    auto* s = app.add_subcommand("metrics", "Masked PSNR / SSIM / LPIPS");
    s->add_option("--observed", a.observed)->required();
    s->add_option("--rendered", a.rendered)->required();
    s->add_option("--mask", a.mask, "Mask PNGs, 255 = transient")->required();
    s->add_option("--lpips", a.lpips, "Per-layer LPIPS differences (WRZL)");
    s->add_option("--report", a.report, "Output JSON report")->required();
    s->add_option("--region", a.region, "Score the transient mask or its static complement")
        ->check(CLI::IsMember({"transient", "static"}))
        ->capture_default_str();
    s->add_option("--threads", a.threads)->capture_default_str();
}

int run_metrics(const MetricsArgs& a) {
    if (a.threads < 1) throw InvalidArgument("--threads must be >= 1");
    std::vector<std::pair<fs::path, std::string>> dirs{{a.observed, ".png"}, {a.rendered, ".png"}, {a.mask, ".png"}};
    if (!a.lpips.empty()) dirs.emplace_back(a.lpips, ".wrzl");
    const auto frames = pair_frames(dirs);

    metrics::MetricsReport report;
    report.per_frame.resize(frames.size());
    parallel_for(static_cast<int>(frames.size()), a.threads, [&](int i) {
        const auto& f = frames[static_cast<std::size_t>(i)];
        const auto obs = io::read_image_png(fs::path(a.observed) / (f + ".png"));
        const auto ren = io::read_image_png(fs::path(a.rendered) / (f + ".png"));
        SoftMask m = read_soft_mask(fs::path(a.mask) / (f + ".png"));
        if (a.region == "static") m = m.complement();
        auto& fm = report.per_frame[static_cast<std::size_t>(i)];
        fm.frame = f;
        const auto p = metrics::masked_psnr(obs, ren, m);
        fm.psnr_masked = p.db;
        fm.saturated = p.saturated;
        fm.ssim_masked = metrics::masked_ssim(obs, ren, m);
        if (!a.lpips.empty()) {
            fm.lpips_masked = metrics::masked_lpips(io::read_layer_diffs(fs::path(a.lpips) / (f + ".wrzl")), m);
        }
    });
    json doc = report.to_json();
    doc["region"] = a.region;
    write_text(a.report, doc.dump(2) + "\n");

    std::vector<std::string> argv{"metrics", "--observed", abs_path(a.observed), "--rendered",
                                  abs_path(a.rendered), "--mask", abs_path(a.mask)};
    if (!a.lpips.empty()) argv.insert(argv.end(), {"--lpips", abs_path(a.lpips)});
    argv.insert(argv.end(), {"--report", abs_path(a.report), "--region", a.region, "--threads", num(a.threads)});
    write_echo(parent_or_cwd(a.report), argv,
               {{"region", a.region}, {"threads", a.threads}, {"ssim", {{"window_size", 11}, {"sigma", 1.5}}}});
    return kExitOk;
}

// ------------------------------------------------------------------ evalmask

struct EvalmaskArgs {
    std::string pred, gt, report;
};

void add_evalmask(CLI::App& app, EvalmaskArgs& a) {
    auto* s = app.add_subcommand("evalmask", "Motion-mask mIoU and recall");
    s->add_option("--pred", a.pred, "Predicted masks (PNG)")->required();
    s->add_option("--gt", a.gt, "Ground-truth masks (PNG)")->required();
    s->add_option("--report", a.report)->required();
}

int run_evalmask(const EvalmaskArgs& a) {
    const auto frames = pair_frames({{a.gt, ".png"}, {a.pred, ".png"}});
    json per_frame = json::array();
    double iou_sum = 0.0;
    double recall_sum = 0.0;
    for (const auto& f : frames) {
        const auto pred = io::read_mask_png(fs::path(a.pred) / (f + ".png"));
        const auto gt = io::read_mask_png(fs::path(a.gt) / (f + ".png"));
        const auto r = metrics::mask_iou_recall(pred, gt);
        per_frame.push_back({{"frame", f}, {"iou", r.iou}, {"recall", r.recall}});
        iou_sum += r.iou;
        recall_sum += r.recall;
    }
    const double n = static_cast<double>(frames.size());
    const json doc = {{"per_frame", per_frame}, {"summary", {{"miou", iou_sum / n}, {"recall", recall_sum / n}}}};
    write_text(a.report, doc.dump(2) + "\n");
    write_echo(parent_or_cwd(a.report),
               {"evalmask", "--pred", abs_path(a.pred), "--gt", abs_path(a.gt), "--report", abs_path(a.report)},
               json::object());
    return kExitOk;
}

// ------------------------------------------------------------------- augment

struct AugmentArgs {
    std::string scenes, objects, out;
    augment::PasteConfig cfg;
    int threads = default_threads();
};

void add_augment(CLI::App& app, AugmentArgs& a) {
    auto* s = app.add_subcommand("augment", "Copy-paste transient augmentation");
    s->add_option("--scenes", a.scenes, "One subdirectory of view PNGs per scene")->required();
    s->add_option("--objects", a.objects, "Sprite bank with manifest.json")->required();
    s->add_option("--out", a.out)->required();
    auto& c = a.cfg;
    s->add_option("--seed", c.seed)->required();
    s->add_option("--scene-probability", c.scene_probability)->capture_default_str();
    s->add_option("--per-view-probability", c.per_view_probability)->capture_default_str();
    s->add_option("--min-objects", c.min_objects)->capture_default_str();
    s->add_option("--max-objects", c.max_objects)->capture_default_str();
    s->add_option("--min-scale", c.min_scale)->capture_default_str();
    s->add_option("--max-scale", c.max_scale)->capture_default_str();
    s->add_option("--margin", c.margin_fraction)->capture_default_str();
    s->add_option("--blur-sigma", c.blur_sigma)->capture_default_str();
    s->add_option("--threads", a.threads)->capture_default_str();
}

std::vector<augment::PasteObject> read_bank(const fs::path& dir) {
    const auto bytes = io::read_bytes(dir / "manifest.json");
    const json manifest = json::parse(bytes.begin(), bytes.end());
    std::vector<augment::PasteObject> bank;
    for (const auto& o : manifest.at("objects")) {
        const auto rgba = io::read_rgba_png(dir / o.at("file").get<std::string>());
        bank.emplace_back(rgba.rgb, rgba.alpha, o.value("category", std::string{}));
    }
    return bank;
}

json placement_json(const augment::PastePlacement& p) {
    return {{"view", p.view},
            {"object", p.object},
            {"box", {p.top, p.left, p.height, p.width}},
            {"footprint_box", {p.footprint_top, p.footprint_left, p.footprint_height, p.footprint_width}},
            {"footprint_pixels", p.footprint_pixels}};
}

int run_augment(const AugmentArgs& a) {
    a.cfg.validate();
    if (a.threads < 1) throw InvalidArgument("--threads must be >= 1");
    const auto bank = read_bank(a.objects);
    if (!fs::is_directory(a.scenes)) throw IoError("not a directory: " + a.scenes);
    std::vector<std::string> scenes;
    for (const auto& e : fs::directory_iterator(a.scenes)) {
        if (e.is_directory()) scenes.push_back(e.path().filename().string());
    }
    std::sort(scenes.begin(), scenes.end());
    if (scenes.empty()) throw InvalidArgument("no scene directories in " + a.scenes);

    std::vector<json> reports(scenes.size());
    parallel_for(static_cast<int>(scenes.size()), a.threads, [&](int si) {
        const auto idx = static_cast<std::size_t>(si);
        const fs::path in = fs::path(a.scenes) / scenes[idx];
        const auto views = list_stems(in, ".png");
        if (views.empty()) throw InvalidArgument("scene has no views: " + in.string());
        std::vector<ImageGrid> images;
        for (const auto& v : views) images.push_back(io::read_image_png(in / (v + ".png")));
        const auto res = augment::copy_paste(images, bank, a.cfg, static_cast<std::uint64_t>(si));
        const fs::path out = fs::path(a.out) / scenes[idx];
        ensure_dir(out / "images");
        ensure_dir(out / "masks");
        for (std::size_t v = 0; v < views.size(); ++v) {
            io::write_image_png(out / "images" / (views[v] + ".png"), res.views[v]);
            io::write_mask_png(out / "masks" / (views[v] + ".png"), res.masks[v]);
        }
        json placements = json::array();
        for (const auto& p : res.placements) placements.push_back(placement_json(p));
        for (const auto& d : res.diagnostics) spdlog::warn("augment {}: {}", scenes[idx], d);
        reports[idx] = {{"scene", scenes[idx]},
                        {"augmented", res.augmented},
                        {"per_view", res.per_view},
                        {"placements", placements},
                        {"diagnostics", res.diagnostics}};
    });
    ensure_dir(a.out);
    write_text(fs::path(a.out) / "augment_report.json", json{{"scenes", reports}}.dump(2) + "\n");
    const auto& c = a.cfg;
    write_echo(a.out,
               {"augment", "--scenes", abs_path(a.scenes), "--objects", abs_path(a.objects), "--out",
                abs_path(a.out), "--seed", num(c.seed), "--scene-probability", num(c.scene_probability),
                "--per-view-probability", num(c.per_view_probability), "--min-objects", num(c.min_objects),
                "--max-objects", num(c.max_objects), "--min-scale", num(c.min_scale), "--max-scale",
                num(c.max_scale), "--margin", num(c.margin_fraction), "--blur-sigma", num(c.blur_sigma),
                "--threads", num(a.threads)},
               c.to_json());
    return kExitOk;
}

// -------------------------------------------------------------------- raymap

struct RaymapArgs {
    std::string camera, out;
    int height = 0;
    int width = 0;
};

void add_raymap(CLI::App& app, RaymapArgs& a) {
    auto* s = app.add_subcommand("raymap", "Pixel-aligned Plücker ray maps (WRZF, d=6)");
    s->add_option("--camera", a.camera, "Camera JSON")->required();
    s->add_option("--height", a.height)->required();
    s->add_option("--width", a.width)->required();
    s->add_option("--out", a.out)->required();
}

int run_raymap(const RaymapArgs& a) {
    const auto bytes = io::read_bytes(a.camera);
    const auto rig = camera::parse_camera_json(std::string(bytes.begin(), bytes.end()));
    ensure_dir(a.out);
    for (std::size_t i = 0; i < rig.frames.size(); ++i) {
        const auto map = camera::plucker_ray_map(rig.intrinsics, rig.frames[i], a.height, a.width);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.wrzf", i);
        io::write_features(fs::path(a.out) / name, map.to_feature_map());
    }
    write_echo(a.out,
               {"raymap", "--camera", abs_path(a.camera), "--height", num(a.height), "--width", num(a.width),
                "--out", abs_path(a.out)},
               {{"height", a.height}, {"width", a.width}, {"frames", rig.frames.size()}});
    return kExitOk;
}

// ----------------------------------------------------------------- tokenmask

struct TokenmaskArgs {
    int height = 0;
    int width = 0;
    double ratio = 0.1;
    std::uint64_t seed = 0;
    std::string out;
    std::string motion;
    int patch = 16;
    double tau = 0.5;
};

void add_tokenmask(CLI::App& app, TokenmaskArgs& a) {
    auto* s = app.add_subcommand("tokenmask", "Clustered or motion-driven token masks (PNG, 255 = masked)");
    s->add_option("--height", a.height, "Token grid height");
    s->add_option("--width", a.width, "Token grid width");
    s->add_option("--ratio", a.ratio)->capture_default_str();
    s->add_option("--seed", a.seed)->capture_default_str();
    s->add_option("--out", a.out)->required();
    s->add_option("--motion", a.motion, "Motion probability PNG; switches to motion-driven masking");
    s->add_option("--patch", a.patch)->capture_default_str();
    s->add_option("--tau", a.tau)->capture_default_str();
}

int run_tokenmask(const TokenmaskArgs& a) {
    std::vector<std::string> argv{"tokenmask"};
    json knobs;
    BinaryMask mask;
    if (!a.motion.empty()) {
        mask = augment::dynamic_token_mask(read_soft_mask(a.motion), a.patch, a.tau);
        argv.insert(argv.end(), {"--motion", abs_path(a.motion), "--patch", num(a.patch), "--tau", num(a.tau)});
        knobs = {{"patch", a.patch}, {"tau", a.tau}};
    } else {
        if (a.height < 1 || a.width < 1) throw InvalidArgument("--height and --width must be >= 1");
        mask = augment::clustered_token_mask(a.height, a.width, a.ratio, a.seed);
        argv.insert(argv.end(), {"--height", num(a.height), "--width", num(a.width), "--ratio", num(a.ratio),
                                 "--seed", num(a.seed)});
        knobs = {{"height", a.height}, {"width", a.width}, {"ratio", a.ratio}, {"seed", a.seed}};
    }
    io::write_mask_png(a.out, mask);
    argv.insert(argv.end(), {"--out", abs_path(a.out)});
    knobs["masked"] = mask.count();
    write_echo(parent_or_cwd(a.out), argv, knobs);
    return kExitOk;
}

// ------------------------------------------------------------- grabcut-debug

struct GrabcutArgs {
    std::string image, trimap, out;
    grabcut::GrabcutParams params;
    std::uint64_t seed = 0;
};

void add_grabcut(CLI::App& app, GrabcutArgs& a) {
    auto* s = app.add_subcommand("grabcut-debug", "Run GrabCut on one image and trimap");
    s->add_option("--image", a.image, "RGB PNG")->required();
    s->add_option("--trimap", a.trimap, "Gray PNG: 0 bg, 64 probable bg, 128 probable fg, 255 fg")->required();
    s->add_option("--out", a.out, "Output mask PNG")->required();
    s->add_option("--gamma", a.params.gamma)->capture_default_str();
    s->add_option("--iterations", a.params.iterations)->capture_default_str();
    s->add_option("--components", a.params.components)->capture_default_str();
    s->add_option("--connectivity", a.params.connectivity)->capture_default_str();
    s->add_option("--seed", a.seed)->capture_default_str();
}

int run_grabcut(const GrabcutArgs& a) {
    const auto image = io::read_image_png(a.image);
    const auto gray = io::read_gray8_png(a.trimap);
    grabcut::Trimap trimap(gray.height(), gray.width());
    for (int y = 0; y < gray.height(); ++y) {
        for (int x = 0; x < gray.width(); ++x) trimap(y, x) = grabcut::trimap_label_from_gray(gray(y, x));
    }
    const auto res = grabcut::grabcut(image, trimap, a.params, a.seed);
    io::write_mask_png(a.out, res.mask);
    fs::path energy_path(a.out);
    energy_path.replace_extension(".energy.json");
    write_text(energy_path, json{{"energy", res.energy}, {"foreground_pixels", res.mask.count()}}.dump(2) + "\n");
    const auto& p = a.params;
    write_echo(parent_or_cwd(a.out),
               {"grabcut-debug", "--image", abs_path(a.image), "--trimap", abs_path(a.trimap), "--out",
                abs_path(a.out), "--gamma", num(p.gamma), "--iterations", num(p.iterations), "--components",
                num(p.components), "--connectivity", num(p.connectivity), "--seed", num(a.seed)},
               {{"gamma", p.gamma}, {"iterations", p.iterations}, {"components", p.components},
                {"connectivity", p.connectivity}, {"seed", a.seed}});
    return kExitOk;
}

// --------------------------------------------------------------------- rerun

struct RerunArgs {
    std::string echo;
    std::string out;
};

void add_rerun(CLI::App& app, RerunArgs& a) {
    auto* s = app.add_subcommand("rerun", "Repeat a run from its config.echo.json");
    s->add_option("--echo", a.echo, "config.echo.json")->required();
    s->add_option("--out", a.out, "Replace the output directory or file");
}

std::vector<std::string> rerun_argv(const RerunArgs& a) {
    const auto bytes = io::read_bytes(a.echo);
    const json echo = json::parse(bytes.begin(), bytes.end());
    auto argv = echo.at("argv").get<std::vector<std::string>>();
    if (argv.empty() || argv.front() == "rerun") throw InvalidArgument("echo file has no runnable command");
    if (!a.out.empty()) {
        const std::string flag = (argv.front() == "metrics" || argv.front() == "evalmask") ? "--report" : "--out";
        const auto it = std::find(argv.begin(), argv.end(), flag);
        if (it == argv.end() || it + 1 == argv.end()) throw InvalidArgument("echo has no " + flag);
        *(it + 1) = abs_path(a.out);
    }
    return argv;
}

int dispatch(const std::vector<std::string>& args, int depth);

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

int dispatch(const std::vector<std::string>& args, int depth) {
    CLI::App app{"wildsieve: transient-aware masks, metrics and augmentation", "wildsieve"};
    app.require_subcommand(1);
    PseudomaskArgs pm;
    MetricsArgs mt;
    EvalmaskArgs ev;
    AugmentArgs au;
    RaymapArgs rm;
    TokenmaskArgs tk;
    GrabcutArgs gc;
    RerunArgs rr;
    add_pseudomask(app, pm);
    add_metrics(app, mt);
    add_evalmask(app, ev);
    add_augment(app, au);
    add_raymap(app, rm);
    add_tokenmask(app, tk);
    add_grabcut(app, gc);
    add_rerun(app, rr);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    return guarded([&]() -> int {
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        if (name == "pseudomask") return run_pseudomask(pm);
        if (name == "metrics") return run_metrics(mt);
        if (name == "evalmask") return run_evalmask(ev);
        if (name == "augment") return run_augment(au);
        if (name == "raymap") return run_raymap(rm);
        if (name == "tokenmask") return run_tokenmask(tk);
        if (name == "grabcut-debug") return run_grabcut(gc);
        if (depth > 0) throw InvalidArgument("nested rerun");
        return dispatch(rerun_argv(rr), depth + 1);
    });
}

}  // namespace

void configure_logging() {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_logger_mt("wildsieve");
        spdlog::set_default_logger(logger);
        spdlog::level::level_enum level = spdlog::level::warn;
        if (const char* env = std::getenv("WILDSIEVE_LOG")) {
            const std::string v(env);
            if (v == "error") level = spdlog::level::err;
            else if (v == "warn") level = spdlog::level::warn;
            else if (v == "info") level = spdlog::level::info;
            else if (v == "debug") level = spdlog::level::debug;
        }
        spdlog::set_level(level);
    });
}

int run(const std::vector<std::string>& args) {
    configure_logging();
    return dispatch(args, 0);
}

}  // namespace wildsieve::cli
