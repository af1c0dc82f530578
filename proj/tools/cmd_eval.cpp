// evaluate and verify: trajectory-quality scoring and manifest integrity.

#include <filesystem>
#include <iostream>
#include <memory>

#include <json.hpp>

#include "commands.hpp"
#include "common.hpp"
#include "intragen/manifest.hpp"
#include "intragen/mtem.hpp"
#include "intragen/physics.hpp"
#include "intragen/version.hpp"

namespace intragen::cli {

namespace fs = std::filesystem;

namespace {

struct EvaluateOptions {
    std::string gt;
    std::string gen;
    std::string dims;  // "WxH", default from gt
    int frames = 0;    // default from gt
    std::string json_out = "mtem.json";
};

void run_evaluate(const EvaluateOptions& opt) {
    StageTimer timer;
    const Scene gt_scene = load_scene(opt.gt);
    TrajectorySet gt = gt_scene.trajectories;

    int width = gt.width, height = gt.height, frames = gt.frame_count;
    if (!opt.dims.empty()) {
        const auto x = opt.dims.find('x');
        if (x == std::string::npos)
            throw CLI::ValidationError("--dims", "expected WxH, e.g. 64x64");
        width = std::stoi(opt.dims.substr(0, x));
        height = std::stoi(opt.dims.substr(x + 1));
    }
    if (opt.frames > 0) frames = opt.frames;
    if (frames != gt.frame_count)
        throw std::runtime_error("--frames disagrees with the ground-truth scene");

    const auto records = read_detection_csv(opt.gen);
    TrajectorySet gen = fill_gaps(ingest_detections(records, frames, width, height));
    gt.width = width;
    gt.height = height;
    const MtemScore score = mtem_score(fill_gaps(gt), gen);

    nlohmann::json j;
    j["raw_total"] = score.raw_total;
    j["normalized_percent"] = score.normalized_percent;
    j["cardinality_penalty_count"] = score.cardinality_penalty_count;
    j["unmatched"] = score.pairs.unmatched.size();
    auto pairs = nlohmann::json::array();
    for (std::size_t k = 0; k < score.pairs.pairs.size(); ++k) {
        const auto& [i, jdx] = score.pairs.pairs[k];
        pairs.push_back({{"gt_index", i},
                         {"gen_index", jdx},
                         {"gt_id", gt.trajectories[i].object_id},
                         {"gen_id", gen.trajectories[jdx].object_id},
                         {"distance", score.pair_distances[k]}});
    }
    j["pairs"] = std::move(pairs);

    const fs::path out_path(opt.json_out);
    const fs::path base_dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
    fs::create_directories(base_dir);
    atomic_write_file(out_path.string(), j.dump(2) + "\n");

    RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = "evaluate";
    manifest.parameters = {{"gt", opt.gt},
                           {"gen", opt.gen},
                           {"dims", std::to_string(width) + "x" + std::to_string(height)},
                           {"frames", std::to_string(frames)},
                           {"json", opt.json_out}};
    add_input(manifest, base_dir, opt.gt);
    add_input(manifest, base_dir, opt.gen);
    add_output(manifest, base_dir, out_path);
    manifest.duration_seconds = timer.seconds();
    save_manifest(manifest, (base_dir / "manifest.json").string());

    std::cout << "MTEM " << score.normalized_percent << "% (raw " << score.raw_total
              << " px^2, " << score.pairs.pairs.size() << " pairs, "
              << score.pairs.unmatched.size() << " unmatched)\n";
}

struct VerifyOptions {
    std::string dir;
    std::string manifest;
};

void run_verify(const VerifyOptions& opt) {
    if (opt.dir.empty() && opt.manifest.empty())
        throw CLI::ValidationError("verify", "pass --dir or --manifest");
    const fs::path manifest_path =
        !opt.manifest.empty() ? fs::path(opt.manifest) : fs::path(opt.dir) / "manifest.json";
    const auto m = load_manifest(manifest_path.string());
    const fs::path base = manifest_path.parent_path();
    const auto problems = verify_manifest(m, base.string());
    if (problems.empty()) {
        std::cout << "ok: " << m.outputs.size() << " outputs verified ("
                  << manifest_path.string() << ")\n";
        return;
    }
    for (const auto& p : problems) std::cerr << p << "\n";
    throw std::runtime_error(std::to_string(problems.size()) + " verification failure(s)");
}

}  // namespace

void register_evaluate(CLI::App& app) {
    auto opt = std::make_shared<EvaluateOptions>();
    auto* cmd = app.add_subcommand("evaluate", "Score detections against a ground-truth scene");
    cmd->add_option("--gt", opt->gt, "ground-truth scene JSON")->required();
    cmd->add_option("--gen", opt->gen, "detections CSV (frame,object_id,x,y)")->required();
    cmd->add_option("--dims", opt->dims, "frame dims WxH (default: from --gt)");
    cmd->add_option("--frames", opt->frames, "frame count (default: from --gt)");
    cmd->add_option("--json", opt->json_out, "score JSON output path");
    cmd->callback([opt] { run_evaluate(*opt); });
}

void register_verify(CLI::App& app) {
    auto opt = std::make_shared<VerifyOptions>();
    auto* cmd = app.add_subcommand("verify", "Re-check digests recorded in a run manifest");
    cmd->add_option("--dir", opt->dir, "directory containing manifest.json");
    cmd->add_option("--manifest", opt->manifest, "explicit manifest path");
    cmd->callback([opt] { run_verify(*opt); });
}

}  // namespace intragen::cli
