// seldpair command line: simulate | calibrate | detect | eval | tune-thresholds
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "seldpair/calibration.hpp"
#include "seldpair/config.hpp"
#include "seldpair/detector.hpp"
#include "seldpair/doa.hpp"
#include "seldpair/geometry.hpp"
#include "seldpair/io.hpp"
#include "seldpair/metrics.hpp"
#include "seldpair/pipeline.hpp"
#include "seldpair/sed.hpp"
#include "seldpair/sim.hpp"

namespace fs = std::filesystem;
using namespace seldpair;
using nlohmann::json;

namespace {

// Shared --config plus per-parameter overrides; flags win over the file.
struct ConfigCli {
    std::string config_path;
    double sigma = 0.0;
    int gamma = 0;
    double tau_max = 0.0;
    int grid_g = 0;
    int segment_frames = 0;

    CLI::Option* sigma_opt = nullptr;
    CLI::Option* gamma_opt = nullptr;
    CLI::Option* tau_opt = nullptr;
    CLI::Option* grid_opt = nullptr;
    CLI::Option* seg_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON");
        sigma_opt = cmd->add_option("--sigma", sigma, "DOA kernel width, samples");
        gamma_opt = cmd->add_option("--gamma", gamma, "minimum event length, frames");
        tau_opt = cmd->add_option("--tau-max", tau_max, "lag lattice half-span, samples");
        grid_opt = cmd->add_option("--grid-g", grid_g, "lag lattice point count");
        seg_opt = cmd->add_option("--segment-frames", segment_frames, "frames per segment");
    }

    RunConfig build() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_run_config(config_path);
        if (sigma_opt && sigma_opt->count()) cfg.kernel.sigma = sigma;
        if (gamma_opt && gamma_opt->count()) cfg.min_event_frames = gamma;
        if (tau_opt && tau_opt->count()) cfg.tau_max = tau_max;
        if (grid_opt && grid_opt->count()) cfg.num_lattice = grid_g;
        if (seg_opt && seg_opt->count()) cfg.segment_frames = segment_frames;
        cfg.validate();
        return cfg;
    }
};

ArrayGeometry geometry_or_default(const std::string& path) {
    if (path.empty()) return regular_tetrahedron(0.042);
    return load_geometry(path);
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw DataError(std::string(what) + ": cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(std::string(what) + ": " + path + ": " + e.what());
    }
    return j;
}

// Reference segment activity for one labelled recording, tensor-aligned.
SegmentActivity reference_segments(const std::vector<LabelRecord>& records,
                                   const RunConfig& cfg, int num_frames, int num_classes) {
    const RasterizedLabels raster =
        rasterize_labels(records, cfg.stft, cfg.grid, num_frames, num_classes);
    return to_segments(raster.activity, cfg.segment_frames);
}

int label_class_count(const std::vector<LabelRecord>& records) {
    const auto map = class_index_map(records);
    int max_index = -1;
    for (const auto& [name, idx] : map) max_index = std::max(max_index, idx);
    return max_index + 1;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const ConfigCli& cc, const std::string& script_path,
                 const std::string& geometry_path, const std::string& out_dir,
                 CLI::Option* seed_opt, std::uint64_t seed) {
    const RunConfig cfg = cc.build();
    const ArrayGeometry geometry = geometry_or_default(geometry_path);
    cfg.validate_against(geometry);

    SceneScript script = load_scene_script(script_path, cfg.grid);
    if (seed_opt->count()) script.seed = seed;

    const SimulatedScene scene =
        synthesize(script, geometry, cfg.stft, cfg.grid, cfg.tau_max, cfg.segment_frames);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_wav((dir / "scene.wav").string(), scene.signals, cfg.stft.sample_rate_hz);
    write_labels((dir / "labels.csv").string(), scene.labels,
                 {"config " + effective_config_line(cfg),
                  "seed " + std::to_string(script.seed)});
    write_score_tensor((dir / "scores").string(), scene.oracle_scores);
    write_tdoa_tensor((dir / "tdoas").string(), scene.oracle_tdoas);

    std::printf("wrote scene.wav (%zu ch, %.2f s), labels.csv (%zu events), scores, tdoas to %s\n",
                scene.signals.size(), script.duration_sec, scene.labels.size(), out_dir.c_str());
    std::printf("frames: %d, seed: %llu\n", scene.num_frames,
                static_cast<unsigned long long>(script.seed));
    return 0;
}

// --------------------------------------------------------------- calibrate

int cmd_calibrate(const ConfigCli& cc, const std::string& manifest_path, bool analytic,
                  const std::string& geometry_path, const std::string& out_path) {
    const RunConfig cfg = cc.build();

    CalibrationTable table;
    if (analytic) {
        if (geometry_path.empty())
            throw ValidationError("calibrate: --analytic needs --geometry");
        const ArrayGeometry geometry = load_geometry(geometry_path);
        cfg.validate_against(geometry);
        table = analytic_calibration(geometry, cfg.grid, cfg.stft.sample_rate_hz, cfg.tau_max);
        std::printf("analytic table: %d mics, %d grid points\n", table.num_mics,
                    table.grid.size());
    } else {
        if (manifest_path.empty())
            throw ValidationError("calibrate: need --manifest or --analytic");
        const json manifest = read_json_file(manifest_path, "calibrate manifest");
        if (!manifest.contains("recordings") || !manifest["recordings"].is_array() ||
            manifest["recordings"].empty())
            throw ValidationError("calibrate manifest: needs a non-empty recordings array");

        std::vector<std::unique_ptr<Spectrogram>> specs;
        std::vector<AnnotatedSpectrogram> annotated;
        for (const auto& rec : manifest["recordings"]) {
            const std::string wav_path = rec.at("wav").get<std::string>();
            const std::string labels_path = rec.at("labels").get<std::string>();
            const WavData wav = read_wav(wav_path);
            if (wav.sample_rate_hz != cfg.stft.sample_rate_hz)
                throw ValidationError("calibrate: " + wav_path + " sample rate " +
                                      std::to_string(wav.sample_rate_hz) +
                                      " does not match the configured rate");
            specs.push_back(std::make_unique<Spectrogram>(compute_stft(wav.channels, cfg.stft)));
            const std::vector<LabelRecord> labels = read_labels(labels_path);
            const int classes = std::max(1, label_class_count(labels));
            const RasterizedLabels raster = rasterize_labels(labels, cfg.stft, cfg.grid,
                                                             specs.back()->num_frames, classes);
            annotated.push_back({specs.back().get(), raster.single_source_doa});
        }

        const CalibrationObservations obs =
            collect_observations(annotated, cfg.grid, cfg.lattice());
        table = fit_calibration(obs, cfg.grid);

        std::printf("fit over %zu recordings, %d pairs x %d elevation rows:\n", annotated.size(),
                    table.num_pairs(), cfg.grid.elevation_count);
        std::printf("%6s %10s %12s %12s %8s %9s\n", "pair", "elevation", "rms_first",
                    "rms_second", "points", "outliers");
        for (const auto& row : table.fit_rows)
            std::printf("%6d %10d %12.4f %12.4f %8d %9d\n", row.pair, row.elevation_index,
                        row.rms_first, row.rms_second, row.points_used, row.outliers_removed);
    }

    save_calibration(out_path, table);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

// ------------------------------------------------------------------ detect

int cmd_detect(const ConfigCli& cc, const std::string& audio_path,
               const std::string& scores_base, const std::string& tdoas_base,
               const std::string& detector_kind, const std::string& calibration_path,
               const std::string& out_dir) {
    const RunConfig cfg = cc.build();

    CalibrationTable table;
    try {
        table = load_calibration(calibration_path);
    } catch (const DataError& e) {
        // A bad calibration argument is a configuration problem.
        throw ValidationError(e.what());
    }

    DetectionResult result;
    if (detector_kind == "tensors") {
        if (scores_base.empty() || tdoas_base.empty())
            throw ValidationError("detect: --detector tensors needs --scores and --tdoas");
        result = run_detection(read_score_tensor(scores_base), read_tdoa_tensor(tdoas_base),
                               table, cfg);
    } else {
        if (audio_path.empty()) throw ValidationError("detect: --detector baseline needs --audio");
        const WavData wav = read_wav(audio_path);
        if (wav.sample_rate_hz != cfg.stft.sample_rate_hz)
            throw ValidationError("detect: audio sample rate " +
                                  std::to_string(wav.sample_rate_hz) +
                                  " does not match the configured rate");
        result = run_detection(wav.channels, table, cfg);
    }

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_results((dir / "results.csv").string(), result.doas,
                  {"config " + effective_config_line(cfg)});

    json summary;
    summary["version"] = 1;
    summary["frames"] = result.scores.num_frames;
    summary["classes"] = result.scores.num_classes;
    summary["pairs"] = result.scores.num_pairs;
    summary["segments"] = result.timeline.segments.num_segments;
    summary["doa_entries"] = result.doas.entries.size();
    summary["skipped_missing_tdoa"] = result.doas.skipped_missing_tdoa;
    summary["config"] = json::parse(effective_config_line(cfg));
    std::ofstream((dir / "summary.json").string()) << summary.dump(2) << "\n";

    std::printf("wrote results.csv (%zu rows) and summary.json to %s\n",
                result.doas.entries.size(), out_dir.c_str());
    if (result.doas.skipped_missing_tdoa > 0)
        std::printf("note: %ld active cells had no TDOA estimate and were skipped\n",
                    result.doas.skipped_missing_tdoa);
    return 0;
}

// -------------------------------------------------------------------- eval

int frames_covering(const std::vector<LabelRecord>& records, const StftConfig& stft) {
    int frames = 0;
    for (const auto& r : records) {
        // Last frame whose center falls before the record's offset.
        const double last = (r.offset_sec * stft.sample_rate_hz - stft.frame_size / 2.0) /
                            stft.hop_size;
        frames = std::max(frames, static_cast<int>(std::ceil(last)));
    }
    return frames;
}

int cmd_eval(const ConfigCli& cc, const std::string& results_path,
             const std::string& labels_path, int frames_override, CLI::Option* frames_opt,
             const std::string& out_path) {
    const RunConfig cfg = cc.build();

    const std::vector<LabelRecord> labels = read_labels(labels_path);
    const DoaOutput results = read_results(results_path, cfg.grid);

    int num_frames = std::max(results.num_frames, frames_covering(labels, cfg.stft));
    if (frames_opt->count()) num_frames = frames_override;
    if (num_frames < 1)
        throw ValidationError("eval: no frames to evaluate; give --frames");

    int num_classes = label_class_count(labels);
    for (const auto& e : results.entries) num_classes = std::max(num_classes, e.klass + 1);

    const RasterizedLabels raster =
        rasterize_labels(labels, cfg.stft, cfg.grid, num_frames, num_classes);
    const SegmentActivity ref_segments = to_segments(raster.activity, cfg.segment_frames);

    FrameActivity est_activity;
    est_activity.resize(num_frames, num_classes);
    FrameDoas est_doas(num_frames);
    for (const auto& e : results.entries) {
        if (e.frame >= num_frames)
            throw ValidationError("eval: results frame " + std::to_string(e.frame) +
                                  " past the evaluated range; give --frames");
        est_activity.at(e.frame, e.klass) = 1;
        est_doas[e.frame].push_back({e.azimuth_deg, e.elevation_deg});
    }
    const SegmentActivity est_segments = to_segments(est_activity, cfg.segment_frames);

    const MetricsReport rep = evaluate(est_segments, ref_segments, est_doas, raster.doa_sets);

    json out;
    out["version"] = 1;
    out["error_rate"] = rep.er;
    out["f_score"] = rep.f;
    if (rep.doae)
        out["doa_error_deg"] = *rep.doae;
    else
        out["doa_error_deg"] = nullptr;
    out["frame_recall"] = rep.fr;
    out["frames"] = rep.frames_evaluated;
    out["estimated_doas"] = rep.est_doa_count;
    out["reference_doas"] = rep.ref_doa_count;
    out["matched_doas"] = rep.matched_doa_count;
    out["config"] = json::parse(effective_config_line(cfg));
    std::printf("%s\n", out.dump(2).c_str());

    std::printf("\n%-14s %s\n", "metric", "value");
    std::printf("%-14s %.4f\n", "error rate", rep.er);
    std::printf("%-14s %.4f\n", "f-score", rep.f);
    if (rep.doae)
        std::printf("%-14s %.4f deg\n", "doa error", *rep.doae);
    else
        std::printf("%-14s undefined (no estimates)\n", "doa error");
    std::printf("%-14s %.4f\n", "frame recall", rep.fr);

    if (!out_path.empty()) {
        std::ofstream(out_path) << out.dump(2) << "\n";
        std::printf("wrote %s\n", out_path.c_str());
    }
    return 0;
}

// --------------------------------------------------------- tune-thresholds

int cmd_tune(const ConfigCli& cc, const std::string& manifest_path,
             const std::string& out_path) {
    const RunConfig cfg = cc.build();
    const json manifest = read_json_file(manifest_path, "tuning manifest");
    if (!manifest.contains("examples") || !manifest["examples"].is_array() ||
        manifest["examples"].empty())
        throw ValidationError("tuning manifest: needs a non-empty examples array");

    std::vector<TuningExample> validation;
    for (const auto& ex : manifest["examples"]) {
        TuningExample t;
        t.scores = read_score_tensor(ex.at("scores").get<std::string>());
        const std::vector<LabelRecord> labels =
            read_labels(ex.at("labels").get<std::string>());
        const int classes = std::max(t.scores.num_classes, label_class_count(labels));
        if (classes != t.scores.num_classes)
            throw ValidationError("tune-thresholds: labels name class indices beyond the score "
                                  "tensor's class count");
        t.reference = reference_segments(labels, cfg, t.scores.num_frames, classes);
        validation.push_back(std::move(t));
    }

    const ThresholdSet th = tune_thresholds(validation, cfg.min_event_frames);

    json out;
    out["version"] = 1;
    out["thresholds"] = th.epsilon;
    out["config"] = json::parse(effective_config_line(cfg));
    std::ofstream(out_path) << out.dump(2) << "\n";

    std::printf("tuned %d class threshold(s):", th.num_classes());
    for (double e : th.epsilon) std::printf(" %.2f", e);
    std::printf("\nwrote %s\n", out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pairwise-microphone sound event localization and detection"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "render a scripted scene to WAV plus references");
    ConfigCli sim_cfg;
    sim_cfg.attach(sim);
    std::string sim_script, sim_geometry, sim_out;
    std::uint64_t sim_seed = 0;
    sim->add_option("--script", sim_script, "scene script JSON")->required();
    sim->add_option("--geometry", sim_geometry, "microphone geometry JSON");
    auto* seed_opt = sim->add_option("--seed", sim_seed, "override the script's seed");
    sim->add_option("--out", sim_out, "output directory")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "fit or derive a TDOA calibration table");
    ConfigCli cal_cfg;
    cal_cfg.attach(cal);
    std::string cal_manifest, cal_geometry, cal_out;
    bool cal_analytic = false;
    cal->add_option("--manifest", cal_manifest, "recordings manifest JSON");
    cal->add_flag("--analytic", cal_analytic, "derive the table from geometry alone");
    cal->add_option("--geometry", cal_geometry, "microphone geometry JSON");
    cal->add_option("--out", cal_out, "calibration JSON path")->required();

    // detect
    auto* det = app.add_subcommand("detect", "run detection and DOA estimation");
    ConfigCli det_cfg;
    det_cfg.attach(det);
    std::string det_audio, det_scores, det_tdoas, det_kind = "baseline", det_cal, det_out;
    det->add_option("--audio", det_audio, "multichannel WAV input");
    det->add_option("--scores", det_scores, "score tensor base path");
    det->add_option("--tdoas", det_tdoas, "TDOA tensor base path");
    det->add_option("--detector", det_kind, "detector choice")
        ->check(CLI::IsMember({"baseline", "tensors"}));
    det->add_option("--calibration", det_cal, "calibration JSON")->required();
    det->add_option("--out", det_out, "output directory")->required();

    // eval
    auto* ev = app.add_subcommand("eval", "score results against reference labels");
    ConfigCli ev_cfg;
    ev_cfg.attach(ev);
    std::string ev_results, ev_labels, ev_out;
    int ev_frames = 0;
    ev->add_option("--results", ev_results, "results CSV")->required();
    ev->add_option("--labels", ev_labels, "reference labels CSV")->required();
    auto* frames_opt = ev->add_option("--frames", ev_frames, "frames to evaluate");
    ev->add_option("--out", ev_out, "also write the metrics JSON here");

    // tune-thresholds
    auto* tune =
        app.add_subcommand("tune-thresholds", "pick per-class thresholds on a validation set");
    ConfigCli tune_cfg;
    tune_cfg.attach(tune);
    std::string tune_manifest, tune_out;
    tune->add_option("--manifest", tune_manifest, "examples manifest JSON")->required();
    tune->add_option("--out", tune_out, "thresholds JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_cfg, sim_script, sim_geometry, sim_out, seed_opt, sim_seed);
        if (cal->parsed())
            return cmd_calibrate(cal_cfg, cal_manifest, cal_analytic, cal_geometry, cal_out);
        if (det->parsed())
            return cmd_detect(det_cfg, det_audio, det_scores, det_tdoas, det_kind, det_cal,
                              det_out);
        if (ev->parsed())
            return cmd_eval(ev_cfg, ev_results, ev_labels, ev_frames, frames_opt, ev_out);
        if (tune->parsed()) return cmd_tune(tune_cfg, tune_manifest, tune_out);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
