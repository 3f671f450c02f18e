#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <json.hpp>

#include "seldpair/calibration.hpp"
#include "seldpair/config.hpp"
#include "seldpair/geometry.hpp"
#include "seldpair/io.hpp"

using namespace seldpair;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("seldpair_cli_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Runs the installed binary through the shell; stdout+stderr land in capture_path.
int run_cli(const std::string& args, const std::string& capture_path = "") {
    std::string cmd = std::string("\"") + SELDPAIR_CLI_PATH + "\" " + args;
    if (!capture_path.empty()) cmd += " > \"" + capture_path + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
    REQUIRE(out.good());
}

json make_event(int klass, double onset, double offset, int q, const char* kind,
                double snr_db) {
    return json{{"class", klass}, {"onset_sec", onset}, {"offset_sec", offset},
                {"doa_index", q}, {"kind", kind},       {"snr_db", snr_db}};
}

// One noise burst and one tone, non-overlapping, on the default grid.
std::string write_two_event_script(const TempDir& dir, std::uint64_t seed) {
    json script{{"duration_sec", 3.0}, {"seed", seed}, {"noise_std", 0.01}};
    script["events"] = json::array();
    script["events"].push_back(make_event(0, 0.4, 1.6, 87, "white_noise", 20.0));
    json tone = make_event(1, 1.8, 2.8, 200, "tone", 20.0);
    tone["tone_hz"] = 2500.0;
    script["events"].push_back(tone);
    const std::string path = dir.file("script.json");
    spit(path, script.dump(2));
    return path;
}

std::string write_default_geometry(const TempDir& dir) {
    const std::string path = dir.file("tetra.json");
    save_geometry(path, regular_tetrahedron(0.042));
    return path;
}

}  // namespace

TEST_CASE("help exits cleanly and lists the subcommands") {
    TempDir dir;
    const std::string out = dir.file("help.txt");
    CHECK(run_cli("--help", out) == 0);
    const std::string text = slurp(out);
    for (const char* name : {"simulate", "calibrate", "detect", "eval", "tune-thresholds"})
        CHECK(text.find(name) != std::string::npos);
}

TEST_CASE("usage and validation problems exit with code 2") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    CHECK(run_cli("frobnicate", log) == 2);
    CHECK(run_cli("detect --out somewhere", log) == 2);  // missing --calibration
    CHECK(run_cli("calibrate --out " + dir.file("cal.json"), log) == 2);
    CHECK(run_cli("detect --detector tensors --calibration nope.json --out " + dir.file("d"),
                  log) == 2);

    // Override validation runs before any work happens.
    const std::string script = write_two_event_script(dir, 1);
    CHECK(run_cli("simulate --script " + script + " --out " + dir.file("s") + " --gamma 0",
                  log) == 2);
    CHECK(slurp(log).find("gamma") != std::string::npos);
}

TEST_CASE("simulate writes a scene bundle and the seed controls the audio") {
    TempDir dir;
    const std::string script = write_two_event_script(dir, 5);
    const std::string log = dir.file("log.txt");

    CHECK(run_cli("simulate --script " + script + " --out " + dir.file("a"), log) == 0);
    for (const char* name :
         {"scene.wav", "labels.csv", "scores.json", "scores.f32", "tdoas.json", "tdoas.f32"})
        CHECK(fs::exists(dir.path / "a" / name));

    const std::string labels_text = slurp(dir.file("a/labels.csv"));
    CHECK(labels_text.rfind("# config ", 0) == 0);
    CHECK(labels_text.find("# seed 5") != std::string::npos);

    // Same seed reproduces the waveform byte for byte; a new seed does not.
    CHECK(run_cli("simulate --script " + script + " --out " + dir.file("b") + " --seed 5",
                  log) == 0);
    CHECK(run_cli("simulate --script " + script + " --out " + dir.file("c") + " --seed 6",
                  log) == 0);
    const std::string wav_a = slurp(dir.file("a/scene.wav"));
    CHECK(wav_a == slurp(dir.file("b/scene.wav")));
    CHECK(wav_a != slurp(dir.file("c/scene.wav")));
}

TEST_CASE("simulate rejects an off-grid event direction") {
    TempDir dir;
    json script{{"duration_sec", 1.0},
                {"events", json::array({json{{"class", 0},
                                             {"onset_sec", 0.2},
                                             {"offset_sec", 0.8},
                                             {"azimuth_deg", -181.0},
                                             {"elevation_deg", 0.0}}})}};
    const std::string path = dir.file("bad.json");
    spit(path, script.dump());
    const std::string log = dir.file("log.txt");
    CHECK(run_cli("simulate --script " + path + " --out " + dir.file("x"), log) == 2);
    CHECK(slurp(log).find("not on the grid") != std::string::npos);
}

TEST_CASE("analytic calibration through the CLI matches the library") {
    TempDir dir;
    const std::string geometry = write_default_geometry(dir);
    const std::string cal_path = dir.file("cal.json");
    CHECK(run_cli("calibrate --analytic --geometry " + geometry + " --out " + cal_path,
                  dir.file("log.txt")) == 0);

    const CalibrationTable got = load_calibration(cal_path);
    RunConfig cfg;
    const CalibrationTable want =
        analytic_calibration(regular_tetrahedron(0.042), cfg.grid, cfg.stft.sample_rate_hz,
                             cfg.tau_max);
    REQUIRE(got.num_mics == want.num_mics);
    REQUIRE(got.grid.size() == want.grid.size());
    CHECK(got.provenance == Provenance::analytic);
    for (int p = 0; p < got.num_pairs(); ++p)
        for (int q = 0; q < got.grid.size(); ++q)
            CHECK(got.at(q, p) == doctest::Approx(want.at(q, p)).epsilon(1e-12));
}

TEST_CASE("measured calibration from a simulated sweep tracks the analytic table") {
    TempDir dir;

    // A coarse grid keeps the sweep short while leaving every elevation row
    // enough azimuths for the fit.
    json cfg_doc{{"grid",
                  {{"azimuth_start", -180.0},
                   {"azimuth_step", 20.0},
                   {"azimuth_count", 18},
                   {"elevation_start", -10.0},
                   {"elevation_step", 10.0},
                   {"elevation_count", 3}}}};
    const std::string cfg_path = dir.file("cfg.json");
    spit(cfg_path, cfg_doc.dump(2));

    json script{{"duration_sec", 0.1 + 54 * 0.30}, {"seed", 77}, {"noise_std", 0.01}};
    script["events"] = json::array();
    for (int q = 0; q < 54; ++q) {
        const double onset = 0.05 + 0.30 * q;
        script["events"].push_back(make_event(0, onset, onset + 0.25, q, "white_noise", 25.0));
    }
    const std::string script_path = dir.file("sweep.json");
    spit(script_path, script.dump());

    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("simulate --config " + cfg_path + " --script " + script_path + " --out " +
                        dir.file("sweep"),
                    log) == 0);

    json manifest{{"recordings", json::array({json{{"wav", dir.file("sweep/scene.wav")},
                                                   {"labels", dir.file("sweep/labels.csv")}}})}};
    const std::string manifest_path = dir.file("manifest.json");
    spit(manifest_path, manifest.dump());

    const std::string cal_path = dir.file("cal.json");
    REQUIRE(run_cli("calibrate --config " + cfg_path + " --manifest " + manifest_path +
                        " --out " + cal_path,
                    log) == 0);
    CHECK(slurp(log).find("rms_second") != std::string::npos);

    const RunConfig cfg = load_run_config(cfg_path);
    const CalibrationTable got = load_calibration(cal_path);
    const CalibrationTable want =
        analytic_calibration(regular_tetrahedron(0.042), cfg.grid, cfg.stft.sample_rate_hz,
                             cfg.tau_max);
    REQUIRE(got.grid.size() == 54);
    CHECK(got.provenance == Provenance::measured);
    CHECK(got.fit_rows.size() == 6 * 3);
    double worst = 0.0;
    for (int p = 0; p < got.num_pairs(); ++p)
        for (int q = 0; q < got.grid.size(); ++q)
            worst = std::max(worst, std::abs(got.at(q, p) - want.at(q, p)));
    CHECK(worst < 0.5);
}

TEST_CASE("calibrate fails cleanly when one elevation row lacks coverage") {
    TempDir dir;
    const std::string script = write_two_event_script(dir, 9);
    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("simulate --script " + script + " --out " + dir.file("scene"), log) == 0);

    json manifest{{"recordings", json::array({json{{"wav", dir.file("scene/scene.wav")},
                                                   {"labels", dir.file("scene/labels.csv")}}})}};
    spit(dir.file("manifest.json"), manifest.dump());
    CHECK(run_cli("calibrate --manifest " + dir.file("manifest.json") + " --out " +
                      dir.file("cal.json"),
                  log) == 2);
    CHECK(slurp(log).find("pair") != std::string::npos);
}

TEST_CASE("tensor detection plus eval closes the loop on a scripted scene") {
    TempDir dir;
    const std::string script = write_two_event_script(dir, 41);
    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("simulate --script " + script + " --out " + dir.file("scene"), log) == 0);

    const std::string geometry = write_default_geometry(dir);
    const std::string cal_path = dir.file("cal.json");
    REQUIRE(run_cli("calibrate --analytic --geometry " + geometry + " --out " + cal_path,
                    log) == 0);

    REQUIRE(run_cli("detect --detector tensors --scores " + dir.file("scene/scores") +
                        " --tdoas " + dir.file("scene/tdoas") + " --calibration " + cal_path +
                        " --out " + dir.file("det"),
                    log) == 0);
    CHECK(fs::exists(dir.path / "det" / "results.csv"));

    const json summary = json::parse(slurp(dir.file("det/summary.json")));
    CHECK(summary.at("classes").get<int>() == 2);
    CHECK(summary.at("pairs").get<int>() == 6);
    CHECK(summary.at("skipped_missing_tdoa").get<int>() == 0);
    CHECK(summary.at("config").contains("sigma"));

    const std::string eval_log = dir.file("eval.txt");
    REQUIRE(run_cli("eval --results " + dir.file("det/results.csv") + " --labels " +
                        dir.file("scene/labels.csv") + " --out " + dir.file("metrics.json"),
                    eval_log) == 0);
    const json metrics = json::parse(slurp(dir.file("metrics.json")));
    CHECK(metrics.at("error_rate").get<double>() == 0.0);
    CHECK(metrics.at("f_score").get<double>() == 1.0);
    CHECK(metrics.at("doa_error_deg").get<double>() == 0.0);
    CHECK(metrics.at("frame_recall").get<double>() == 1.0);
}

TEST_CASE("detect refuses an unreadable calibration file") {
    TempDir dir;
    const std::string log = dir.file("log.txt");
    CHECK(run_cli("detect --detector tensors --scores s --tdoas t --calibration " +
                      dir.file("missing.json") + " --out " + dir.file("d"),
                  log) == 2);

    spit(dir.file("garbage.json"), "not json at all {");
    CHECK(run_cli("detect --detector tensors --scores s --tdoas t --calibration " +
                      dir.file("garbage.json") + " --out " + dir.file("d"),
                  log) == 2);
}

TEST_CASE("eval reports an undefined DOA error when results are empty") {
    TempDir dir;
    spit(dir.file("results.csv"), "frame_index,class,azimuth_deg,elevation_deg\n");
    spit(dir.file("labels.csv"),
         "class,onset_sec,offset_sec,azimuth_deg,elevation_deg\n0,0.5,1.5,-180,-40\n");

    const std::string out = dir.file("eval.txt");
    REQUIRE(run_cli("eval --results " + dir.file("results.csv") + " --labels " +
                        dir.file("labels.csv") + " --out " + dir.file("metrics.json"),
                    out) == 0);
    CHECK(slurp(out).find("undefined (no estimates)") != std::string::npos);

    const json metrics = json::parse(slurp(dir.file("metrics.json")));
    CHECK(metrics.at("error_rate").get<double>() == 1.0);
    CHECK(metrics.at("f_score").get<double>() == 0.0);
    CHECK(metrics.at("doa_error_deg").is_null());
    // 74 frames cover the label span; the reference is active on frames
    // 24..73, so the empty estimate matches counts only on the 24 quiet ones.
    CHECK(metrics.at("frame_recall").get<double>() == doctest::Approx(24.0 / 74.0));
}

TEST_CASE("tune-thresholds recovers the oracle threshold from simulated tensors") {
    TempDir dir;
    const std::string script = write_two_event_script(dir, 13);
    const std::string log = dir.file("log.txt");
    REQUIRE(run_cli("simulate --script " + script + " --out " + dir.file("scene"), log) == 0);

    json manifest{{"examples", json::array({json{{"scores", dir.file("scene/scores")},
                                                 {"labels", dir.file("scene/labels.csv")}}})}};
    spit(dir.file("manifest.json"), manifest.dump());

    REQUIRE(run_cli("tune-thresholds --manifest " + dir.file("manifest.json") + " --out " +
                        dir.file("thresholds.json"),
                    log) == 0);
    const json out = json::parse(slurp(dir.file("thresholds.json")));
    REQUIRE(out.at("thresholds").size() == 2);
    for (const auto& t : out.at("thresholds")) CHECK(t.get<double>() == 0.01);
}

TEST_CASE("the shipped default config is accepted by the CLI") {
    TempDir dir;
    const std::string script = write_two_event_script(dir, 3);
    const std::string cfg = std::string(SELDPAIR_CONFIG_DIR) + "/default.json";
    CHECK(run_cli("simulate --config " + cfg + " --script " + script + " --out " +
                      dir.file("s"),
                  dir.file("log.txt")) == 0);
}
