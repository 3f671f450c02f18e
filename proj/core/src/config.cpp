#include "seldpair/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "seldpair/sed.hpp"

namespace seldpair {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw ValidationError(where + ": unknown key '" + key + "'");
}

void apply_stft(StftConfig& stft, const json& j) {
    reject_unknown(j, {"sample_rate_hz", "frame_size", "hop_size", "bin_lo", "bin_hi", "window"},
                   "config.stft");
    if (j.contains("sample_rate_hz")) stft.sample_rate_hz = j["sample_rate_hz"].get<double>();
    if (j.contains("frame_size")) stft.frame_size = j["frame_size"].get<int>();
    if (j.contains("hop_size")) stft.hop_size = j["hop_size"].get<int>();
    if (j.contains("bin_lo")) stft.bin_lo = j["bin_lo"].get<int>();
    if (j.contains("bin_hi")) stft.bin_hi = j["bin_hi"].get<int>();
    if (j.contains("window")) {
        const auto w = j["window"].get<std::string>();
        if (w == "hann")
            stft.window = Window::hann;
        else if (w == "rectangular")
            stft.window = Window::rectangular;
        else
            throw ValidationError("config.stft: unknown window '" + w + "'");
    }
}

void apply_grid(DoaGrid& grid, const json& j) {
    reject_unknown(j,
                   {"azimuth_start", "azimuth_step", "azimuth_count", "elevation_start",
                    "elevation_step", "elevation_count"},
                   "config.grid");
    if (j.contains("azimuth_start")) grid.azimuth_start = j["azimuth_start"].get<double>();
    if (j.contains("azimuth_step")) grid.azimuth_step = j["azimuth_step"].get<double>();
    if (j.contains("azimuth_count")) grid.azimuth_count = j["azimuth_count"].get<int>();
    if (j.contains("elevation_start")) grid.elevation_start = j["elevation_start"].get<double>();
    if (j.contains("elevation_step")) grid.elevation_step = j["elevation_step"].get<double>();
    if (j.contains("elevation_count")) grid.elevation_count = j["elevation_count"].get<int>();
}

void apply_detector(DetectorConfig& det, const json& j) {
    reject_unknown(
        j, {"noise_floor_percentile", "smoothing_frames", "single_class_mode", "num_classes"},
        "config.detector");
    if (j.contains("noise_floor_percentile"))
        det.noise_floor_percentile = j["noise_floor_percentile"].get<double>();
    if (j.contains("smoothing_frames")) det.smoothing_frames = j["smoothing_frames"].get<int>();
    if (j.contains("single_class_mode"))
        det.single_class_mode = j["single_class_mode"].get<bool>();
    if (j.contains("num_classes")) det.num_classes = j["num_classes"].get<int>();
}

json to_json(const RunConfig& c) {
    return json{
        {"stft",
         {{"sample_rate_hz", c.stft.sample_rate_hz},
          {"frame_size", c.stft.frame_size},
          {"hop_size", c.stft.hop_size},
          {"bin_lo", c.stft.bin_lo},
          {"bin_hi", c.stft.bin_hi},
          {"window", c.stft.window == Window::hann ? "hann" : "rectangular"}}},
        {"tau_max", c.tau_max},
        {"num_lattice", c.num_lattice},
        {"sigma", c.kernel.sigma},
        {"gamma", c.min_event_frames},
        {"segment_frames", c.segment_frames},
        {"grid",
         {{"azimuth_start", c.grid.azimuth_start},
          {"azimuth_step", c.grid.azimuth_step},
          {"azimuth_count", c.grid.azimuth_count},
          {"elevation_start", c.grid.elevation_start},
          {"elevation_step", c.grid.elevation_step},
          {"elevation_count", c.grid.elevation_count}}},
        {"thresholds", c.thresholds},
        {"detector",
         {{"noise_floor_percentile", c.detector.noise_floor_percentile},
          {"smoothing_frames", c.detector.smoothing_frames},
          {"single_class_mode", c.detector.single_class_mode},
          {"num_classes", c.detector.num_classes}}}};
}

}  // namespace

TdoaLattice RunConfig::lattice() const {
    TdoaLattice l;
    l.tau_max = tau_max;
    l.num_points = num_lattice;
    l.rebuild();
    return l;
}

ThresholdSet RunConfig::thresholds_for(int num_classes) const {
    if (num_classes < 1) throw ValidationError("thresholds_for: need at least one class");
    ThresholdSet set;
    if (thresholds.empty())
        set.epsilon.assign(num_classes, 0.5);
    else if (static_cast<int>(thresholds.size()) == 1)
        set.epsilon.assign(num_classes, thresholds.front());
    else if (static_cast<int>(thresholds.size()) == num_classes)
        set.epsilon = thresholds;
    else
        throw ValidationError("RunConfig: " + std::to_string(thresholds.size()) +
                              " thresholds for " + std::to_string(num_classes) + " classes");
    set.validate();
    return set;
}

void RunConfig::validate() const {
    stft.validate();
    lattice();  // throws on a bad tau_max/num_lattice combination
    kernel.validate();
    detector.validate();
    if (min_event_frames < 1) throw ValidationError("RunConfig: gamma must be >= 1");
    if (segment_frames < min_event_frames)
        throw ValidationError("RunConfig: segment_frames must be >= gamma");
    if (grid.azimuth_count < 1 || grid.elevation_count < 1)
        throw ValidationError("RunConfig: empty DOA grid");
    for (double t : thresholds)
        if (!(t >= 0 && t <= 1)) throw ValidationError("RunConfig: threshold outside [0,1]");
}

void RunConfig::validate_against(const ArrayGeometry& geometry) const {
    validate();
    geometry.validate();
    const double worst = geometry.max_pair_tdoa(stft.sample_rate_hz);
    if (worst > tau_max)
        throw ValidationError("RunConfig: geometry can produce delays up to " +
                              std::to_string(worst) + " samples, beyond tau_max " +
                              std::to_string(tau_max));
}

RunConfig load_run_config(const std::string& path) {
    const json doc = parse_file(path);
    RunConfig c;
    try {
        reject_unknown(doc,
                       {"stft", "tau_max", "num_lattice", "sigma", "gamma", "segment_frames",
                        "grid", "thresholds", "detector"},
                       "config");
        if (doc.contains("stft")) apply_stft(c.stft, doc["stft"]);
        if (doc.contains("tau_max")) c.tau_max = doc["tau_max"].get<double>();
        if (doc.contains("num_lattice")) c.num_lattice = doc["num_lattice"].get<int>();
        if (doc.contains("sigma")) c.kernel.sigma = doc["sigma"].get<double>();
        if (doc.contains("gamma")) c.min_event_frames = doc["gamma"].get<int>();
        if (doc.contains("segment_frames")) c.segment_frames = doc["segment_frames"].get<int>();
        if (doc.contains("grid")) apply_grid(c.grid, doc["grid"]);
        if (doc.contains("thresholds")) c.thresholds = doc["thresholds"].get<std::vector<double>>();
        if (doc.contains("detector")) apply_detector(c.detector, doc["detector"]);
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    c.validate();
    return c;
}

void save_run_config(const std::string& path, const RunConfig& config) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << to_json(config).dump(2) << "\n";
    if (!out) throw DataError("write failed: " + path);
}

std::string effective_config_line(const RunConfig& config) {
    return to_json(config).dump();
}

}  // namespace seldpair
