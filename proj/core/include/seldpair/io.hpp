#pragma once

#include <map>
#include <string>
#include <vector>

#include "seldpair/calibration.hpp"
#include "seldpair/doa.hpp"
#include "seldpair/dsp.hpp"
#include "seldpair/sed.hpp"
#include "seldpair/tensors.hpp"

namespace seldpair {

/// One reference event annotation.
struct LabelRecord {
    std::string class_name;
    double onset_sec = 0.0;
    double offset_sec = 0.0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

struct WavData {
    double sample_rate_hz = 0.0;
    std::vector<std::vector<double>> channels;  // [channel][sample]
};

/// Reads PCM16, PCM24, or float32 WAV (plain or extensible); integer samples
/// scale by 1/2^(bits-1).
WavData read_wav(const std::string& path);

/// Writes float32 WAV.
void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels,
               double sample_rate_hz);

/// Label CSV: header "class,onset_sec,offset_sec,azimuth_deg,elevation_deg",
/// '#' lines ignored.
std::vector<LabelRecord> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<LabelRecord>& records,
                  const std::vector<std::string>& comment_lines = {});

/// Class name -> index. All-numeric names map by value; otherwise indices
/// follow sorted unique name order.
std::map<std::string, int> class_index_map(const std::vector<LabelRecord>& records);

struct RasterizedLabels {
    FrameActivity activity;
    FrameDoas doa_sets;
    /// Per frame: grid index when exactly one event is active, else -1.
    std::vector<int> single_source_doa;
};

/// Frame t is active for a record iff the frame's center time lies in
/// [onset, offset). Rejects overlapping same-class records.
RasterizedLabels rasterize_labels(const std::vector<LabelRecord>& records, const StftConfig& stft,
                                  const DoaGrid& grid, int num_frames, int num_classes);

/// Tensor files live as <base>.json (header) plus <base>.f32 (row-major
/// [frame][pair][class] little-endian float32). NaN marks masked TDOA cells.
void write_score_tensor(const std::string& base_path, const ScoreTensor& tensor);
void write_tdoa_tensor(const std::string& base_path, const TdoaTensor& tensor);
ScoreTensor read_score_tensor(const std::string& base_path);
TdoaTensor read_tdoa_tensor(const std::string& base_path);

void save_calibration(const std::string& path, const CalibrationTable& table);
CalibrationTable load_calibration(const std::string& path);

/// Results CSV: "frame_index,class,azimuth_deg,elevation_deg", one row per
/// active (frame, class), ordered by (frame, class). '#' lines ignored.
void write_results(const std::string& path, const DoaOutput& output,
                   const std::vector<std::string>& comment_lines = {});
DoaOutput read_results(const std::string& path, const DoaGrid& grid);

ArrayGeometry load_geometry(const std::string& path);
void save_geometry(const std::string& path, const ArrayGeometry& geometry);

}  // namespace seldpair
