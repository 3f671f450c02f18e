#pragma once

#include <string>
#include <vector>

#include "seldpair/detector.hpp"
#include "seldpair/doa.hpp"
#include "seldpair/dsp.hpp"
#include "seldpair/geometry.hpp"
#include "seldpair/grid.hpp"

namespace seldpair {

/// Every tunable of the pipeline in one place, defaulted to the reference
/// parameterization: 48 kHz, 2048-sample frames with 960-sample hop, bins
/// 1..513, a 101-point lag lattice over +/-20 samples, sigma 2, gamma 5,
/// 1-second segments.
struct RunConfig {
    StftConfig stft;
    double tau_max = 20.0;
    int num_lattice = 101;
    KernelConfig kernel;
    int min_event_frames = 5;  // shortest kept activity run
    int segment_frames = 50;
    DoaGrid grid;
    std::vector<double> thresholds;  // empty: 0.5 per class
    DetectorConfig detector;

    TdoaLattice lattice() const;
    ThresholdSet thresholds_for(int num_classes) const;
    void validate() const;
    /// Cross-checks the lattice against the geometry's largest possible delay.
    void validate_against(const ArrayGeometry& geometry) const;
};

/// Reads a partial or full config JSON over the defaults. Unknown keys are
/// rejected so typos cannot silently fall back to defaults.
RunConfig load_run_config(const std::string& path);

void save_run_config(const std::string& path, const RunConfig& config);

/// Compact one-line JSON of the effective configuration, echoed into output
/// headers so every artifact records what produced it.
std::string effective_config_line(const RunConfig& config);

}  // namespace seldpair
