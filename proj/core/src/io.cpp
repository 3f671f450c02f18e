#include "seldpair/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "seldpair/sim.hpp"

namespace seldpair {

namespace {

using nlohmann::json;

std::vector<unsigned char> slurp_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string slurp_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(slurp_text(path));
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << text;
    if (!out) throw DataError("write failed: " + path);
}

uint16_t rd_u16(const unsigned char* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t rd_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void wr_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}
void wr_u32(std::string& s, uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + " from '" + s + "'");
    }
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DataError("cannot parse " + what + " from '" + s + "'");
    }
}

std::string format_num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

json grid_to_json(const DoaGrid& g) {
    return json{{"azimuth_start", g.azimuth_start},   {"azimuth_step", g.azimuth_step},
                {"azimuth_count", g.azimuth_count},   {"elevation_start", g.elevation_start},
                {"elevation_step", g.elevation_step}, {"elevation_count", g.elevation_count}};
}

DoaGrid grid_from_json(const json& j) {
    DoaGrid g;
    g.azimuth_start = j.at("azimuth_start").get<double>();
    g.azimuth_step = j.at("azimuth_step").get<double>();
    g.azimuth_count = j.at("azimuth_count").get<int>();
    g.elevation_start = j.at("elevation_start").get<double>();
    g.elevation_step = j.at("elevation_step").get<double>();
    g.elevation_count = j.at("elevation_count").get<int>();
    if (g.azimuth_count < 1 || g.elevation_count < 1 || g.azimuth_step == 0 ||
        g.elevation_step == 0)
        throw DataError("grid: degenerate grid parameters");
    return g;
}

constexpr const char* kPairOrder = "lexicographic_i_lt_j";

}  // namespace

WavData read_wav(const std::string& path) {
    const auto bytes = slurp_binary(path);
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError(path + ": not a RIFF/WAVE file");

    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    bool have_fmt = false;
    const unsigned char* data = nullptr;
    size_t data_size = 0;

    size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + off;
        const uint32_t size = rd_u32(hdr + 4);
        const unsigned char* body = hdr + 8;
        if (off + 8 + size > bytes.size()) throw DataError(path + ": chunk overruns file");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (size < 16) throw DataError(path + ": fmt chunk too small");
            format = rd_u16(body);
            channels = rd_u16(body + 2);
            rate = rd_u32(body + 4);
            bits = rd_u16(body + 14);
            if (format == 0xFFFE) {
                if (size < 40) throw DataError(path + ": extensible fmt chunk too small");
                format = rd_u16(body + 24);  // first two bytes of the sub-format GUID
            }
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = body;
            data_size = size;
        }
        off += 8 + size + (size & 1);
    }

    if (!have_fmt) throw DataError(path + ": missing fmt chunk");
    if (!data) throw DataError(path + ": missing data chunk");
    if (channels < 1) throw DataError(path + ": zero channels");

    const bool pcm = format == 1;
    const bool flt = format == 3;
    if (!pcm && !flt)
        throw DataError(path + ": unsupported codec (format tag " + std::to_string(format) + ")");
    if (pcm && bits != 16 && bits != 24)
        throw DataError(path + ": unsupported PCM depth " + std::to_string(bits));
    if (flt && bits != 32) throw DataError(path + ": unsupported float depth");

    const size_t bytes_per = bits / 8;
    const size_t stride = bytes_per * channels;
    if (data_size % stride != 0)
        throw DataError(path + ": data size is not a whole number of sample frames");
    const size_t num_samples = data_size / stride;

    WavData out;
    out.sample_rate_hz = rate;
    out.channels.assign(channels, std::vector<double>(num_samples));
    for (size_t n = 0; n < num_samples; ++n) {
        for (int ch = 0; ch < channels; ++ch) {
            const unsigned char* p = data + n * stride + ch * bytes_per;
            double v = 0.0;
            if (flt) {
                float f;
                std::memcpy(&f, p, 4);
                v = f;
            } else if (bits == 16) {
                const int16_t raw = static_cast<int16_t>(rd_u16(p));
                v = raw / 32768.0;
            } else {
                int32_t raw = p[0] | (p[1] << 8) | (p[2] << 16);
                if (raw & 0x800000) raw |= ~0xFFFFFF;
                v = raw / 8388608.0;
            }
            out.channels[ch][n] = v;
        }
    }
    return out;
}

void write_wav(const std::string& path, const std::vector<std::vector<double>>& channels,
               double sample_rate_hz) {
    if (channels.empty()) throw ValidationError("write_wav: no channels");
    if (!(sample_rate_hz > 0)) throw ValidationError("write_wav: bad sample rate");
    const size_t num_samples = channels.front().size();
    for (const auto& ch : channels)
        if (ch.size() != num_samples)
            throw ValidationError("write_wav: channels differ in length");

    const uint16_t M = static_cast<uint16_t>(channels.size());
    const uint32_t rate = static_cast<uint32_t>(std::lround(sample_rate_hz));
    const uint32_t data_size = static_cast<uint32_t>(4 * M * num_samples);

    std::string s;
    s.reserve(60 + data_size);
    s += "RIFF";
    wr_u32(s, 4 + (8 + 16) + (8 + 4) + (8 + data_size));
    s += "WAVE";
    s += "fmt ";
    wr_u32(s, 16);
    wr_u16(s, 3);  // IEEE float
    wr_u16(s, M);
    wr_u32(s, rate);
    wr_u32(s, rate * 4u * M);
    wr_u16(s, static_cast<uint16_t>(4 * M));
    wr_u16(s, 32);
    s += "fact";
    wr_u32(s, 4);
    wr_u32(s, static_cast<uint32_t>(num_samples));
    s += "data";
    wr_u32(s, data_size);
    for (size_t n = 0; n < num_samples; ++n) {
        for (int ch = 0; ch < M; ++ch) {
            const float f = static_cast<float>(channels[ch][n]);
            uint32_t raw;
            std::memcpy(&raw, &f, 4);
            wr_u32(s, raw);
        }
    }
    write_text(path, s);
}

std::vector<LabelRecord> read_labels(const std::string& path) {
    std::istringstream in(slurp_text(path));
    std::vector<LabelRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto fields = split_csv_line(t);
        if (fields.size() == 5 && fields[0] == "class") continue;  // header
        if (fields.size() != 5)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 5 fields, got " +
                            std::to_string(fields.size()));
        LabelRecord r;
        r.class_name = fields[0];
        r.onset_sec = parse_double(fields[1], "onset_sec");
        r.offset_sec = parse_double(fields[2], "offset_sec");
        r.azimuth_deg = parse_double(fields[3], "azimuth_deg");
        r.elevation_deg = parse_double(fields[4], "elevation_deg");
        if (!(r.onset_sec < r.offset_sec))
            throw DataError(path + ":" + std::to_string(lineno) + ": onset must precede offset");
        out.push_back(std::move(r));
    }
    return out;
}

void write_labels(const std::string& path, const std::vector<LabelRecord>& records,
                  const std::vector<std::string>& comment_lines) {
    std::string s;
    for (const auto& c : comment_lines) s += "# " + c + "\n";
    s += "class,onset_sec,offset_sec,azimuth_deg,elevation_deg\n";
    for (const auto& r : records) {
        s += r.class_name + "," + format_num(r.onset_sec) + "," + format_num(r.offset_sec) + "," +
             format_num(r.azimuth_deg) + "," + format_num(r.elevation_deg) + "\n";
    }
    write_text(path, s);
}

std::map<std::string, int> class_index_map(const std::vector<LabelRecord>& records) {
    std::map<std::string, int> out;
    bool all_numeric = true;
    for (const auto& r : records) {
        if (r.class_name.empty() ||
            !std::all_of(r.class_name.begin(), r.class_name.end(),
                         [](unsigned char c) { return std::isdigit(c); }))
            all_numeric = false;
        out[r.class_name] = 0;
    }
    int next = 0;
    for (auto& [name, idx] : out)
        idx = all_numeric ? static_cast<int>(parse_long(name, "class index")) : next++;
    return out;
}

RasterizedLabels rasterize_labels(const std::vector<LabelRecord>& records, const StftConfig& stft,
                                  const DoaGrid& grid, int num_frames, int num_classes) {
    stft.validate();
    if (num_frames < 0) throw ValidationError("rasterize_labels: negative frame count");
    if (num_classes < 1) throw ValidationError("rasterize_labels: need at least one class");

    const auto classes = class_index_map(records);
    for (const auto& [name, idx] : classes)
        if (idx < 0 || idx >= num_classes)
            throw ValidationError("rasterize_labels: class '" + name +
                                  "' maps outside [0, num_classes)");

    for (size_t i = 0; i < records.size(); ++i)
        for (size_t j = i + 1; j < records.size(); ++j) {
            if (records[i].class_name != records[j].class_name) continue;
            if (records[i].onset_sec < records[j].offset_sec &&
                records[j].onset_sec < records[i].offset_sec)
                throw ValidationError("rasterize_labels: records " + std::to_string(i) + " and " +
                                      std::to_string(j) + " of class '" + records[i].class_name +
                                      "' overlap in time");
        }

    RasterizedLabels out;
    out.activity.resize(num_frames, num_classes);
    out.doa_sets.assign(num_frames, {});
    out.single_source_doa.assign(num_frames, -1);
    for (int t = 0; t < num_frames; ++t) {
        const double center =
            (static_cast<double>(t) * stft.hop_size + stft.frame_size / 2.0) / stft.sample_rate_hz;
        int active = 0, last_q = -1;
        for (const auto& r : records) {
            if (!(center >= r.onset_sec && center < r.offset_sec)) continue;
            ++active;
            out.activity.at(t, classes.at(r.class_name)) = 1;
            out.doa_sets[t].push_back({r.azimuth_deg, r.elevation_deg});
            const auto q = grid.from_angles(r.azimuth_deg, r.elevation_deg);
            last_q = q ? *q : -1;
        }
        if (active == 1) out.single_source_doa[t] = last_q;
    }
    return out;
}

namespace {

void write_tensor_file(const std::string& base_path, const char* kind, int T, int P, int C,
                       const std::vector<double>& data, double tau_max) {
    json header{{"version", 1},
                {"kind", kind},
                {"dims", {T, P, C}},
                {"pair_order", kPairOrder},
                {"dtype", "f32le"}};
    if (tau_max > 0) header["tau_max"] = tau_max;
    write_text(base_path + ".json", header.dump(2) + "\n");

    std::string body(data.size() * 4, '\0');
    for (size_t i = 0; i < data.size(); ++i) {
        const float f = static_cast<float>(data[i]);
        std::memcpy(&body[i * 4], &f, 4);
    }
    write_text(base_path + ".f32", body);
}

struct RawTensor {
    int t = 0, p = 0, c = 0;
    double tau_max = 0.0;
    std::vector<double> data;
};

RawTensor read_tensor_file(const std::string& base_path, const char* expect_kind) {
    const json header = parse_json_file(base_path + ".json");
    try {
        if (header.at("version").get<int>() != 1)
            throw DataError(base_path + ".json: unsupported version");
        const auto kind = header.at("kind").get<std::string>();
        if (kind != expect_kind)
            throw DataError(base_path + ".json: kind is '" + kind + "', expected '" +
                            expect_kind + "'");
        if (header.at("dtype").get<std::string>() != "f32le")
            throw DataError(base_path + ".json: dtype must be f32le");
        if (header.at("pair_order").get<std::string>() != kPairOrder)
            throw DataError(base_path + ".json: unknown pair_order");
        const auto& dims = header.at("dims");
        if (!dims.is_array() || dims.size() != 3)
            throw DataError(base_path + ".json: dims must have three entries");

        RawTensor out;
        out.t = dims[0].get<int>();
        out.p = dims[1].get<int>();
        out.c = dims[2].get<int>();
        if (out.t < 0 || out.p < 1 || out.c < 1)
            throw DataError(base_path + ".json: dims out of range");
        if (header.contains("tau_max")) out.tau_max = header["tau_max"].get<double>();

        const auto body = slurp_binary(base_path + ".f32");
        const size_t expect = static_cast<size_t>(out.t) * out.p * out.c * 4;
        if (body.size() != expect)
            throw DataError(base_path + ".f32: body is " + std::to_string(body.size()) +
                            " bytes, dims say " + std::to_string(expect));
        out.data.resize(body.size() / 4);
        for (size_t i = 0; i < out.data.size(); ++i) {
            float f;
            std::memcpy(&f, body.data() + i * 4, 4);
            out.data[i] = f;
        }
        return out;
    } catch (const json::exception& e) {
        throw DataError(base_path + ".json: " + e.what());
    }
}

}  // namespace

void write_score_tensor(const std::string& base_path, const ScoreTensor& tensor) {
    tensor.validate();
    write_tensor_file(base_path, "scores", tensor.num_frames, tensor.num_pairs,
                      tensor.num_classes, tensor.data, 0.0);
}

void write_tdoa_tensor(const std::string& base_path, const TdoaTensor& tensor) {
    tensor.validate();
    write_tensor_file(base_path, "tdoas", tensor.num_frames, tensor.num_pairs, tensor.num_classes,
                      tensor.data, tensor.tau_max);
}

ScoreTensor read_score_tensor(const std::string& base_path) {
    const RawTensor raw = read_tensor_file(base_path, "scores");
    ScoreTensor out;
    out.num_frames = raw.t;
    out.num_pairs = raw.p;
    out.num_classes = raw.c;
    out.data = raw.data;
    out.validate();
    return out;
}

TdoaTensor read_tdoa_tensor(const std::string& base_path) {
    const RawTensor raw = read_tensor_file(base_path, "tdoas");
    if (!(raw.tau_max > 0)) throw DataError(base_path + ".json: missing or bad tau_max");
    TdoaTensor out;
    out.num_frames = raw.t;
    out.num_pairs = raw.p;
    out.num_classes = raw.c;
    out.tau_max = raw.tau_max;
    out.data = raw.data;
    // float32 quantization may nudge a boundary value just past tau_max.
    const double slack = raw.tau_max * 1e-5;
    for (auto& v : out.data) {
        if (std::isnan(v)) continue;
        if (std::abs(v) > raw.tau_max && std::abs(v) <= raw.tau_max + slack)
            v = std::copysign(raw.tau_max, v);
    }
    out.validate();
    return out;
}

void save_calibration(const std::string& path, const CalibrationTable& table) {
    const int P = table.num_pairs();
    json rows = json::array();
    for (int q = 0; q < table.grid.size(); ++q) {
        json row = json::array();
        for (int p = 0; p < P; ++p) row.push_back(table.at(q, p));
        rows.push_back(std::move(row));
    }
    json fits = json::array();
    for (const auto& r : table.fit_rows) {
        fits.push_back(json{{"pair", r.pair},
                            {"elevation_index", r.elevation_index},
                            {"rms_first", r.rms_first},
                            {"rms_second", r.rms_second},
                            {"points_used", r.points_used},
                            {"outliers_removed", r.outliers_removed},
                            {"coeffs_first", r.coeffs_first},
                            {"coeffs_second", r.coeffs_second}});
    }
    const json doc{{"version", 1},
                   {"num_mics", table.num_mics},
                   {"pair_order", kPairOrder},
                   {"tau_max", table.tau_max},
                   {"num_lattice", table.num_lattice},
                   {"provenance",
                    table.provenance == Provenance::analytic ? "analytic" : "measured"},
                   {"grid", grid_to_json(table.grid)},
                   {"tdoa", std::move(rows)},
                   {"fit_rows", std::move(fits)}};
    write_text(path, doc.dump(2) + "\n");
}

CalibrationTable load_calibration(const std::string& path) {
    const json doc = parse_json_file(path);
    try {
        if (doc.at("version").get<int>() != 1) throw DataError(path + ": unsupported version");
        if (doc.at("pair_order").get<std::string>() != kPairOrder)
            throw DataError(path + ": unknown pair_order");
        CalibrationTable table;
        table.num_mics = doc.at("num_mics").get<int>();
        if (table.num_mics < 2) throw DataError(path + ": num_mics must be >= 2");
        table.tau_max = doc.at("tau_max").get<double>();
        if (!(table.tau_max > 0)) throw DataError(path + ": tau_max must be positive");
        if (doc.contains("num_lattice")) table.num_lattice = doc["num_lattice"].get<int>();
        const auto prov = doc.at("provenance").get<std::string>();
        if (prov != "analytic" && prov != "measured")
            throw DataError(path + ": provenance must be analytic or measured");
        table.provenance = prov == "analytic" ? Provenance::analytic : Provenance::measured;
        table.grid = grid_from_json(doc.at("grid"));

        const auto& rows = doc.at("tdoa");
        if (!rows.is_array() || static_cast<int>(rows.size()) != table.grid.size())
            throw DataError(path + ": tdoa row count does not match the grid");
        const int P = table.num_pairs();
        table.tdoa.reserve(static_cast<size_t>(table.grid.size()) * P);
        for (const auto& row : rows) {
            if (!row.is_array() || static_cast<int>(row.size()) != P)
                throw DataError(path + ": tdoa row length does not match the pair count");
            for (const auto& v : row) {
                const double x = v.get<double>();
                if (!std::isfinite(x) || std::abs(x) > table.tau_max)
                    throw DataError(path + ": tdoa entry outside [-tau_max, tau_max]");
                table.tdoa.push_back(x);
            }
        }
        if (doc.contains("fit_rows")) {
            for (const auto& f : doc["fit_rows"]) {
                FitRow r;
                r.pair = f.at("pair").get<int>();
                r.elevation_index = f.at("elevation_index").get<int>();
                r.rms_first = f.at("rms_first").get<double>();
                r.rms_second = f.at("rms_second").get<double>();
                r.points_used = f.at("points_used").get<int>();
                r.outliers_removed = f.at("outliers_removed").get<int>();
                r.coeffs_first = f.at("coeffs_first").get<std::vector<double>>();
                r.coeffs_second = f.at("coeffs_second").get<std::vector<double>>();
                table.fit_rows.push_back(std::move(r));
            }
        }
        return table;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_results(const std::string& path, const DoaOutput& output,
                   const std::vector<std::string>& comment_lines) {
    auto entries = output.entries;
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.klass < b.klass;
    });
    std::string s;
    for (const auto& c : comment_lines) s += "# " + c + "\n";
    s += "frame_index,class,azimuth_deg,elevation_deg\n";
    for (const auto& e : entries) {
        s += std::to_string(e.frame) + "," + std::to_string(e.klass) + "," +
             format_num(e.azimuth_deg) + "," + format_num(e.elevation_deg) + "\n";
    }
    write_text(path, s);
}

DoaOutput read_results(const std::string& path, const DoaGrid& grid) {
    std::istringstream in(slurp_text(path));
    DoaOutput out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto fields = split_csv_line(t);
        if (fields.size() == 4 && fields[0] == "frame_index") continue;  // header
        if (fields.size() != 4)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 fields, got " +
                            std::to_string(fields.size()));
        DoaOutput::Entry e;
        e.frame = static_cast<int>(parse_long(fields[0], "frame_index"));
        e.klass = static_cast<int>(parse_long(fields[1], "class"));
        e.azimuth_deg = parse_double(fields[2], "azimuth_deg");
        e.elevation_deg = parse_double(fields[3], "elevation_deg");
        if (e.frame < 0 || e.klass < 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": negative frame or class");
        const auto q = grid.from_angles(e.azimuth_deg, e.elevation_deg);
        if (!q)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": direction does not sit on the grid");
        e.grid_index = *q;
        out.entries.push_back(e);
        out.num_frames = std::max(out.num_frames, e.frame + 1);
    }
    return out;
}

ArrayGeometry load_geometry(const std::string& path) {
    const json doc = parse_json_file(path);
    try {
        ArrayGeometry g;
        if (doc.contains("speed_of_sound"))
            g.speed_of_sound = doc["speed_of_sound"].get<double>();
        for (const auto& p : doc.at("mic_positions")) {
            if (!p.is_array() || p.size() != 3)
                throw DataError(path + ": each mic position needs three coordinates");
            g.mic_positions.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
        }
        g.validate();
        return g;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

void save_geometry(const std::string& path, const ArrayGeometry& geometry) {
    json mics = json::array();
    for (const auto& p : geometry.mic_positions) mics.push_back({p[0], p[1], p[2]});
    const json doc{{"mic_positions", std::move(mics)},
                   {"speed_of_sound", geometry.speed_of_sound}};
    write_text(path, doc.dump(2) + "\n");
}

SceneScript load_scene_script(const std::string& path, const DoaGrid& grid) {
    const json doc = parse_json_file(path);
    try {
        SceneScript script;
        script.duration_sec = doc.at("duration_sec").get<double>();
        if (doc.contains("seed")) script.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("noise_std")) script.noise_std = doc["noise_std"].get<double>();
        for (const auto& e : doc.at("events")) {
            SceneEvent ev;
            ev.klass = e.at("class").get<int>();
            ev.onset_sec = e.at("onset_sec").get<double>();
            ev.offset_sec = e.at("offset_sec").get<double>();
            const std::string who = "event " + std::to_string(script.events.size());
            if (e.contains("doa_index")) {
                ev.doa_index = e["doa_index"].get<int>();
            } else {
                const double az = e.at("azimuth_deg").get<double>();
                const double el = e.at("elevation_deg").get<double>();
                const auto q = grid.from_angles(az, el);
                if (!q)
                    throw ValidationError(path + ": " + who + " direction (" + format_num(az) +
                                          ", " + format_num(el) + ") is not on the grid");
                ev.doa_index = *q;
            }
            if (e.contains("kind")) {
                const auto k = e["kind"].get<std::string>();
                if (k == "white_noise")
                    ev.kind = SourceKind::white_noise;
                else if (k == "tone")
                    ev.kind = SourceKind::tone;
                else if (k == "impulse_train")
                    ev.kind = SourceKind::impulse_train;
                else
                    throw ValidationError(path + ": " + who + " has unknown kind '" + k + "'");
            }
            if (e.contains("snr_db")) ev.snr_db = e["snr_db"].get<double>();
            if (e.contains("tone_hz")) ev.tone_hz = e["tone_hz"].get<double>();
            script.events.push_back(ev);
        }
        return script;
    } catch (const json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace seldpair
