#include "dds/sensor_model.hpp"

#include <fstream>
#include <queue>
#include <tuple>

#include "json.hpp"

namespace dds {

using nlohmann::json;

const char* kind_name(SensorKind kind) {
    switch (kind) {
        case SensorKind::Accel: return "accel";
        case SensorKind::Gyro: return "gyro";
        case SensorKind::HeartRate: return "hr";
        case SensorKind::HeartBeat: return "beat";
        case SensorKind::StepCount: return "steps";
        case SensorKind::Location: return "loc";
        case SensorKind::BloodPressure: return "bp";
        case SensorKind::Spo2: return "spo2";
    }
    return "?";
}

std::optional<SensorKind> kind_from_name(const std::string& name) {
    if (name == "accel") return SensorKind::Accel;
    if (name == "gyro") return SensorKind::Gyro;
    if (name == "hr") return SensorKind::HeartRate;
    if (name == "beat") return SensorKind::HeartBeat;
    if (name == "steps") return SensorKind::StepCount;
    if (name == "loc") return SensorKind::Location;
    if (name == "bp") return SensorKind::BloodPressure;
    if (name == "spo2") return SensorKind::Spo2;
    return std::nullopt;
}

namespace {

void check_range(const char* field, double value, double lo, double hi) {
    if (!(value >= lo && value <= hi)) throw RangeError(field, value, lo, hi);
}

} // namespace

ValidatedSample validate_sample(const SensorSample& sample) {
    ValidatedSample out{sample, true, std::nullopt};
    switch (sample.kind()) {
        case SensorKind::BloodPressure: {
            const auto& bp = std::get<BloodPressureReading>(sample.payload);
            check_range("systolic", bp.systolic, ValidationLimits::kSystolicLo,
                        ValidationLimits::kSystolicHi);
            check_range("diastolic", bp.diastolic, ValidationLimits::kDiastolicLo,
                        ValidationLimits::kDiastolicHi);
            break;
        }
        case SensorKind::Spo2: {
            const auto& s = std::get<Spo2Reading>(sample.payload);
            check_range("spo2_pct", s.pct, ValidationLimits::kSpo2Lo, ValidationLimits::kSpo2Hi);
            out.spo2_healthy = s.pct >= ValidationLimits::kSpo2HealthyLo &&
                               s.pct <= ValidationLimits::kSpo2HealthyHi;
            break;
        }
        case SensorKind::HeartRate: {
            const auto& hr = std::get<HeartRateReading>(sample.payload);
            check_range("bpm", hr.bpm, ValidationLimits::kHeartRateLo,
                        ValidationLimits::kHeartRateHi);
            break;
        }
        case SensorKind::HeartBeat: {
            const auto& b = std::get<HeartBeatReading>(sample.payload);
            if (!(b.ibi_ms > ValidationLimits::kIbiLoExclusive &&
                  b.ibi_ms <= ValidationLimits::kIbiHi))
                throw RangeError("ibi_ms", b.ibi_ms, ValidationLimits::kIbiLoExclusive,
                                 ValidationLimits::kIbiHi);
            break;
        }
        case SensorKind::Location: {
            const auto& loc = std::get<LocationReading>(sample.payload);
            check_range("lat", loc.lat, -90.0, 90.0);
            check_range("lon", loc.lon, -180.0, 180.0);
            if (loc.speed < 0.0) throw RangeError("speed", loc.speed, 0.0, 1e9);
            break;
        }
        default:
            break;  // accel/gyro/steps carry no per-sample band
    }
    return out;
}

std::string sample_to_json_line(const SensorSample& sample) {
    json j;
    j["t_ms"] = sample.t_ms;
    j["src"] = sample.source_id;
    j["kind"] = kind_name(sample.kind());
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, AccelReading>) {
                j["x"] = p.x; j["y"] = p.y; j["z"] = p.z;
            } else if constexpr (std::is_same_v<T, GyroReading>) {
                j["wx"] = p.wx; j["wy"] = p.wy; j["wz"] = p.wz;
            } else if constexpr (std::is_same_v<T, HeartRateReading>) {
                j["bpm"] = p.bpm;
            } else if constexpr (std::is_same_v<T, HeartBeatReading>) {
                j["ibi_ms"] = p.ibi_ms;
            } else if constexpr (std::is_same_v<T, StepCountReading>) {
                j["cumulative"] = p.cumulative;
            } else if constexpr (std::is_same_v<T, LocationReading>) {
                j["lat"] = p.lat; j["lon"] = p.lon; j["speed"] = p.speed;
            } else if constexpr (std::is_same_v<T, BloodPressureReading>) {
                j["systolic"] = p.systolic; j["diastolic"] = p.diastolic;
            } else if constexpr (std::is_same_v<T, Spo2Reading>) {
                j["pct"] = p.pct;
            }
        },
        sample.payload);
    return j.dump();
}

namespace {

double need_number(const json& j, const char* field, std::size_t line_no) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_number())
        throw ParseError(line_no, std::string("missing or non-numeric field '") + field + "'");
    return it->get<double>();
}

std::int64_t need_integer(const json& j, const char* field, std::size_t line_no) {
    auto it = j.find(field);
    if (it == j.end() || !it->is_number_integer())
        throw ParseError(line_no, std::string("missing or non-integer field '") + field + "'");
    return it->get<std::int64_t>();
}

} // namespace

SensorSample sample_from_json_line(const std::string& line, std::size_t line_no) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError(line_no, "not a JSON object");

    SensorSample s;
    s.t_ms = need_integer(j, "t_ms", line_no);
    if (s.t_ms < 0) throw ParseError(line_no, "t_ms must be non-negative");
    s.source_id = static_cast<int>(need_integer(j, "src", line_no));

    auto kind_it = j.find("kind");
    if (kind_it == j.end() || !kind_it->is_string())
        throw ParseError(line_no, "missing or non-string field 'kind'");
    auto kind = kind_from_name(kind_it->get<std::string>());
    if (!kind) throw ParseError(line_no, "unknown kind '" + kind_it->get<std::string>() + "'");

    switch (*kind) {
        case SensorKind::Accel:
            s.payload = AccelReading{need_number(j, "x", line_no), need_number(j, "y", line_no),
                                     need_number(j, "z", line_no)};
            break;
        case SensorKind::Gyro:
            s.payload = GyroReading{need_number(j, "wx", line_no), need_number(j, "wy", line_no),
                                    need_number(j, "wz", line_no)};
            break;
        case SensorKind::HeartRate:
            s.payload = HeartRateReading{need_number(j, "bpm", line_no)};
            break;
        case SensorKind::HeartBeat:
            s.payload = HeartBeatReading{need_number(j, "ibi_ms", line_no)};
            break;
        case SensorKind::StepCount:
            s.payload = StepCountReading{need_integer(j, "cumulative", line_no)};
            break;
        case SensorKind::Location:
            s.payload = LocationReading{need_number(j, "lat", line_no),
                                        need_number(j, "lon", line_no),
                                        need_number(j, "speed", line_no)};
            break;
        case SensorKind::BloodPressure:
            s.payload = BloodPressureReading{need_number(j, "systolic", line_no),
                                             need_number(j, "diastolic", line_no)};
            break;
        case SensorKind::Spo2:
            s.payload = Spo2Reading{need_number(j, "pct", line_no)};
            break;
    }
    return s;
}

std::string label_to_json_line(const GroundTruthLabel& label) {
    json j;
    j["t_ms"] = label.t_ms;
    j["label"] = label.label == LabelKind::Alert ? "ALERT" : "DROWSY";
    return j.dump();
}

SessionStream load_replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file: " + path.string());

    SessionStream stream;
    std::string line;
    std::size_t line_no = 0;
    TimestampMs prev = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        SensorSample s = sample_from_json_line(line, line_no);
        if (s.t_ms < prev) throw OrderError(line_no);
        prev = s.t_ms;
        stream.samples.push_back(std::move(s));
    }
    return stream;
}

SessionStream merge_streams(const std::vector<SessionStream>& streams) {
    // (t, stream index, position) priority; stream index breaks ties.
    using Key = std::tuple<TimestampMs, std::size_t, std::size_t>;
    auto cmp = [](const Key& a, const Key& b) { return a > b; };
    std::priority_queue<Key, std::vector<Key>, decltype(cmp)> heap(cmp);

    std::size_t total = 0;
    for (std::size_t i = 0; i < streams.size(); ++i) {
        total += streams[i].samples.size();
        if (!streams[i].samples.empty()) heap.push({streams[i].samples[0].t_ms, i, 0});
    }

    SessionStream out;
    out.samples.reserve(total);
    while (!heap.empty()) {
        auto [t, si, pos] = heap.top();
        heap.pop();
        out.samples.push_back(streams[si].samples[pos]);
        if (pos + 1 < streams[si].samples.size())
            heap.push({streams[si].samples[pos + 1].t_ms, si, pos + 1});
    }
    for (const auto& s : streams)
        out.labels.insert(out.labels.end(), s.labels.begin(), s.labels.end());
    return out;
}

} // namespace dds
