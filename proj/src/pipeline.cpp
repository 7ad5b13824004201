#include "dds/pipeline.hpp"

#include <deque>
#include <fstream>

#include "json.hpp"

namespace dds {

LocalTime local_time_at(int start_minute_of_day, TimestampMs t_ms) {
    const std::int64_t minute = (start_minute_of_day + t_ms / 60000) % 1440;
    return LocalTime{static_cast<int>(minute / 60), static_cast<int>(minute % 60)};
}

int parse_start_time(const std::string& hhmm) {
    if (hhmm.size() != 5 || hhmm[2] != ':' || !std::isdigit(hhmm[0]) || !std::isdigit(hhmm[1]) ||
        !std::isdigit(hhmm[3]) || !std::isdigit(hhmm[4]))
        throw ConfigError("start time must be HH:MM");
    const int h = (hhmm[0] - '0') * 10 + (hhmm[1] - '0');
    const int m = (hhmm[3] - '0') * 10 + (hhmm[4] - '0');
    if (h > 23 || m > 59) throw ConfigError("start time must be HH:MM");
    return h * 60 + m;
}

namespace {

// Streaming counterpart of clean_ibi: same band and 20%-jump rule against the
// previously retained interval.
class IbiCleaner {
public:
    std::optional<IbiPoint> accept(const IbiPoint& p) {
        if (p.ibi_ms < 300.0 || p.ibi_ms > 2000.0) return std::nullopt;
        if (prev_kept_ > 0.0 && std::abs(p.ibi_ms - prev_kept_) > 0.20 * prev_kept_)
            return std::nullopt;
        prev_kept_ = p.ibi_ms;
        return p;
    }

private:
    double prev_kept_ = -1.0;
};

} // namespace

PipelineResult run_pipeline(const SessionStream& stream, const PipelineOptions& options) {
    DrivingDetector detector(options.detector);
    DrowsinessEngine engine(options.mode, options.engine, options.baseline);

    PipelineResult result;
    IbiCleaner cleaner;
    std::deque<IbiPoint> window;
    Vitals pending;  // fresh vitals not yet handed to the engine

    const auto window_ms = static_cast<std::int64_t>(options.feature_window_s * 1000.0);
    const auto hop_ms = static_cast<std::int64_t>(options.feature_hop_s * 1000.0);
    TimestampMs next_hop = hop_ms;

    auto run_hop = [&](TimestampMs t_hop) {
        while (!window.empty() && window.front().t_ms <= t_hop - window_ms) window.pop_front();
        if (detector.state() != DrivingState::Driving) return;
        if (window.size() < 2) return;

        IbiSeries series(window.begin(), window.end());
        HrvFeatures features = hrv_features(series);
        auto events = engine.ingest(t_hop, features, pending,
                                    local_time_at(options.start_minute_of_day, t_hop));
        pending = Vitals{};
        ++result.feature_windows;
        for (auto& ev : events)
            if (auto* alert = std::get_if<AlertEvent>(&ev)) result.alerts.push_back(*alert);
    };

    for (const SensorSample& sample : stream.samples) {
        while (sample.t_ms >= next_hop) {
            run_hop(next_hop);
            next_hop += hop_ms;
        }

        ++result.samples;
        try {
            validate_sample(sample);
        } catch (const RangeError&) {
            ++result.invalid_samples;
            continue;
        }

        if (auto transition = detector.update(sample)) result.transitions.push_back(*transition);

        switch (sample.kind()) {
            case SensorKind::HeartBeat: {
                const auto& b = std::get<HeartBeatReading>(sample.payload);
                if (auto kept = cleaner.accept({sample.t_ms, b.ibi_ms})) window.push_back(*kept);
                break;
            }
            case SensorKind::BloodPressure: {
                const auto& bp = std::get<BloodPressureReading>(sample.payload);
                pending.bp = BpPair{bp.systolic, bp.diastolic};
                break;
            }
            case SensorKind::Spo2:
                pending.spo2_pct = std::get<Spo2Reading>(sample.payload).pct;
                break;
            default:
                break;
        }
    }
    return result;
}

std::string RunReport::to_json() const {
    nlohmann::json j;
    j["session_id"] = session_id;
    j["mode"] = mode;
    j["counts"] = {{"samples", samples},
                   {"transitions", transitions},
                   {"feature_windows", feature_windows},
                   {"alerts", alerts}};
    j["outputs"] = outputs;
    return j.dump(2);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

} // namespace

std::string baseline_to_json(const Baseline& baseline) {
    nlohmann::json j;
    j["resting_hr_bpm"] = baseline.resting_hr_bpm;
    j["resting_rmssd_ms"] = baseline.resting_rmssd_ms;
    j["resting_sdnn_ms"] = baseline.resting_sdnn_ms;
    if (baseline.resting_bp)
        j["resting_bp"] = {{"systolic", baseline.resting_bp->systolic},
                           {"diastolic", baseline.resting_bp->diastolic}};
    j["provenance"] =
        baseline.provenance == BaselineProvenance::Measured ? "MEASURED" : "POPULATION_DEFAULT";
    return j.dump();
}

Baseline baseline_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(0, "malformed baseline json");
    try {
        Baseline b;
        b.resting_hr_bpm = j.at("resting_hr_bpm").get<double>();
        b.resting_rmssd_ms = j.at("resting_rmssd_ms").get<double>();
        b.resting_sdnn_ms = j.at("resting_sdnn_ms").get<double>();
        if (j.contains("resting_bp"))
            b.resting_bp = BpPair{j["resting_bp"].at("systolic").get<double>(),
                                  j["resting_bp"].at("diastolic").get<double>()};
        b.provenance = j.at("provenance").get<std::string>() == "MEASURED"
                           ? BaselineProvenance::Measured
                           : BaselineProvenance::PopulationDefault;
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("malformed baseline json: ") + e.what());
    }
}

RunReport write_session_outputs(const std::filesystem::path& out_dir,
                                const std::string& session_id, const std::string& mode_name,
                                const SessionStream& stream, const PipelineResult& result) {
    std::filesystem::create_directories(out_dir);

    RunReport report;
    report.session_id = session_id;
    report.mode = mode_name;
    report.samples = result.samples;
    report.transitions = result.transitions.size();
    report.feature_windows = result.feature_windows;
    report.alerts = result.alerts.size();

    // Outputs are recorded by file name so reports are byte-identical across
    // runs regardless of the output directory.
    {
        auto out = open_out(out_dir / "session.jsonl");
        for (const auto& s : stream.samples) out << sample_to_json_line(s) << '\n';
        report.outputs["session"] = "session.jsonl";
    }
    if (!stream.labels.empty()) {
        auto out = open_out(out_dir / "labels.jsonl");
        for (const auto& l : stream.labels) out << label_to_json_line(l) << '\n';
        report.outputs["labels"] = "labels.jsonl";
    }
    {
        auto out = open_out(out_dir / "transitions.jsonl");
        for (const auto& t : result.transitions) out << transition_to_json_line(t) << '\n';
        report.outputs["transitions"] = "transitions.jsonl";
    }
    {
        auto out = open_out(out_dir / "alerts.jsonl");
        for (const auto& a : result.alerts) out << alert_to_json_line(a) << '\n';
        report.outputs["alerts"] = "alerts.jsonl";
    }
    {
        auto out = open_out(out_dir / "report.json");
        out << report.to_json() << '\n';
        report.outputs["report"] = "report.json";
    }
    return report;
}

} // namespace dds
