#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dds/driving.hpp"
#include "dds/engine.hpp"
#include "dds/hrv.hpp"
#include "dds/sensor_model.hpp"

namespace dds {

struct PipelineOptions {
    EngineMode mode = EngineMode::Unsupervised;
    std::optional<Baseline> baseline;  // required for CALIBRATED
    DetectorConfig detector;
    EngineConfig engine;
    // Session wall-clock start, minutes after midnight. Sessions default to an
    // overnight drive beginning at 02:30.
    int start_minute_of_day = 150;
    double feature_window_s = 30.0;
    double feature_hop_s = 5.0;
};

struct PipelineResult {
    std::vector<TransitionEvent> transitions;
    std::vector<AlertEvent> alerts;
    std::size_t samples = 0;
    std::size_t feature_windows = 0;  // windows actually scored
    std::size_t invalid_samples = 0;  // rejected by range validation
};

LocalTime local_time_at(int start_minute_of_day, TimestampMs t_ms);
int parse_start_time(const std::string& hhmm);  // "02:30" -> 150

// Runs a session stream through driving detection and, while driving, through
// windowed HRV scoring. The engine is frozen whenever the wearer is not
// driving.
PipelineResult run_pipeline(const SessionStream& stream, const PipelineOptions& options);

struct RunReport {
    std::string session_id;
    std::string mode;
    std::size_t samples = 0;
    std::size_t transitions = 0;
    std::size_t feature_windows = 0;
    std::size_t alerts = 0;
    std::map<std::string, std::string> outputs;  // logical name -> path

    std::string to_json() const;
};

// Writes session.jsonl, transitions.jsonl, alerts.jsonl, report.json (and
// labels.jsonl when the stream carries ground truth) into out_dir.
RunReport write_session_outputs(const std::filesystem::path& out_dir,
                                const std::string& session_id, const std::string& mode_name,
                                const SessionStream& stream, const PipelineResult& result);

// Baseline serialization for the encrypted preference store.
std::string baseline_to_json(const Baseline& baseline);
Baseline baseline_from_json(const std::string& text);

} // namespace dds
