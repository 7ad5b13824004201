#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dds/hrv.hpp"

namespace dds {

enum class EngineMode { Unsupervised, Calibrated };
enum class EngineState { Warmup, Monitoring, Alerting };
enum class AlertChannel { Vibration };

const char* engine_state_name(EngineState s);

struct EngineConfig {
    double w_hr = 0.4;
    double w_rmssd = 0.3;
    double w_bp = 0.3;
    double on_threshold = 0.7;
    double on_dwell_s = 30.0;
    double off_threshold = 0.5;
    double rearm_dwell_s = 60.0;
    double reference_window_s = 300.0;   // unsupervised reference accumulation span
    double min_reference_ibi_s = 120.0;  // IBI coverage required to leave WARMUP
    double hr_drop_lo = 0.05, hr_drop_hi = 0.15;
    double bp_drop_lo = 0.05, bp_drop_hi = 0.16;

    void validate() const;
};

struct DrowsinessScore {
    TimestampMs t_ms = 0;
    double value = 0.0;  // clamp(circadian * (w_hr*hr_drop + w_rmssd*rmssd_rise + w_bp*bp_drop), 0, 1)
    double hr_drop = 0.0;
    double rmssd_rise = 0.0;
    double bp_drop = 0.0;
    double circadian = 1.0;
};

struct AlertEvent {
    TimestampMs t_ms = 0;
    AlertChannel channel = AlertChannel::Vibration;
    DrowsinessScore score;
    std::string reason;
};

struct EngineTransition {
    TimestampMs t_ms = 0;
    EngineState from = EngineState::Warmup;
    EngineState to = EngineState::Warmup;
};

using EngineEvent = std::variant<EngineTransition, AlertEvent>;

// Fresh vitals that arrived since the previous ingest. SpO2 is carried for
// logging only; it never enters the score.
struct Vitals {
    std::optional<BpPair> bp;
    std::optional<double> spo2_pct;
};

// Normalized evidence components against a reference:
//   hr_drop    relative HR decline mapped linearly from the drop band onto [0,1]
//   bp_drop    same over the systolic drop band
//   rmssd_rise relative RMSSD increase, clamped to [0,1]
// When no blood pressure is available its weight is redistributed
// proportionally over the remaining components.
DrowsinessScore score_components(double hr_now_bpm, double hr_ref_bpm, double rmssd_now_ms,
                                 double rmssd_ref_ms, const std::optional<BpPair>& bp_now,
                                 const std::optional<BpPair>& bp_ref, double circadian,
                                 const EngineConfig& cfg = {});

// Monitor -> detect -> alert -> continue loop with hysteresis. One ingester
// at a time; the caller gates ingestion on the driving detector.
//
// UNSUPERVISED mode accumulates the first reference_window_s of feature
// windows and scores against their running median (frozen after the window);
// WARMUP ends once min_reference_ibi_s of IBI time has been covered.
// CALIBRATED mode scores against a measured baseline from the first window.
class DrowsinessEngine {
public:
    DrowsinessEngine(EngineMode mode, EngineConfig config = {},
                     std::optional<Baseline> baseline = std::nullopt);

    std::vector<EngineEvent> ingest(TimestampMs t_ms, const HrvFeatures& features,
                                    const Vitals& vitals, LocalTime local_time);

    EngineState state() const { return state_; }
    EngineMode mode() const { return mode_; }
    const std::optional<DrowsinessScore>& last_score() const { return last_score_; }

private:
    void accumulate_reference(TimestampMs t_ms, const HrvFeatures& features, const Vitals& vitals);
    void current_reference(double& hr_ref, double& rmssd_ref, std::optional<BpPair>& bp_ref) const;

    EngineMode mode_;
    EngineConfig cfg_;
    std::optional<Baseline> baseline_;
    EngineState state_ = EngineState::Warmup;
    TimestampMs last_t_ = -1;

    // Unsupervised reference accumulation.
    std::vector<double> ref_hr_, ref_rmssd_, ref_sys_, ref_dia_;
    TimestampMs ref_start_ms_ = -1;
    TimestampMs covered_until_ms_ = -1;
    std::int64_t ibi_coverage_ms_ = 0;

    std::optional<BpPair> latest_bp_;
    std::optional<DrowsinessScore> last_score_;
    TimestampMs above_since_ms_ = -1;  // on-threshold streak start
    TimestampMs calm_since_ms_ = -1;   // off-threshold streak start while alerting
};

std::string alert_to_json_line(const AlertEvent& event);

} // namespace dds
