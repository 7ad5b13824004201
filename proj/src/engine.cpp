#include "dds/engine.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace dds {

const char* engine_state_name(EngineState s) {
    switch (s) {
        case EngineState::Warmup: return "WARMUP";
        case EngineState::Monitoring: return "MONITORING";
        case EngineState::Alerting: return "ALERTING";
    }
    return "?";
}

void EngineConfig::validate() const {
    if (std::abs(w_hr + w_rmssd + w_bp - 1.0) > 1e-9)
        throw ConfigError("weights must sum to 1");
    if (w_hr < 0.0 || w_rmssd < 0.0 || w_bp < 0.0) throw ConfigError("weights must be non-negative");
    if (!(off_threshold < on_threshold)) throw ConfigError("off_threshold must be below on_threshold");
    if (on_dwell_s <= 0.0 || rearm_dwell_s <= 0.0) throw ConfigError("dwell times must be positive");
    if (reference_window_s <= 0.0 || min_reference_ibi_s <= 0.0)
        throw ConfigError("reference windows must be positive");
    if (!(hr_drop_lo < hr_drop_hi) || !(bp_drop_lo < bp_drop_hi))
        throw ConfigError("drop bands must be non-empty");
}

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

} // namespace

DrowsinessScore score_components(double hr_now_bpm, double hr_ref_bpm, double rmssd_now_ms,
                                 double rmssd_ref_ms, const std::optional<BpPair>& bp_now,
                                 const std::optional<BpPair>& bp_ref, double circadian,
                                 const EngineConfig& cfg) {
    DrowsinessScore s;
    s.circadian = circadian;

    const double hr_decline = (hr_ref_bpm - hr_now_bpm) / hr_ref_bpm;
    s.hr_drop = clamp01((hr_decline - cfg.hr_drop_lo) / (cfg.hr_drop_hi - cfg.hr_drop_lo));
    s.rmssd_rise = clamp01((rmssd_now_ms - rmssd_ref_ms) / rmssd_ref_ms);

    double w_hr = cfg.w_hr, w_rmssd = cfg.w_rmssd, w_bp = cfg.w_bp;
    const bool have_bp = bp_now.has_value() && bp_ref.has_value();
    if (have_bp) {
        const double bp_decline = (bp_ref->systolic - bp_now->systolic) / bp_ref->systolic;
        s.bp_drop = clamp01((bp_decline - cfg.bp_drop_lo) / (cfg.bp_drop_hi - cfg.bp_drop_lo));
    } else {
        const double remaining = w_hr + w_rmssd;
        w_hr /= remaining;
        w_rmssd /= remaining;
        w_bp = 0.0;
    }

    const double weighted = w_hr * s.hr_drop + w_rmssd * s.rmssd_rise + w_bp * s.bp_drop;
    s.value = clamp01(circadian * weighted);
    return s;
}

DrowsinessEngine::DrowsinessEngine(EngineMode mode, EngineConfig config,
                                   std::optional<Baseline> baseline)
    : mode_(mode), cfg_(config), baseline_(std::move(baseline)) {
    cfg_.validate();
    if (mode_ == EngineMode::Calibrated) {
        if (!baseline_ || baseline_->provenance != BaselineProvenance::Measured)
            throw ModeError("CALIBRATED requires a MEASURED baseline");
    }
}

void DrowsinessEngine::accumulate_reference(TimestampMs t_ms, const HrvFeatures& features,
                                            const Vitals& vitals) {
    if (ref_start_ms_ < 0) ref_start_ms_ = t_ms;
    const auto window_ms = static_cast<std::int64_t>(cfg_.reference_window_s * 1000.0);
    if (t_ms - ref_start_ms_ > window_ms) return;  // reference frozen

    ref_hr_.push_back(features.mean_hr_bpm);
    ref_rmssd_.push_back(features.rmssd_ms);
    if (vitals.bp) {
        ref_sys_.push_back(vitals.bp->systolic);
        ref_dia_.push_back(vitals.bp->diastolic);
    }

    // IBI coverage: wall-clock time spanned by feature windows, counted once.
    const TimestampMs begin = std::max(features.window_start_ms, covered_until_ms_);
    if (features.window_end_ms > begin) {
        ibi_coverage_ms_ += features.window_end_ms - begin;
        covered_until_ms_ = features.window_end_ms;
    }
}

void DrowsinessEngine::current_reference(double& hr_ref, double& rmssd_ref,
                                         std::optional<BpPair>& bp_ref) const {
    if (mode_ == EngineMode::Calibrated) {
        hr_ref = baseline_->resting_hr_bpm;
        rmssd_ref = baseline_->resting_rmssd_ms;
        bp_ref = baseline_->resting_bp;
        return;
    }
    hr_ref = median_of(ref_hr_);
    rmssd_ref = median_of(ref_rmssd_);
    if (!ref_sys_.empty()) bp_ref = BpPair{median_of(ref_sys_), median_of(ref_dia_)};
}

std::vector<EngineEvent> DrowsinessEngine::ingest(TimestampMs t_ms, const HrvFeatures& features,
                                                  const Vitals& vitals, LocalTime local_time) {
    if (t_ms < last_t_) throw OrderError(t_ms, last_t_);
    last_t_ = t_ms;

    std::vector<EngineEvent> events;
    if (vitals.bp) latest_bp_ = vitals.bp;

    if (mode_ == EngineMode::Unsupervised) accumulate_reference(t_ms, features, vitals);

    if (state_ == EngineState::Warmup) {
        const bool ready =
            mode_ == EngineMode::Calibrated ||
            ibi_coverage_ms_ >= static_cast<std::int64_t>(cfg_.min_reference_ibi_s * 1000.0);
        if (!ready) return events;
        events.push_back(EngineTransition{t_ms, EngineState::Warmup, EngineState::Monitoring});
        state_ = EngineState::Monitoring;
    }

    double hr_ref = 0.0, rmssd_ref = 0.0;
    std::optional<BpPair> bp_ref;
    current_reference(hr_ref, rmssd_ref, bp_ref);
    if (hr_ref <= 0.0 || rmssd_ref <= 0.0) return events;

    DrowsinessScore score = score_components(features.mean_hr_bpm, hr_ref, features.rmssd_ms,
                                             rmssd_ref, latest_bp_, bp_ref,
                                             circadian_risk(local_time), cfg_);
    score.t_ms = t_ms;
    last_score_ = score;

    if (state_ == EngineState::Monitoring) {
        if (score.value >= cfg_.on_threshold) {
            if (above_since_ms_ < 0) above_since_ms_ = t_ms;
            if (t_ms - above_since_ms_ >= static_cast<std::int64_t>(cfg_.on_dwell_s * 1000.0)) {
                char buf[96];
                std::snprintf(buf, sizeof(buf), "score %.2f >= %.2f for %.0f s", score.value,
                              cfg_.on_threshold, cfg_.on_dwell_s);
                events.push_back(AlertEvent{t_ms, AlertChannel::Vibration, score, buf});
                events.push_back(
                    EngineTransition{t_ms, EngineState::Monitoring, EngineState::Alerting});
                state_ = EngineState::Alerting;
                above_since_ms_ = -1;
                calm_since_ms_ = -1;
            }
        } else {
            above_since_ms_ = -1;
        }
    } else if (state_ == EngineState::Alerting) {
        if (score.value < cfg_.off_threshold) {
            if (calm_since_ms_ < 0) calm_since_ms_ = t_ms;
            if (t_ms - calm_since_ms_ >= static_cast<std::int64_t>(cfg_.rearm_dwell_s * 1000.0)) {
                events.push_back(
                    EngineTransition{t_ms, EngineState::Alerting, EngineState::Monitoring});
                state_ = EngineState::Monitoring;
                calm_since_ms_ = -1;
                above_since_ms_ = -1;
            }
        } else {
            calm_since_ms_ = -1;
        }
    }
    return events;
}

std::string alert_to_json_line(const AlertEvent& event) {
    nlohmann::json j;
    j["t_ms"] = event.t_ms;
    j["channel"] = "VIBRATION";
    j["value"] = event.score.value;
    j["hr_drop"] = event.score.hr_drop;
    j["rmssd_rise"] = event.score.rmssd_rise;
    j["bp_drop"] = event.score.bp_drop;
    j["circadian"] = event.score.circadian;
    j["reason"] = event.reason;
    return j.dump();
}

} // namespace dds
