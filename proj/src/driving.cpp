#include "dds/driving.hpp"

#include <cmath>

#include "json.hpp"

namespace dds {

const char* driving_state_name(DrivingState s) {
    switch (s) {
        case DrivingState::Idle: return "IDLE";
        case DrivingState::Driving: return "DRIVING";
        case DrivingState::Stopped: return "STOPPED";
    }
    return "?";
}

void DetectorConfig::validate() const {
    if (!(speed_off_mps < speed_on_mps))
        throw ConfigError("speed_off must be below speed_on");
    if (speed_on_mps <= 0.0) throw ConfigError("speed_on must be positive");
    if (sustain_on_s <= 0.0) throw ConfigError("sustain_on_s must be positive");
    if (sustain_off_s <= 0.0) throw ConfigError("sustain_off_s must be positive");
    if (max_cadence_spm < 0.0) throw ConfigError("max_cadence must be non-negative");
}

DrivingDetector::DrivingDetector(DetectorConfig config) : cfg_(config) {
    cfg_.validate();
}

TransitionEvent DrivingDetector::transition(TimestampMs t, DrivingState to, std::string trigger) {
    TransitionEvent ev{t, state_, to, std::move(trigger)};
    state_ = to;
    on_streak_start_ = -1;
    off_streak_start_ = -1;
    return ev;
}

double DrivingDetector::cadence_spm(TimestampMs now) const {
    if (steps_.size() < 2) return 0.0;
    const auto& base = steps_.front();
    const auto& last = steps_.back();
    const double span_ms = static_cast<double>(last.first - base.first);
    if (span_ms <= 0.0) return 0.0;
    const double steps = static_cast<double>(std::max<std::int64_t>(0, last.second - base.second));
    (void)now;
    return steps * 60000.0 / span_ms;
}

std::optional<TransitionEvent> DrivingDetector::on_location(const SensorSample& sample) {
    const auto& loc = std::get<LocationReading>(sample.payload);
    const TimestampMs t = sample.t_ms;

    if (last_loc_t_ >= 0 && t - last_loc_t_ > kMaxLocationGapMs) {
        on_streak_start_ = -1;
        off_streak_start_ = -1;
    }
    last_loc_t_ = t;

    if (loc.speed >= cfg_.speed_on_mps) {
        if (on_streak_start_ < 0) on_streak_start_ = t;
    } else {
        on_streak_start_ = -1;
    }
    if (loc.speed < cfg_.speed_off_mps) {
        if (off_streak_start_ < 0) off_streak_start_ = t;
    } else {
        off_streak_start_ = -1;
    }

    const auto sustain_on_ms = static_cast<std::int64_t>(cfg_.sustain_on_s * 1000.0);
    const auto sustain_off_ms = static_cast<std::int64_t>(cfg_.sustain_off_s * 1000.0);

    if (state_ == DrivingState::Idle || state_ == DrivingState::Stopped) {
        if (on_streak_start_ >= 0 && t - on_streak_start_ >= sustain_on_ms &&
            cadence_spm(t) <= cfg_.max_cadence_spm) {
            char buf[96];
            std::snprintf(buf, sizeof(buf), "speed>=%.1f m/s for %.0f s, cadence<=%.0f/min",
                          cfg_.speed_on_mps, cfg_.sustain_on_s, cfg_.max_cadence_spm);
            return transition(t, DrivingState::Driving, buf);
        }
    } else if (state_ == DrivingState::Driving) {
        if (off_streak_start_ >= 0 && t - off_streak_start_ >= sustain_off_ms) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "speed<%.1f m/s for %.0f s", cfg_.speed_off_mps,
                          cfg_.sustain_off_s);
            return transition(t, DrivingState::Stopped, buf);
        }
    }
    return std::nullopt;
}

std::optional<TransitionEvent> DrivingDetector::on_steps(const SensorSample& sample) {
    const auto& sc = std::get<StepCountReading>(sample.payload);
    const TimestampMs t = sample.t_ms;
    steps_.emplace_back(t, sc.cumulative);

    // Keep exactly one entry at or before the window start as the baseline.
    const auto window_ms = static_cast<std::int64_t>(cfg_.sustain_on_s * 1000.0);
    while (steps_.size() >= 2 && steps_[1].first <= t - window_ms) steps_.pop_front();

    if (state_ == DrivingState::Stopped) {
        const double cadence = cadence_spm(t);
        if (cadence > cfg_.max_cadence_spm) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "cadence %.1f/min > %.0f/min", cadence,
                          cfg_.max_cadence_spm);
            return transition(t, DrivingState::Idle, buf);
        }
    }
    return std::nullopt;
}

std::optional<TransitionEvent> DrivingDetector::update(const SensorSample& sample) {
    if (sample.t_ms < last_t_) throw OrderError(sample.t_ms, last_t_);
    last_t_ = sample.t_ms;

    switch (sample.kind()) {
        case SensorKind::Location:
            return on_location(sample);
        case SensorKind::StepCount:
            return on_steps(sample);
        default:
            return std::nullopt;  // motion and vitals do not drive transitions
    }
}

std::string transition_to_json_line(const TransitionEvent& event) {
    nlohmann::json j;
    j["t_ms"] = event.t_ms;
    j["from"] = driving_state_name(event.from);
    j["to"] = driving_state_name(event.to);
    j["trigger"] = event.trigger;
    return j.dump();
}

} // namespace dds
