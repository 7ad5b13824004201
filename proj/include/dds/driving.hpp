#pragma once

#include <deque>
#include <optional>
#include <string>

#include "dds/sensor_model.hpp"

namespace dds {

enum class DrivingState { Idle, Driving, Stopped };

const char* driving_state_name(DrivingState s);

struct DetectorConfig {
    double speed_on_mps = 4.0;     // sustained speed that starts a drive
    double sustain_on_s = 60.0;
    double speed_off_mps = 1.0;    // sustained speed that ends one
    double sustain_off_s = 120.0;
    double max_cadence_spm = 10.0; // step cadence above this blocks/exits driving

    void validate() const;
};

struct TransitionEvent {
    TimestampMs t_ms = 0;
    DrivingState from = DrivingState::Idle;
    DrivingState to = DrivingState::Idle;
    std::string trigger;
};

// Single-writer state machine over a time-ordered sample stream.
//   IDLE -> DRIVING    speed >= speed_on for sustain_on_s and cadence <= max
//   DRIVING -> STOPPED speed < speed_off for sustain_off_s
//   STOPPED -> DRIVING the on-condition recurs
//   STOPPED -> IDLE    cadence exceeds max (wearer walked away)
// A gap longer than 3 s between location fixes resets both sustain timers;
// unknown speed must not count as evidence. Accelerometer and gyroscope
// samples are accepted but do not influence transitions.
class DrivingDetector {
public:
    explicit DrivingDetector(DetectorConfig config = {});

    // Feeds one sample; returns the transition it caused, if any.
    std::optional<TransitionEvent> update(const SensorSample& sample);

    DrivingState state() const { return state_; }

private:
    static constexpr std::int64_t kMaxLocationGapMs = 3000;

    std::optional<TransitionEvent> on_location(const SensorSample& sample);
    std::optional<TransitionEvent> on_steps(const SensorSample& sample);
    TransitionEvent transition(TimestampMs t, DrivingState to, std::string trigger);

    // Step cadence (steps/min) over the trailing sustain_on window.
    double cadence_spm(TimestampMs now) const;

    DetectorConfig cfg_;
    DrivingState state_ = DrivingState::Idle;
    TimestampMs last_t_ = -1;
    TimestampMs last_loc_t_ = -1;
    TimestampMs on_streak_start_ = -1;   // first fix of the current >= speed_on run
    TimestampMs off_streak_start_ = -1;  // first fix of the current < speed_off run
    std::deque<std::pair<TimestampMs, std::int64_t>> steps_;
};

std::string transition_to_json_line(const TransitionEvent& event);

} // namespace dds
