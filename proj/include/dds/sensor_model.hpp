#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dds/errors.hpp"

namespace dds {

// Milliseconds since session epoch. Non-negative; non-decreasing within a stream.
using TimestampMs = std::int64_t;

enum class SensorKind : std::uint8_t {
    Accel = 1,
    Gyro = 2,
    HeartRate = 3,
    HeartBeat = 4,
    StepCount = 5,
    Location = 6,
    BloodPressure = 7,
    Spo2 = 8,
};

const char* kind_name(SensorKind kind);                    // wire/file name ("accel", "bp", ...)
std::optional<SensorKind> kind_from_name(const std::string& name);

struct AccelReading { double x, y, z; };                   // m/s^2
struct GyroReading { double wx, wy, wz; };                 // rad/s
struct HeartRateReading { double bpm; };
struct HeartBeatReading { double ibi_ms; };                // interval between successive beats
struct StepCountReading { std::int64_t cumulative; };      // monotone per source
struct LocationReading { double lat, lon, speed; };        // degrees, degrees, m/s
struct BloodPressureReading { double systolic, diastolic; };  // mmHg
struct Spo2Reading { double pct; };

using SensorPayload =
    std::variant<AccelReading, GyroReading, HeartRateReading, HeartBeatReading,
                 StepCountReading, LocationReading, BloodPressureReading, Spo2Reading>;

struct SensorSample {
    TimestampMs t_ms = 0;
    int source_id = 0;
    SensorPayload payload;

    SensorKind kind() const {
        return static_cast<SensorKind>(payload.index() + 1);
    }
};

// Accepted physiological bands. Blood pressure and the SpO2 healthy band are
// the measurement ranges the source device documents; heart-rate and IBI
// bands cover bradycardic athletes through tachycardia.
struct ValidationLimits {
    static constexpr double kSystolicLo = 70.0, kSystolicHi = 180.0;
    static constexpr double kDiastolicLo = 40.0, kDiastolicHi = 120.0;
    static constexpr double kSpo2Lo = 0.0, kSpo2Hi = 100.0;
    static constexpr double kSpo2HealthyLo = 95.0, kSpo2HealthyHi = 100.0;
    static constexpr double kHeartRateLo = 25.0, kHeartRateHi = 250.0;
    static constexpr double kIbiLoExclusive = 0.0, kIbiHi = 5000.0;
};

struct ValidatedSample {
    SensorSample sample;
    bool in_range = true;
    // Present only for SPO2 samples: true when pct is inside the 95-100 resting band.
    std::optional<bool> spo2_healthy;
};

// Checks the sample against the bands above. Out-of-range values raise
// RangeError; they are never clamped. Payloads pass through unmodified.
ValidatedSample validate_sample(const SensorSample& sample);

enum class LabelKind { Alert, Drowsy };

struct GroundTruthLabel {
    TimestampMs t_ms;
    LabelKind label;
};

struct SessionStream {
    std::vector<SensorSample> samples;
    std::vector<GroundTruthLabel> labels;  // present only for synthetic sessions
};

enum class Gender { Female, Male, Unspecified };
enum class Fitness { Sedentary, Active, Athlete };

struct DriverProfile {
    int age_years = 35;
    Gender gender = Gender::Unspecified;
    Fitness fitness = Fitness::Sedentary;

    void validate() const {
        if (age_years < 16 || age_years > 120)
            throw ConfigError("age_years must be in [16, 120]");
    }
};

// One sample as a replay-file JSON line (no trailing newline). The same
// serialization is used for link SAMPLE payloads.
std::string sample_to_json_line(const SensorSample& sample);
// Inverse; `line_no` is reported in ParseError.
SensorSample sample_from_json_line(const std::string& line, std::size_t line_no = 0);

std::string label_to_json_line(const GroundTruthLabel& label);

// Reads a JSON Lines replay file. Raises ParseError for malformed lines and
// OrderError when timestamps regress. Blank lines are not allowed.
SessionStream load_replay(const std::filesystem::path& path);

// K-way merge of individually time-ordered streams into one time-ordered
// stream. Equal timestamps keep the lower input-stream index first.
SessionStream merge_streams(const std::vector<SessionStream>& streams);

} // namespace dds
