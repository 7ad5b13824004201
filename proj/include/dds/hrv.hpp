#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dds/errors.hpp"
#include "dds/sensor_model.hpp"

namespace dds {

struct IbiPoint {
    TimestampMs t_ms;
    double ibi_ms;
};

using IbiSeries = std::vector<IbiPoint>;

// Windowed time-domain HRV metrics.
//   mean_hr_bpm  60000 / mean(ibi)
//   sdnn_ms      population standard deviation of the IBIs (divide by n)
//   rmssd_ms     root mean square of successive IBI differences
//   pnn50        fraction of successive |differences| strictly greater than 50 ms
struct HrvFeatures {
    TimestampMs window_start_ms = 0;
    TimestampMs window_end_ms = 0;
    std::size_t n_intervals = 0;
    double mean_hr_bpm = 0.0;
    double sdnn_ms = 0.0;
    double rmssd_ms = 0.0;
    double pnn50 = 0.0;
};

struct BpPair {
    double systolic;
    double diastolic;
};

enum class BaselineProvenance { Measured, PopulationDefault };

// Personalized resting reference the scoring compares against.
struct Baseline {
    double resting_hr_bpm = 0.0;
    double resting_rmssd_ms = 0.0;
    double resting_sdnn_ms = 0.0;
    std::optional<BpPair> resting_bp;
    BaselineProvenance provenance = BaselineProvenance::PopulationDefault;
};

struct StressIndex {
    double value = 0.0;  // 0 (relaxed) .. 100 (max stress)
};

enum class RhythmClass { Sinus, Irregular };

struct LocalTime {
    int hour = 0;    // 0..23
    int minute = 0;  // 0..59
};

// PPG artifact rejection. Keeps IBIs inside [300, 2000] ms whose change from
// the previously retained IBI is at most 20%; the first in-band IBI is always
// retained. Idempotent.
IbiSeries clean_ibi(const IbiSeries& series);

// Requires at least 2 intervals; raises InsufficientData otherwise.
HrvFeatures hrv_features(const IbiSeries& series);

// 100 * clamp((resting_rmssd - rmssd_now) / resting_rmssd, 0, 1).
// Lower variability than rest maps to higher stress.
StressIndex stress_index(const HrvFeatures& features, const Baseline& baseline);

// Time-of-day drowsiness weight: 1.5 in [02:00, 06:00), 1.2 in [14:00, 16:00),
// 1.0 otherwise. Window starts inclusive, ends exclusive.
double circadian_risk(LocalTime local_time);

// Builds a Baseline. With measured resting features the values are copied and
// provenance is MEASURED. Otherwise population defaults: resting HR 72
// (female) / 68 (male) / 70 (unspecified), minus 8 bpm for athletes or 4 for
// active profiles; RMSSD 42 ms and SDNN 50 ms.
Baseline personalize(const DriverProfile& profile,
                     const std::optional<HrvFeatures>& resting = std::nullopt,
                     const std::optional<BpPair>& resting_bp = std::nullopt);

// Heuristic regularity screen over an already-cleaned series of at least 30
// intervals: IRREGULAR when the coefficient of variation (sdnn / mean ibi)
// exceeds 0.12 and pNN50 exceeds 0.6. Not a medical classifier.
RhythmClass classify_rhythm(const IbiSeries& series);

} // namespace dds
