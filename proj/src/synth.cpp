#include "dds/synth.hpp"

#include <algorithm>
#include <cmath>

#include "dds/hrv.hpp"
#include "dds/rng.hpp"

namespace dds {

void Scenario::validate() const {
    if (duration_s <= 0.0) throw InvalidScenario("duration_s must be positive");
    if (kind == ScenarioKind::DrowsyOnset) {
        if (onset_s < 0.0) throw InvalidScenario("onset_s must be non-negative");
        if (onset_s >= duration_s) throw InvalidScenario("onset_s must be before duration_s");
    }
}

namespace {

using P = SynthParams;

bool driving_phase(const Scenario& sc, double t_s) {
    if (sc.kind != ScenarioKind::StopAndGo) return true;
    return std::fmod(t_s, P::kStopAndGoCycleS) < P::kStopAndGoDriveS;
}

// 0 before onset, approaching 1 afterwards with time constant kRampTauS.
double drowsy_ramp(const Scenario& sc, double t_s) {
    if (sc.kind != ScenarioKind::DrowsyOnset || t_s < sc.onset_s) return 0.0;
    return 1.0 - std::exp(-(t_s - sc.onset_s) / P::kRampTauS);
}

SessionStream motion_stream(const Scenario& sc, std::uint64_t seed) {
    Rng accel_rng(seed);
    Rng gyro_rng(seed ^ 0x517cc1b727220a95ULL);
    SessionStream accel, gyro;
    const std::int64_t step_ms = 1000 / P::kMotionHz;
    const std::int64_t end_ms = static_cast<std::int64_t>(sc.duration_s * 1000.0);
    for (std::int64_t t = 0; t < end_ms; t += step_ms) {
        const bool moving = driving_phase(sc, t / 1000.0);
        const double vib = moving ? 0.35 : 0.05;
        const double spin = moving ? 0.05 : 0.005;
        accel.samples.push_back(
            {t, 0,
             AccelReading{accel_rng.normal(0.0, vib), accel_rng.normal(0.0, vib),
                          9.81 + accel_rng.normal(0.0, vib)}});
        gyro.samples.push_back(
            {t, 0,
             GyroReading{gyro_rng.normal(0.0, spin), gyro_rng.normal(0.0, spin),
                         gyro_rng.normal(0.0, spin)}});
    }
    return merge_streams({accel, gyro});
}

SessionStream beat_stream(const Scenario& sc, const DriverProfile& profile, std::uint64_t seed) {
    Rng rng(seed);
    // Driving heart rate sits slightly above the resting estimate.
    const double hr_drive = personalize(profile).resting_hr_bpm + 8.0;

    SessionStream out;
    const double end_ms = sc.duration_s * 1000.0;
    double t = 0.0;
    while (true) {
        const double ramp = drowsy_ramp(sc, t / 1000.0);
        const double hr = hr_drive * (1.0 - P::kHrDropFraction * ramp);
        const double jitter =
            P::kIbiJitterAlertMs + (P::kIbiJitterDrowsyMs - P::kIbiJitterAlertMs) * ramp;
        double ibi = 60000.0 / hr + rng.normal(0.0, jitter);
        ibi = std::clamp(ibi, 320.0, 1980.0);
        t += ibi;
        if (t >= end_ms) break;
        out.samples.push_back(
            {static_cast<std::int64_t>(t), 0, HeartBeatReading{ibi}});
    }
    return out;
}

SessionStream location_stream(const Scenario& sc, std::uint64_t seed) {
    Rng rng(seed);
    SessionStream out;
    double lat = 40.0;
    const double lon = -4.0;
    const std::int64_t end_ms = static_cast<std::int64_t>(sc.duration_s * 1000.0);
    for (std::int64_t t = 0; t < end_ms; t += 1000) {
        const bool moving = driving_phase(sc, t / 1000.0);
        double speed = moving ? P::kCruiseSpeedMps + rng.normal(0.0, 0.5)
                              : std::abs(rng.normal(0.0, 0.05));
        speed = std::max(0.0, speed);
        lat += speed / 111320.0;  // due-north track, ~meters to degrees
        out.samples.push_back(
            {t, 0,
             LocationReading{lat + rng.normal(0.0, 1e-5), lon + rng.normal(0.0, 1e-5), speed}});
    }
    return out;
}

SessionStream step_stream(const Scenario& sc, std::uint64_t seed) {
    Rng rng(seed);
    SessionStream out;
    std::int64_t cumulative = 0;
    const std::int64_t end_ms = static_cast<std::int64_t>(sc.duration_s * 1000.0);
    for (std::int64_t t = 0; t < end_ms; t += 1000) {
        // Driver stays seated; the watch still counts the odd spurious step.
        if (rng.uniform() < 0.008) ++cumulative;
        out.samples.push_back({t, 0, StepCountReading{cumulative}});
    }
    return out;
}

SessionStream vitals_stream(const Scenario& sc, std::uint64_t seed) {
    Rng bp_rng(seed);
    Rng spo2_rng(seed ^ 0x2545f4914f6cdd1dULL);
    SessionStream bp, spo2;
    const std::int64_t period_ms = static_cast<std::int64_t>(P::kVitalsPeriodS * 1000.0);
    const std::int64_t end_ms = static_cast<std::int64_t>(sc.duration_s * 1000.0);
    for (std::int64_t t = 0; t < end_ms; t += period_ms) {
        const double ramp = drowsy_ramp(sc, t / 1000.0);
        const double f = 1.0 - P::kBpDropFraction * ramp;
        bp.samples.push_back(
            {t, 0,
             BloodPressureReading{120.0 * f + bp_rng.normal(0.0, 1.5),
                                  80.0 * f + bp_rng.normal(0.0, 1.0)}});
        spo2.samples.push_back(
            {t, 0, Spo2Reading{std::clamp(97.0 + spo2_rng.normal(0.0, 0.6), 90.0, 100.0)}});
    }
    return merge_streams({bp, spo2});
}

} // namespace

SessionStream synthesize_session(const Scenario& scenario, const DriverProfile& profile) {
    scenario.validate();
    profile.validate();

    std::uint64_t seed_state = scenario.seed;
    const std::uint64_t motion_seed = splitmix64(seed_state);
    const std::uint64_t beat_seed = splitmix64(seed_state);
    const std::uint64_t loc_seed = splitmix64(seed_state);
    const std::uint64_t step_seed = splitmix64(seed_state);
    const std::uint64_t vitals_seed = splitmix64(seed_state);

    SessionStream merged = merge_streams({motion_stream(scenario, motion_seed),
                                          beat_stream(scenario, profile, beat_seed),
                                          location_stream(scenario, loc_seed),
                                          step_stream(scenario, step_seed),
                                          vitals_stream(scenario, vitals_seed)});

    const std::int64_t onset_ms = static_cast<std::int64_t>(scenario.onset_s * 1000.0);
    const std::int64_t end_ms = static_cast<std::int64_t>(scenario.duration_s * 1000.0);
    for (std::int64_t t = 0; t < end_ms; t += 1000) {
        const bool drowsy = scenario.kind == ScenarioKind::DrowsyOnset && t >= onset_ms;
        merged.labels.push_back({t, drowsy ? LabelKind::Drowsy : LabelKind::Alert});
    }
    return merged;
}

} // namespace dds
