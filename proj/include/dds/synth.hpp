#pragma once

#include <cstdint>

#include "dds/sensor_model.hpp"

namespace dds {

enum class ScenarioKind { AlertDrive, DrowsyOnset, StopAndGo };

struct Scenario {
    ScenarioKind kind = ScenarioKind::AlertDrive;
    double onset_s = 0.0;  // DrowsyOnset only; must be < duration_s
    std::uint64_t seed = 1;
    double duration_s = 600.0;

    void validate() const;
};

// Fixed generator constants. Tests derive expected detector timelines from
// the stop-and-go phase layout, so these are part of the public contract.
struct SynthParams {
    static constexpr double kCruiseSpeedMps = 20.0;
    static constexpr double kStopAndGoDriveS = 420.0;
    static constexpr double kStopAndGoStopS = 180.0;
    static constexpr double kStopAndGoCycleS = kStopAndGoDriveS + kStopAndGoStopS;

    static constexpr int kMotionHz = 10;        // accel + gyro
    static constexpr int kLocationHz = 1;       // location + step counter
    static constexpr double kVitalsPeriodS = 60.0;  // blood pressure + SpO2

    // Drowsy onset transition: vitals approach their lowered level with time
    // constant kRampTauS, effectively settled within 120 s of onset.
    static constexpr double kRampTauS = 25.0;
    static constexpr double kHrDropFraction = 0.10;
    static constexpr double kBpDropFraction = 0.10;
    static constexpr double kIbiJitterAlertMs = 12.0;
    static constexpr double kIbiJitterDrowsyMs = 55.0;
};

// Deterministic synthetic multi-sensor session. Identical (scenario, profile)
// inputs produce identical streams, including ground-truth labels at 1 Hz.
SessionStream synthesize_session(const Scenario& scenario, const DriverProfile& profile);

} // namespace dds
