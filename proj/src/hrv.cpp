#include "dds/hrv.hpp"

#include <algorithm>
#include <cmath>

namespace dds {

namespace {

constexpr double kIbiBandLoMs = 300.0;
constexpr double kIbiBandHiMs = 2000.0;
constexpr double kMaxRelativeJump = 0.20;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

} // namespace

IbiSeries clean_ibi(const IbiSeries& series) {
    IbiSeries out;
    out.reserve(series.size());
    double prev_kept = -1.0;
    for (const auto& p : series) {
        if (p.ibi_ms < kIbiBandLoMs || p.ibi_ms > kIbiBandHiMs) continue;
        if (prev_kept > 0.0 && std::abs(p.ibi_ms - prev_kept) > kMaxRelativeJump * prev_kept)
            continue;
        out.push_back(p);
        prev_kept = p.ibi_ms;
    }
    return out;
}

HrvFeatures hrv_features(const IbiSeries& series) {
    const std::size_t n = series.size();
    if (n < 2) throw InsufficientData("hrv_features needs at least 2 intervals");

    // Single pass: sums for mean/variance plus successive-difference terms.
    double sum = 0.0, sum_sq = 0.0;
    double diff_sq_sum = 0.0;
    std::size_t over_50 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = series[i].ibi_ms;
        sum += v;
        sum_sq += v * v;
        if (i > 0) {
            const double d = v - series[i - 1].ibi_ms;
            diff_sq_sum += d * d;
            if (std::abs(d) > 50.0) ++over_50;
        }
    }

    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - mean * mean);

    HrvFeatures f;
    f.window_start_ms = series.front().t_ms;
    f.window_end_ms = series.back().t_ms;
    f.n_intervals = n;
    f.mean_hr_bpm = 60000.0 / mean;
    f.sdnn_ms = std::sqrt(var);
    f.rmssd_ms = std::sqrt(diff_sq_sum / static_cast<double>(n - 1));
    f.pnn50 = static_cast<double>(over_50) / static_cast<double>(n - 1);
    return f;
}

StressIndex stress_index(const HrvFeatures& features, const Baseline& baseline) {
    const double ref = baseline.resting_rmssd_ms;
    return StressIndex{100.0 * clamp01((ref - features.rmssd_ms) / ref)};
}

double circadian_risk(LocalTime local_time) {
    const int m = local_time.hour * 60 + local_time.minute;
    if (m >= 2 * 60 && m < 6 * 60) return 1.5;    // overnight dip
    if (m >= 14 * 60 && m < 16 * 60) return 1.2;  // post-lunch dip
    return 1.0;
}

Baseline personalize(const DriverProfile& profile, const std::optional<HrvFeatures>& resting,
                     const std::optional<BpPair>& resting_bp) {
    profile.validate();

    Baseline b;
    if (resting) {
        b.resting_hr_bpm = resting->mean_hr_bpm;
        b.resting_rmssd_ms = resting->rmssd_ms;
        b.resting_sdnn_ms = resting->sdnn_ms;
        b.resting_bp = resting_bp;
        b.provenance = BaselineProvenance::Measured;
        return b;
    }

    double hr = 70.0;
    if (profile.gender == Gender::Female) hr = 72.0;
    if (profile.gender == Gender::Male) hr = 68.0;
    if (profile.fitness == Fitness::Athlete) hr -= 8.0;
    if (profile.fitness == Fitness::Active) hr -= 4.0;

    b.resting_hr_bpm = hr;
    b.resting_rmssd_ms = 42.0;
    b.resting_sdnn_ms = 50.0;
    b.resting_bp = resting_bp;
    b.provenance = BaselineProvenance::PopulationDefault;
    return b;
}

RhythmClass classify_rhythm(const IbiSeries& series) {
    if (series.size() < 30)
        throw InsufficientData("classify_rhythm needs at least 30 intervals");
    HrvFeatures f = hrv_features(series);
    const double mean_ibi = 60000.0 / f.mean_hr_bpm;
    const double cv = f.sdnn_ms / mean_ibi;
    return (cv > 0.12 && f.pnn50 > 0.6) ? RhythmClass::Irregular : RhythmClass::Sinus;
}

} // namespace dds
