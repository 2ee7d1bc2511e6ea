#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdipipe/activity.hpp"
#include "sdipipe/ingest.hpp"
#include "sdipipe/sdi.hpp"
#include "sdipipe/trips.hpp"

namespace sdipipe::pipeline {

// One JSON document drives every stage; every paper-unspecified parameter
// surfaces here with its default.
struct PipelineConfig {
    // inputs/outputs
    std::string zones_path;
    std::string scenario_path;   // only needed by the synth stage
    std::string sightings_path;  // default: <out_dir>/sightings.csv
    std::string cases_path;      // default: <out_dir>/cases.csv
    std::string out_dir = "out";

    Date analysis_start = Date::from_civil(2020, 1, 6);
    Date analysis_end = Date::from_civil(2020, 5, 1);
    Date benchmark_start = Date::from_civil(2020, 2, 3);
    Date benchmark_end = Date::from_civil(2020, 2, 14);
    int calibration_year = 2020;
    std::map<std::string, double> target_rates;  // state -> trips/person/day
    double default_target_rate = 4.0;            // used for states not listed

    ingest::CleaningConfig cleaning;
    trips::TripConfig trip_cfg;
    activity::ClusterConfig cluster_cfg;
    sdi::SdiWeights sdi_weights;
    int smoothing_window = 5;
    sdi::SmoothingMode smoothing_mode = sdi::SmoothingMode::Centered;
    int roc_lookback = 5;
    double elbow_eps_pct = 1.0;
    int fatigue_run_weekdays = 3;
    Date pivot_date = Date::from_civil(2020, 4, 15);
    bool panel_observed_only = true;  // "observed" vs "all" staying-home denominator
    int threads = 0;                  // 0 = hardware concurrency

    static PipelineConfig load(const std::string& json_path);
    std::string artifact(const std::string& name) const;  // out_dir + "/" + name
};

// Stage entry points; each reads its inputs, writes its outputs atomically
// (temp file + rename) and throws sdipipe::Error on failure.
void stage_synth(const PipelineConfig& cfg);
void stage_ingest(const PipelineConfig& cfg);
void stage_trips(const PipelineConfig& cfg);
void stage_activities(const PipelineConfig& cfg);
void stage_weights(const PipelineConfig& cfg);
void stage_metrics(const PipelineConfig& cfg);
void stage_sdi(const PipelineConfig& cfg);
void stage_phases(const PipelineConfig& cfg);
void stage_cases(const PipelineConfig& cfg);
void stage_report(const PipelineConfig& cfg);
void run_all(const PipelineConfig& cfg);

// Interstage readers (also used by tests and the acceptance suite).
std::vector<trips::Trip> load_trips_csv(const std::string& path,
                                        std::vector<std::string>* device_ids = nullptr);
std::vector<activity::DeviceProfile> load_profiles_csv(const std::string& path);
std::vector<metrics::DailyMetrics> load_metrics_csv(const std::string& path);
std::vector<sdi::SdiSeries> load_sdi_csv(const std::string& path);

}  // namespace sdipipe::pipeline
