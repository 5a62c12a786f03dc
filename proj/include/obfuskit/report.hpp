#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "obfuskit/client.hpp"
#include "obfuskit/eval.hpp"

namespace obfuskit::report {

struct AttemptRecord {
  std::string question_id;
  std::string category;
  std::string arm_id;
  std::string method;
  std::string target;
  nlohmann::json provenance = nlohmann::json::object();
  std::string provenance_hash;
  std::string prompt;
  std::optional<client::Exchange> exchange;
  std::optional<eval::Outcome> outcome;
  double prompt_toxicity = 0.0;
  double response_toxicity = 0.0;
  std::size_t prompt_length = 0;
  std::size_t response_length = 0;
  std::string error;
  std::string timestamp;

  nlohmann::json to_json() const;
  static AttemptRecord from_json(const nlohmann::json& j);
  std::string key() const;  // question id, arm id, provenance hash
};

struct ArmReport {
  std::string arm_id;
  std::string method;
  std::string target;
  std::optional<eval::MetricsSummary> metrics;
  std::size_t errors = 0;
  std::map<std::string, eval::CategoryMetrics> categories;
  std::vector<eval::Histogram> histograms;
};

struct CampaignReport {
  std::vector<ArmReport> arms;  // first-appearance order
  double avg_asr = 0.0;
  double avg_rej = 0.0;
  double avg_hal = 0.0;
  std::vector<std::string> categories;

  nlohmann::json to_json() const;
  // One row per arm plus an average row.
  std::string overall_csv() const;
  std::string category_csv() const;
};

// Throws EmptyRecords. Errored attempts count under `errors`, not in metrics.
CampaignReport build_report(const std::vector<AttemptRecord>& records);

// report.json, report.csv, report_categories.csv, toxicity_hist_<arm>_<panel>.csv.
// Returns the written paths.
std::vector<std::string> export_report(const std::vector<AttemptRecord>& records, const std::string& output_dir);

// Complete lines only; a trailing partial line is ignored.
std::vector<AttemptRecord> read_records(const std::string& path);

}  // namespace obfuskit::report
