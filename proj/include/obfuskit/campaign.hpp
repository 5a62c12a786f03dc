#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "obfuskit/ca.hpp"
#include "obfuskit/client.hpp"
#include "obfuskit/ga.hpp"
#include "obfuskit/oi.hpp"
#include "obfuskit/prompt.hpp"
#include "obfuskit/report.hpp"
#include "obfuskit/sim.hpp"

namespace obfuskit::campaign {

// RFC 4180 rows. Throws MalformedRowError (1-based physical line) on an
// unterminated quote or stray quote inside an unquoted field.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

// "q" + zero-padded 1-based data row + "-" + 8 hex digits of the text hash.
std::string question_id(std::size_t row, std::string_view text);

// Header must name a goal (or text) column; target, category and id columns
// are optional. Throws MissingHeader, MalformedRow, DuplicateId.
std::vector<Question> ingest_csv(std::string_view csv);
// `categories` optionally maps question id or text to a category (CSV id,category).
std::vector<Question> ingest_dataset(const std::string& path, const std::string& categories = {});

std::vector<std::string> read_lines(const std::string& path);

sim::SimConfig sim_config_from_json(const nlohmann::json& j, const eval::RuleSet& rules);
ga::GAConfig ga_config_from_json(const nlohmann::json& j);

struct Arm {
  std::string id;
  Method method = Method::OI;
  std::string target = "sim";
};

struct CampaignConfig {
  std::string dataset;
  std::string categories;
  std::vector<Arm> arms;
  std::vector<client::ModelTarget> targets;
  ga::GAConfig ga;
  ca::CAConfig ca;
  sim::SimConfig simulator = sim::SimConfig::defaults();
  eval::RuleSet rules = eval::RuleSet::builtin();
  std::size_t parallelism = 4;
  std::uint64_t rng_seed = 0;
  std::string output_dir = "out";
  std::string seeds;
  std::vector<oi::PrefabTemplate> prefabs = oi::builtin_prefabs();
  ca::NormalTemplate baseline = ca::builtin_baseline_template();
  Question probe = oi::OIConfig{}.probe;
  std::string rewriter;  // target id used for ambiguity rewrites; empty = the arm's target

  // Relative paths resolve against base_dir. rng_seed is mandatory.
  static CampaignConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static CampaignConfig from_file(const std::string& path);

  const client::ModelTarget& target(const std::string& id) const;
  void validate() const;
};

// Single writer; every line is flushed as soon as it is written.
class JsonlAppender {
 public:
  // resume: keep complete lines of an existing file and drop a trailing partial line.
  JsonlAppender(const std::string& path, bool resume);
  void append(const nlohmann::json& record);
  std::size_t written() const { return written_; }

 private:
  std::mutex mu_;
  std::ofstream out_;
  std::size_t written_ = 0;
};

struct RunOptions {
  bool resume = false;
  std::optional<std::string> only_target;
  bool trace_ga = false;
  // Test hook: stop after this many new records.
  std::optional<std::size_t> stop_after;
};

struct RunResult {
  report::CampaignReport report;
  std::size_t new_records = 0;
  std::size_t skipped = 0;
  bool interrupted = false;
  nlohmann::json corpus_counts = nlohmann::json::object();
};

RunResult run_campaign(const CampaignConfig& config, const RunOptions& options = {});

// Corpus generation without execution; writes JSONL artifacts into output_dir.
oi::OICorpus generate_oi(const CampaignConfig& config, const std::string& target_id, bool trace_ga = false);
ca::CACorpus generate_ca(const CampaignConfig& config, const std::string& target_id);

}  // namespace obfuskit::campaign
