#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "obfuskit/client.hpp"
#include "obfuskit/prompt.hpp"
#include "obfuskit/sim.hpp"

namespace obfuskit::ca {

// Question slot in normal-intent and baseline templates.
inline constexpr std::string_view kSlot = "INSERTQUESTION";

struct AmbiguityVariant {
  std::string text;
  std::string source_question;
  std::size_t index = 0;
  std::optional<int> interpretation_count_claim;
};

struct NormalTemplate {
  std::string id;
  std::string text;
};

// JSON list of {id, text}.
std::vector<NormalTemplate> load_templates(std::string_view json_text);
std::vector<NormalTemplate> load_templates_file(const std::string& path);
const std::vector<NormalTemplate>& builtin_templates();
// Placeholder baseline template with one slot.
NormalTemplate builtin_baseline_template();
NormalTemplate load_baseline_template_file(const std::string& path);

struct CAConfig {
  std::size_t variants_per_question = 10;
  double delta_ca = 0.5;
  std::size_t max_retries = 10;
  std::vector<NormalTemplate> normal_templates = builtin_templates();
  std::size_t parallelism = 4;

  void validate() const;
};

// Versioned rewrite instruction with k and the question filled in.
std::string rewrite_instruction(std::string_view question, std::size_t k);

// Numbered lines ("1. ...", "2) ...") when present, otherwise every non-empty
// line. Echoes of the question and duplicates are dropped; at most k kept.
// A trailing "(N interpretations)" is stripped into interpretation_count_claim.
std::vector<AmbiguityVariant> parse_rewrites(std::string_view reply, std::string_view question, std::size_t k);

// Throws EmptyQuery, ZeroVariants; client failures surface as ClientError.
std::vector<AmbiguityVariant> rewrite_ambiguous(std::string_view question, std::size_t k, client::ModelClient& rewriter);

// Throws MissingSlot (no slot) or MultipleMarkers (more than one).
PseudoLegalPrompt embed_variant(const AmbiguityVariant& variant, const NormalTemplate& tmpl);

using Evaluator = std::function<double(std::string_view prompt)>;

// Surface toxicity of the prompt under the given rules.
Evaluator surface_toxicity_evaluator(const eval::RuleSet& rules = eval::RuleSet::builtin());

struct CAResult {
  PseudoLegalPrompt prompt;
  double evaluator_score = 0.0;
  std::size_t retries = 0;  // evaluations spent, the passing one included
  std::vector<AmbiguityVariant> variants;
};

// Walks (variant, template) pairs variant-major, wrapping around, until the
// evaluator score is <= delta_ca. Throws ThresholdNotMet after max_retries.
CAResult select_prompt(const Question& question, std::vector<AmbiguityVariant> variants, const CAConfig& config,
                       const Evaluator& evaluator);

CAResult generate_ca_prompt(const Question& question, const CAConfig& config, client::ModelClient& rewriter,
                            const Evaluator& evaluator);

struct SubSentenceReport {
  std::string text;
  double tox = 0.0;
  std::string target;
};

struct AmbiguityReport {
  bool ambiguous = false;
  bool single_sentence = false;
  bool malicious = false;  // some sub-sentence with tox > theta
  std::vector<SubSentenceReport> parts;

  nlohmann::json to_json() const;
};

// Single sentence whose decomposition has more than one sub-sentence with
// pairwise distinct canonical targets. Throws EmptyQuery.
AmbiguityReport check_ambiguity(std::string_view query, const sim::SimConfig& config);

struct CACorpus {
  std::size_t questions = 0;
  std::size_t variants = 0;            // ambiguous outputs
  std::size_t candidate_prompts = 0;   // variants x templates
  std::vector<CAResult> results;       // question order; failed questions omitted
  std::map<std::string, std::string> failures;

  nlohmann::json counts() const;
};

CACorpus generate_ca_corpus(const std::vector<Question>& questions, const CAConfig& config,
                            client::ModelClient& rewriter, const Evaluator& evaluator);

}  // namespace obfuskit::ca
