#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace obfuskit::eval {

// toxic:     surface terms a content filter would see.
// implicit:  phrasings only a reading model resolves to restricted content.
// refusal:   regex over responses marking a refusal.
// indicator: regex over responses marking the harmful content was produced.
enum class RuleKind { Toxic, Implicit, Refusal, Indicator };

std::string_view to_string(RuleKind kind);

struct Rule {
  std::string pattern;
  double weight = 1.0;
  RuleKind kind = RuleKind::Toxic;
  // implicit rules may name the surface term they stand in for.
  std::optional<std::string> alias_of;
};

// JSON list of {pattern, weight, kind[, alias_of]}.
class RuleSet {
 public:
  RuleSet() = default;
  explicit RuleSet(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  static RuleSet from_json(std::string_view json_text);
  static RuleSet from_file(const std::string& path);
  // data/rules.json, compiled in.
  static const RuleSet& builtin();

  const std::vector<Rule>& rules() const { return rules_; }
  std::vector<Rule> of_kind(RuleKind kind) const;
  std::vector<Rule> of_kinds(std::initializer_list<RuleKind> kinds) const;

 private:
  std::vector<Rule> rules_;
};

class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;
  // Score in [0, 1].
  virtual double score(std::string_view text) const = 0;
};

// Lower-cased lexical units used for lexicon matching: runs of letters,
// digits, apostrophes and hyphens. "ANSWER[brew" yields {"answer", "brew"}.
std::vector<std::string> lexical_units(std::string_view text);

// Max weight over matched terms; multi-word terms match contiguous units.
class LexiconScorer final : public ToxicityScorer {
 public:
  explicit LexiconScorer(const std::vector<Rule>& terms);

  // Surface scorer over toxic terms only.
  static std::shared_ptr<const LexiconScorer> surface(const RuleSet& rules);
  // Reading-model scorer over toxic and implicit terms.
  static std::shared_ptr<const LexiconScorer> reading(const RuleSet& rules);

  double score(std::string_view text) const override;
  std::vector<std::string> matches(std::string_view text) const;

 private:
  struct Term {
    std::vector<std::string> units;
    std::string pattern;
    double weight;
  };
  std::vector<Term> terms_;
};

// POSTs {"text": ...} and reads {"score": x}. Throws ScorerUnavailable.
class RemoteScorer final : public ToxicityScorer {
 public:
  explicit RemoteScorer(std::string url, int timeout_seconds = 10);
  double score(std::string_view text) const override;

 private:
  std::string url_;
  int timeout_seconds_;
};

double toxicity(std::string_view text, const ToxicityScorer& scorer);

}  // namespace obfuskit::eval
