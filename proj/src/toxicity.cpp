#include "obfuskit/toxicity.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "obfuskit/error.hpp"
#include "obfuskit/http.hpp"

namespace obfuskit {
extern const char* const kBuiltinRulesJson;
}

namespace obfuskit::eval {

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::Toxic: return "toxic";
    case RuleKind::Implicit: return "implicit";
    case RuleKind::Refusal: return "refusal";
    case RuleKind::Indicator: return "indicator";
  }
  return "toxic";
}

RuleSet RuleSet::from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("rules: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, "rules: expected a JSON list");
  std::vector<Rule> rules;
  for (const auto& e : j) {
    Rule r;
    r.pattern = e.at("pattern").get<std::string>();
    r.weight = e.value("weight", 1.0);
    const auto kind = e.value("kind", std::string("toxic"));
    if (kind == "toxic") {
      r.kind = RuleKind::Toxic;
    } else if (kind == "implicit") {
      r.kind = RuleKind::Implicit;
    } else if (kind == "refusal") {
      r.kind = RuleKind::Refusal;
    } else if (kind == "indicator") {
      r.kind = RuleKind::Indicator;
    } else {
      throw Error(ErrorCode::InvalidConfig, "rules: unknown kind '" + kind + "'");
    }
    if (r.pattern.empty()) throw Error(ErrorCode::InvalidConfig, "rules: empty pattern");
    if (r.weight < 0.0 || r.weight > 1.0) throw Error(ErrorCode::InvalidConfig, "rules: weight outside [0,1]");
    if (e.contains("alias_of")) r.alias_of = e.at("alias_of").get<std::string>();
    rules.push_back(std::move(r));
  }
  return RuleSet(std::move(rules));
}

RuleSet RuleSet::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open rules file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

const RuleSet& RuleSet::builtin() {
  static const RuleSet rules = from_json(kBuiltinRulesJson);
  return rules;
}

std::vector<Rule> RuleSet::of_kind(RuleKind kind) const { return of_kinds({kind}); }

std::vector<Rule> RuleSet::of_kinds(std::initializer_list<RuleKind> kinds) const {
  std::vector<Rule> out;
  for (const auto& r : rules_) {
    if (std::find(kinds.begin(), kinds.end(), r.kind) != kinds.end()) out.push_back(r);
  }
  return out;
}

std::vector<std::string> lexical_units(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'' || c == '-' || u >= 0x80) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

LexiconScorer::LexiconScorer(const std::vector<Rule>& terms) {
  for (const auto& r : terms) {
    auto units = lexical_units(r.pattern);
    if (units.empty()) continue;
    terms_.push_back(Term{std::move(units), r.pattern, std::clamp(r.weight, 0.0, 1.0)});
  }
}

std::shared_ptr<const LexiconScorer> LexiconScorer::surface(const RuleSet& rules) {
  return std::make_shared<const LexiconScorer>(rules.of_kind(RuleKind::Toxic));
}

std::shared_ptr<const LexiconScorer> LexiconScorer::reading(const RuleSet& rules) {
  return std::make_shared<const LexiconScorer>(rules.of_kinds({RuleKind::Toxic, RuleKind::Implicit}));
}

namespace {

bool contains_run(const std::vector<std::string>& hay, const std::vector<std::string>& needle) {
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), hay.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

}  // namespace

double LexiconScorer::score(std::string_view text) const {
  const auto units = lexical_units(text);
  double best = 0.0;
  for (const auto& t : terms_) {
    if (t.weight > best && contains_run(units, t.units)) best = t.weight;
  }
  return best;
}

std::vector<std::string> LexiconScorer::matches(std::string_view text) const {
  const auto units = lexical_units(text);
  std::vector<std::string> out;
  for (const auto& t : terms_) {
    if (contains_run(units, t.units)) out.push_back(t.pattern);
  }
  return out;
}

RemoteScorer::RemoteScorer(std::string url, int timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {
  http::parse_url(url_);
}

double RemoteScorer::score(std::string_view text) const {
  const auto url = http::parse_url(url_);
  const nlohmann::json body = {{"text", std::string(text)}};
  const auto res = http::post_json(url, body.dump(), {}, timeout_seconds_);
  if (res.status != 200) {
    throw Error(ErrorCode::ScorerUnavailable,
                res.status == 0 ? res.transport_error : "HTTP " + std::to_string(res.status));
  }
  try {
    const auto j = nlohmann::json::parse(res.body);
    return std::clamp(j.at("score").get<double>(), 0.0, 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ScorerUnavailable, std::string("bad scorer reply: ") + e.what());
  }
}

double toxicity(std::string_view text, const ToxicityScorer& scorer) {
  if (text.empty()) return 0.0;
  return std::clamp(scorer.score(text), 0.0, 1.0);
}

}  // namespace obfuskit::eval
