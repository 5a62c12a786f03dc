#include "obfuskit/ca.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "obfuskit/error.hpp"
#include "obfuskit/text.hpp"
#include "obfuskit/parallel.hpp"
#include "obfuskit/rng.hpp"

namespace obfuskit {
extern const char* const kBuiltinCaTemplatesJson;
extern const char* const kBuiltinBaselineTemplate;
extern const char* const kBuiltinRewriteInstruction;
}

namespace obfuskit::ca {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t count_slots(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kSlot); pos != std::string_view::npos; pos = text.find(kSlot, pos + kSlot.size())) ++n;
  return n;
}

void replace_all(std::string& s, std::string_view what, std::string_view with) {
  for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + with.size())) {
    s.replace(pos, what.size(), with);
  }
}

}  // namespace

std::vector<NormalTemplate> load_templates(std::string_view json_text) {
  std::vector<NormalTemplate> out;
  try {
    for (const auto& e : nlohmann::json::parse(json_text)) {
      NormalTemplate t{e.at("id").get<std::string>(), e.at("text").get<std::string>()};
      if (count_slots(t.text) != 1) {
        throw Error(ErrorCode::MissingSlot, "template " + t.id + " must contain exactly one " + std::string(kSlot));
      }
      out.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("ca templates: ") + e.what());
  }
  return out;
}

std::vector<NormalTemplate> load_templates_file(const std::string& path) { return load_templates(read_file(path)); }

const std::vector<NormalTemplate>& builtin_templates() {
  static const auto kTemplates = load_templates(kBuiltinCaTemplatesJson);
  return kTemplates;
}

NormalTemplate builtin_baseline_template() { return {"baseline-placeholder-v1", trim(kBuiltinBaselineTemplate)}; }

NormalTemplate load_baseline_template_file(const std::string& path) {
  NormalTemplate t{"baseline:" + hex64(fnv1a64(path)).substr(0, 8), trim(read_file(path))};
  if (count_slots(t.text) != 1) throw Error(ErrorCode::MissingSlot, path + " must contain exactly one " + std::string(kSlot));
  return t;
}

void CAConfig::validate() const {
  if (variants_per_question < 1) throw Error(ErrorCode::InvalidConfig, "ca.variants_per_question must be >= 1");
  if (max_retries < 1) throw Error(ErrorCode::InvalidConfig, "ca.max_retries must be >= 1");
  if (normal_templates.empty()) throw Error(ErrorCode::InvalidConfig, "ca.normal_templates is empty");
  if (delta_ca < 0) throw Error(ErrorCode::InvalidConfig, "ca.delta_ca must be >= 0");
}

std::string rewrite_instruction(std::string_view question, std::size_t k) {
  std::string s = trim(kBuiltinRewriteInstruction);
  replace_all(s, "{k}", std::to_string(k));
  replace_all(s, "{question}", question);
  return s;
}

std::vector<AmbiguityVariant> parse_rewrites(std::string_view reply, std::string_view question, std::size_t k) {
  static const std::regex numbered(R"(^\s*\d+\s*[.)]\s*(.*)$)");
  static const std::regex claim(R"(\s*\((\d+) interpretations?\)\s*$)", std::regex::icase);

  std::vector<std::string> lines, plain;
  std::istringstream in{std::string(reply)};
  for (std::string line; std::getline(in, line);) {
    std::smatch m;
    if (std::regex_match(line, m, numbered)) {
      lines.push_back(m[1]);
    } else if (!trim(line).empty()) {
      plain.push_back(line);
    }
  }
  if (lines.empty()) lines = std::move(plain);

  const std::string q_key = text::normalize_text(question);
  std::set<std::string> seen;
  std::vector<AmbiguityVariant> out;
  for (auto& raw : lines) {
    AmbiguityVariant v;
    std::string text = trim(raw);
    std::smatch m;
    if (std::regex_search(text, m, claim)) {
      v.interpretation_count_claim = std::stoi(m[1]);
      text = trim(text.substr(0, static_cast<std::size_t>(m.position(0))));
    }
    const std::string key = text::normalize_text(text);
    if (key.empty() || key == q_key || !seen.insert(key).second) continue;
    v.text = std::move(text);
    v.source_question = std::string(question);
    v.index = out.size();
    out.push_back(std::move(v));
    if (out.size() == k) break;
  }
  return out;
}

std::vector<AmbiguityVariant> rewrite_ambiguous(std::string_view question, std::size_t k, client::ModelClient& rewriter) {
  if (trim(question).empty()) throw Error(ErrorCode::EmptyQuery, "empty question");
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  std::string reply;
  try {
    reply = rewriter.complete(rewrite_instruction(question, k)).response;
  } catch (const Error& e) {
    throw Error(ErrorCode::ClientError, std::string("rewrite failed: ") + e.what());
  }
  auto out = parse_rewrites(reply, question, k);
  if (out.empty()) throw Error(ErrorCode::ZeroVariants, "every rewrite echoed the question");
  return out;
}

PseudoLegalPrompt embed_variant(const AmbiguityVariant& variant, const NormalTemplate& tmpl) {
  const auto n = count_slots(tmpl.text);
  if (n == 0) throw Error(ErrorCode::MissingSlot, "template " + tmpl.id + " has no " + std::string(kSlot));
  if (n > 1) throw Error(ErrorCode::MultipleMarkers, "template " + tmpl.id + " has " + std::to_string(n) + " slots");
  PseudoLegalPrompt p;
  p.text = tmpl.text;
  p.text.replace(p.text.find(kSlot), kSlot.size(), variant.text);
  p.embedded_question = variant.text;
  p.template_id = tmpl.id;
  p.method = Method::CA;
  p.provenance = {{"method", "CA"}, {"template_id", tmpl.id}, {"variant_index", variant.index}};
  return p;
}

Evaluator surface_toxicity_evaluator(const eval::RuleSet& rules) {
  auto scorer = eval::LexiconScorer::surface(rules);
  return [scorer](std::string_view prompt) { return eval::toxicity(prompt, *scorer); };
}

CAResult select_prompt(const Question& question, std::vector<AmbiguityVariant> variants, const CAConfig& config,
                       const Evaluator& evaluator) {
  config.validate();
  if (variants.empty()) throw Error(ErrorCode::ZeroVariants, "no variants for " + question.id);
  const auto& tmpls = config.normal_templates;
  const std::size_t pairs = variants.size() * tmpls.size();
  double last = 0.0;
  for (std::size_t r = 0; r < config.max_retries; ++r) {
    const auto& v = variants[(r % pairs) / tmpls.size()];
    const auto& t = tmpls[(r % pairs) % tmpls.size()];
    auto p = embed_variant(v, t);
    last = evaluator(p.text);
    if (last <= config.delta_ca) {
      CAResult res;
      p.question_id = question.id;
      p.provenance["question_id"] = question.id;
      p.provenance["evaluator_score"] = last;
      p.provenance["retry_count"] = r + 1;
      res.prompt = std::move(p);
      res.evaluator_score = last;
      res.retries = r + 1;
      res.variants = std::move(variants);
      return res;
    }
  }
  throw Error(ErrorCode::ThresholdNotMet, question.id + ": evaluator stayed above " + std::to_string(config.delta_ca) +
                                              " for " + std::to_string(config.max_retries) + " tries (last " +
                                              std::to_string(last) + ")");
}

CAResult generate_ca_prompt(const Question& question, const CAConfig& config, client::ModelClient& rewriter,
                            const Evaluator& evaluator) {
  config.validate();
  auto variants = rewrite_ambiguous(question.text, config.variants_per_question, rewriter);
  return select_prompt(question, std::move(variants), config, evaluator);
}

nlohmann::json AmbiguityReport::to_json() const {
  nlohmann::json j{{"ambiguous", ambiguous}, {"single_sentence", single_sentence}, {"malicious", malicious}};
  j["parts"] = nlohmann::json::array();
  for (const auto& p : parts) j["parts"].push_back({{"text", p.text}, {"tox", p.tox}, {"target", p.target}});
  return j;
}

AmbiguityReport check_ambiguity(std::string_view query, const sim::SimConfig& config) {
  AmbiguityReport r;
  r.single_sentence = sim::sentences(query).size() == 1;
  std::set<std::string> targets;
  for (const auto& s : sim::decompose(query)) {
    SubSentenceReport p{s, config.tox(s), sim::canonical_target(s)};
    targets.insert(p.target);
    if (p.tox > config.theta) r.malicious = true;
    r.parts.push_back(std::move(p));
  }
  r.ambiguous = r.single_sentence && r.parts.size() > 1 && targets.size() == r.parts.size();
  return r;
}

nlohmann::json CACorpus::counts() const {
  return {{"questions", questions},
          {"ambiguous_outputs", variants},
          {"candidates", candidate_prompts},
          {"prompts", results.size()},
          {"failures", failures.size()}};
}

CACorpus generate_ca_corpus(const std::vector<Question>& questions, const CAConfig& config,
                            client::ModelClient& rewriter, const Evaluator& evaluator) {
  config.validate();
  std::vector<std::optional<CAResult>> slots(questions.size());
  std::vector<std::string> errors(questions.size());
  std::vector<std::size_t> nvariants(questions.size(), 0);
  parallel_for(questions.size(), config.parallelism, [&](std::size_t i) {
    try {
      auto variants = rewrite_ambiguous(questions[i].text, config.variants_per_question, rewriter);
      nvariants[i] = variants.size();
      slots[i] = select_prompt(questions[i], std::move(variants), config, evaluator);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  CACorpus c;
  c.questions = questions.size();
  for (std::size_t i = 0; i < questions.size(); ++i) {
    c.variants += nvariants[i];
    c.candidate_prompts += nvariants[i] * config.normal_templates.size();
    if (slots[i]) {
      c.results.push_back(std::move(*slots[i]));
    } else {
      c.failures[questions[i].id] = errors[i];
    }
  }
  return c;
}

}  // namespace obfuskit::ca
