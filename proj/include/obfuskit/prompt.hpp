#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "obfuskit/client.hpp"
#include "obfuskit/eval.hpp"

namespace obfuskit {

enum class Method { OI, CA, Baseline };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct Question {
  std::string id;
  std::string text;
  std::string category;
  bool restricted_intent = true;
  std::vector<std::string> expected_indicators;
};

struct PseudoLegalPrompt {
  std::string text;
  std::string embedded_question;
  std::string question_id;
  std::string template_id;
  Method method = Method::OI;
  nlohmann::json provenance = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// Classification metadata for a question sent to `target`. SIM targets add
// the simulator's ANSWER forms of the restricted sub-sentences of `embedded`
// (the question as it appears in the prompt; defaults to q.text).
eval::QuestionMeta question_meta(const Question& q, const client::ModelTarget& target,
                                 std::string_view embedded = {});

// Hash of the provenance object; stable across runs.
std::string provenance_hash(const nlohmann::json& provenance);

}  // namespace obfuskit
