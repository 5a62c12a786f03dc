#include "obfuskit/prompt.hpp"

#include "obfuskit/error.hpp"
#include "obfuskit/rng.hpp"

namespace obfuskit {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::OI: return "OI";
    case Method::CA: return "CA";
    case Method::Baseline: return "BASELINE";
  }
  return "OI";
}

Method parse_method(std::string_view s) {
  if (s == "OI" || s == "oi") return Method::OI;
  if (s == "CA" || s == "ca") return Method::CA;
  if (s == "BASELINE" || s == "baseline") return Method::Baseline;
  throw Error(ErrorCode::InvalidConfig, "unknown method " + std::string(s));
}

nlohmann::json PseudoLegalPrompt::to_json() const {
  return {{"text", text},
          {"embedded_question", embedded_question},
          {"question_id", question_id},
          {"template_id", template_id},
          {"method", to_string(method)},
          {"provenance", provenance}};
}

eval::QuestionMeta question_meta(const Question& q, const client::ModelTarget& target, std::string_view embedded) {
  eval::QuestionMeta m;
  m.id = q.id;
  m.category = q.category;
  m.restricted_intent = q.restricted_intent;
  m.indicators = q.expected_indicators;
  if (target.kind == client::TargetKind::Sim) {
    for (auto& s : sim::restricted_indicators(embedded.empty() ? std::string_view(q.text) : embedded, target.sim)) m.indicators.push_back(std::move(s));
  }
  return m;
}

std::string provenance_hash(const nlohmann::json& provenance) { return hex64(fnv1a64(provenance.dump())); }

}  // namespace obfuskit
