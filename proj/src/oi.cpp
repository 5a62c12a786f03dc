#include "obfuskit/oi.hpp"

#include <fstream>
#include <sstream>

#include "obfuskit/error.hpp"
#include "obfuskit/parallel.hpp"
#include "obfuskit/text.hpp"

namespace obfuskit {
extern const char* const kBuiltinPrefabsJson;
}

namespace obfuskit::oi {

std::vector<std::string> MarkedSentence::stripped() const {
  std::vector<std::string> out = words;
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(marker_pos));
  return out;
}

std::string MarkedSentence::text() const { return text::render_words(words); }

MarkedSentence insert_marker_at(const ga::Individual& individual, std::size_t pos) {
  if (individual.words.empty()) throw Error(ErrorCode::EmptyInput, "cannot mark an empty individual");
  if (pos > individual.words.size()) throw Error(ErrorCode::InvalidConfig, "marker position out of range");
  MarkedSentence m;
  m.words = individual.words;
  m.words.insert(m.words.begin() + static_cast<std::ptrdiff_t>(pos), std::string(kMarker));
  m.marker_pos = pos;
  m.seed_ref = individual.seed_ref;
  m.origin = individual.lineage;
  return m;
}

MarkedSentence insert_marker(const ga::Individual& individual, Rng& rng) {
  if (individual.words.empty()) throw Error(ErrorCode::EmptyInput, "cannot mark an empty individual");
  return insert_marker_at(individual, rng.uniform_index(individual.words.size() + 1));
}

void PrefabTemplate::validate(bool allow_empty) const {
  if (id.empty()) throw Error(ErrorCode::InvalidConfig, "prefab without id");
  if (body_slot_marker.empty()) throw Error(ErrorCode::InvalidConfig, "prefab " + id + ": empty body_slot_marker");
  if (!allow_empty && (prefix.empty() || output_controls.empty())) {
    throw Error(ErrorCode::InvalidConfig, "prefab " + id + ": prefix and output_controls must be non-empty");
  }
  if (count_markers(prefix) + count_markers(output_controls) > 0) {
    throw Error(ErrorCode::MultipleMarkers, "prefab " + id + " already contains " + std::string(kMarker));
  }
}

std::vector<PrefabTemplate> load_prefabs(std::string_view json_text) {
  std::vector<PrefabTemplate> out;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& e : j) {
      PrefabTemplate p;
      p.id = e.at("id").get<std::string>();
      p.prefix = e.value("prefix", std::string());
      p.body_slot_marker = e.value("body_slot_marker", p.body_slot_marker);
      p.output_controls = e.value("output_controls", std::string());
      p.validate();
      out.push_back(std::move(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("prefabs: ") + e.what());
  }
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "prefabs: empty list");
  return out;
}

std::vector<PrefabTemplate> load_prefabs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_prefabs(ss.str());
}

const std::vector<PrefabTemplate>& builtin_prefabs() {
  static const auto kPrefabs = load_prefabs(kBuiltinPrefabsJson);
  return kPrefabs;
}

namespace {

bool replace_first(std::string& s, const std::string& what, const std::string& with) {
  const auto pos = s.find(what);
  if (pos == std::string::npos) return false;
  s.replace(pos, what.size(), with);
  return true;
}

}  // namespace

std::string apply_template(const MarkedSentence& marked, const PrefabTemplate& prefab) {
  const std::string body = marked.text();
  std::string prefix = prefab.prefix;
  std::string controls = prefab.output_controls;
  const bool slotted = replace_first(prefix, prefab.body_slot_marker, body) ||
                       replace_first(controls, prefab.body_slot_marker, body);
  const std::string* parts[] = {&prefix, slotted ? nullptr : &body, &controls};
  std::string out;
  for (const std::string* part : parts) {
    if (!part || part->empty()) continue;
    if (!out.empty()) out += ' ';
    out += *part;
  }
  return out;
}

nlohmann::json CandidateTemplate::to_json() const {
  return {{"id", id},         {"text", text},       {"prefab_id", prefab_id},
          {"seed_ref", seed_ref}, {"lineage", hex64(lineage)}, {"marker_pos", marker_pos}};
}

std::size_t count_markers(std::string_view text) {
  std::size_t n = 0;
  for (auto pos = text.find(kMarker); pos != std::string_view::npos; pos = text.find(kMarker, pos + kMarker.size())) ++n;
  return n;
}

PseudoLegalPrompt assemble_prompt(const CandidateTemplate& tmpl, const Question& question) {
  const auto n = count_markers(tmpl.text);
  if (n == 0) throw Error(ErrorCode::MissingMarker, "template " + tmpl.id + " has no " + std::string(kMarker));
  if (n > 1) throw Error(ErrorCode::MultipleMarkers, "template " + tmpl.id + " has " + std::to_string(n) + " markers");
  PseudoLegalPrompt p;
  p.text = tmpl.text;
  p.text.replace(p.text.find(kMarker), kMarker.size(), question.text);
  p.embedded_question = question.text;
  p.question_id = question.id;
  p.template_id = tmpl.id;
  p.method = Method::OI;
  p.provenance = {{"method", "OI"},
                  {"question_id", question.id},
                  {"template_id", tmpl.id},
                  {"prefab_id", tmpl.prefab_id},
                  {"seed_ref", tmpl.seed_ref},
                  {"lineage", hex64(tmpl.lineage)}};
  return p;
}

FilterResult filter_templates(const std::vector<CandidateTemplate>& candidates, const Question& probe,
                              client::ModelClient& client, const eval::RuleSet& rules, std::size_t parallelism) {
  if (probe.text.empty()) throw Error(ErrorCode::EmptyQuery, "empty probe question");
  FilterResult r;
  r.verdicts.resize(candidates.size());
  const auto meta = question_meta(probe, client.target());
  parallel_for(candidates.size(), parallelism, [&](std::size_t i) {
    auto& v = r.verdicts[i];
    v.candidate = candidates[i];
    try {
      const auto prompt = assemble_prompt(candidates[i], probe);
      const auto ex = client.complete(prompt.text);
      v.outcome = eval::classify(ex.response, meta, rules);
    } catch (const Error& e) {
      v.error = e.what();
    }
  });
  std::size_t failures = 0;
  for (const auto& v : r.verdicts) {
    if (!v.error.empty()) ++failures;
    if (v.outcome && v.outcome->cls == eval::OutcomeClass::Success) r.validated.push_back(v.candidate);
  }
  if (!candidates.empty() && failures == candidates.size()) {
    throw Error(ErrorCode::TargetUnavailable, "every probe failed: " + r.verdicts.front().error);
  }
  return r;
}

nlohmann::json OICorpus::counts() const {
  return {{"seeds", evolution.survivors_per_seed.size()},
          {"templates", templates.size()},
          {"validated_templates", filtered.validated.size()},
          {"candidates", candidate_prompts},
          {"prompts", prompts.size() - unpaired.size()},
          {"unpaired", unpaired.size()}};
}

OICorpus generate_oi_corpus(const std::vector<std::string>& seeds, const std::vector<PrefabTemplate>& prefabs,
                            const std::vector<Question>& questions, client::ModelClient& client,
                            const OIConfig& config, const eval::RuleSet& rules, const ga::LineageSink& trace) {
  if (seeds.empty()) throw Error(ErrorCode::EmptySeedSet, "no seed sentences");
  if (prefabs.empty()) throw Error(ErrorCode::InvalidConfig, "no prefab templates");
  OICorpus c;
  ga::GAConfig gcfg = config.ga;
  gcfg.rng_seed = config.rng_seed;
  c.evolution = ga::evolve(seeds, gcfg, trace);

  Rng mark_rng(hash_combine(config.rng_seed, fnv1a64("insert_marker")));
  for (std::size_t s = 0; s < c.evolution.survivors.size(); ++s) {
    const auto& ind = c.evolution.survivors[s];
    const auto marked = insert_marker(ind, mark_rng);
    for (const auto& prefab : prefabs) {
      CandidateTemplate t;
      t.text = apply_template(marked, prefab);
      t.prefab_id = prefab.id;
      t.seed_ref = ind.seed_ref;
      t.lineage = ind.lineage;
      t.marker_pos = marked.marker_pos;
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04zu", c.templates.size());
      t.id = "oi-" + std::string(buf) + "-" + hex64(fnv1a64(prefab.id + "\n" + t.text)).substr(0, 8);
      c.templates.push_back(std::move(t));
    }
  }

  c.filtered = filter_templates(c.templates, config.probe, client, rules, config.parallelism);
  c.candidate_prompts = questions.size() * c.templates.size();
  const auto& valid = c.filtered.validated;
  if (valid.empty()) throw Error(ErrorCode::NoSurvivors, "no template passed the probe filter");

  Rng pair_rng(hash_combine(config.rng_seed, fnv1a64("pairing")));
  const std::size_t offset = pair_rng.uniform_index(valid.size());
  std::vector<std::optional<PseudoLegalPrompt>> picked(questions.size());
  parallel_for(questions.size(), config.parallelism, [&](std::size_t qi) {
    const auto& q = questions[qi];
    const auto meta = question_meta(q, client.target());
    for (std::size_t k = 0; k < valid.size(); ++k) {
      const auto& t = valid[(offset + qi + k) % valid.size()];
      auto p = assemble_prompt(t, q);
      try {
        const auto ex = client.complete(p.text);
        if (eval::classify(ex.response, meta, rules).cls == eval::OutcomeClass::Success) {
          p.provenance["paired"] = true;
          p.provenance["pairing_tries"] = k + 1;
          picked[qi] = std::move(p);
          return;
        }
      } catch (const Error&) {
      }
    }
  });
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    if (!picked[qi]) {
      c.unpaired.push_back(questions[qi].id);
      picked[qi] = assemble_prompt(valid[(offset + qi) % valid.size()], questions[qi]);
      picked[qi]->provenance["paired"] = false;
      picked[qi]->provenance["pairing_tries"] = valid.size();
    }
    c.prompts.push_back(std::move(*picked[qi]));
  }
  return c;
}

}  // namespace obfuskit::oi
