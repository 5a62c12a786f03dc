#include "obfuskit/sim.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "json.hpp"
#include "obfuskit/error.hpp"
#include "obfuskit/metrics.hpp"
#include "obfuskit/rng.hpp"

namespace obfuskit::sim {

namespace {

enum class Cmp { Below, Above };

Cmp compare(double value, double threshold, TieMode ties, std::string_view what) {
  if (value > threshold) return Cmp::Above;
  if (value < threshold) return Cmp::Below;
  if (ties == TieMode::Strict) {
    throw Error(ErrorCode::BoundaryTie, std::string(what) + " equals its threshold " + std::to_string(threshold));
  }
  return Cmp::Below;
}

bool is_connective(const std::string& w) {
  if (w == ";") return true;
  const auto l = text::to_lower(w);
  return l == "and" || l == "or" || l == "while";
}

bool is_sentence_end(const std::string& w) { return w == "." || w == "!" || w == "?"; }

std::vector<std::string> split_lines(std::string_view q) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= q.size()) {
    auto end = q.find('\n', pos);
    if (end == std::string_view::npos) end = q.size();
    out.emplace_back(q.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

// Sentences as word lists; quote state does not carry across lines.
std::vector<std::vector<std::string>> sentence_words(std::string_view query) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : split_lines(query)) {
    std::vector<std::string> cur;
    bool quoted = false;
    for (auto& w : text::split_surfaces(line)) {
      if (w == "\"") quoted = !quoted;
      const bool end = !quoted && is_sentence_end(w);
      cur.push_back(std::move(w));
      if (end) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
  }
  return out;
}

bool only_punct(const std::vector<std::string>& words) {
  return std::all_of(words.begin(), words.end(),
                     [](const std::string& w) { return w.size() == 1 && text::is_punct_char(w[0]); });
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Split: return "SPLIT";
    case Branch::Target: return "TARGET";
    case Branch::Illegal: return "ILLEGAL";
  }
  return "TARGET";
}

std::string_view to_string(PartKind k) { return k == PartKind::Nonsense ? "NONSENSE" : "TARGET"; }

SimConfig SimConfig::with_rules(const eval::RuleSet& rules) {
  SimConfig cfg;
  auto scorer = eval::LexiconScorer::reading(rules);
  cfg.tox_scorer = scorer;
  cfg.filter_rules.push_back(FilterRule{"lexicon", [scorer](std::string_view t) { return scorer->score(t); }});
  return cfg;
}

void SimConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "simulator: " + what); };
  if (tau < 0.0) bad("tau must be >= 0");
  if (theta < 0.0 || theta > 1.0) bad("theta must lie in [0,1]");
  if (rho < 0.0 || rho > 1.0) bad("rho must lie in [0,1]");
  if (!(ob_scale > 0.0)) bad("ob_scale must be > 0");
  if (filter_rules.empty()) bad("filter_rules must be non-empty");
  if (!tox_scorer) bad("tox_scorer missing");
}

double SimConfig::ob(std::string_view t) const { return ob_scorer ? ob_scorer(t) : obfuscation_estimate(t, ob_scale); }

double SimConfig::tox(std::string_view t) const { return eval::toxicity(t, *tox_scorer); }

std::size_t SimPart::length() const { return metrics::word_tokens(text).size(); }

std::string SimResponse::to_json() const {
  nlohmann::json j;
  j["text"] = text;
  j["branch"] = to_string(branch);
  j["query_ob"] = query_ob;
  j["query_tox"] = query_tox;
  j["parts"] = nlohmann::json::array();
  for (const auto& p : parts) {
    j["parts"].push_back({{"sub_sentence", p.sub_sentence}, {"kind", to_string(p.kind)}, {"text", p.text}});
  }
  return j.dump();
}

std::vector<std::string> sentences(std::string_view query) {
  std::vector<std::string> out;
  for (const auto& s : sentence_words(query)) {
    if (!only_punct(s)) out.push_back(text::render_words(s));
  }
  if (out.empty()) throw Error(ErrorCode::EmptyQuery, "nothing to decompose");
  return out;
}

std::vector<std::string> decompose(std::string_view query) {
  std::vector<std::string> out;
  for (const auto& sentence : sentence_words(query)) {
    std::vector<std::string> cur;
    bool quoted = false;
    auto flush = [&] {
      if (!cur.empty() && !only_punct(cur)) out.push_back(text::render_words(cur));
      cur.clear();
    };
    for (const auto& w : sentence) {
      if (w == "\"") quoted = !quoted;
      if (!quoted && is_connective(w)) {
        flush();
        continue;
      }
      cur.push_back(w);
    }
    flush();
  }
  if (out.empty()) throw Error(ErrorCode::EmptyQuery, "nothing to decompose");
  return out;
}

FilterVerdict content_filter(std::string_view content, const SimConfig& config) {
  if (config.filter_rules.empty()) throw Error(ErrorCode::InvalidConfig, "simulator: no filter rules");
  double agg = 1.0;
  for (const auto& r : config.filter_rules) agg = std::min(agg, std::clamp(r.score(content), 0.0, 1.0));
  return FilterVerdict{agg >= config.rho, agg};
}

double obfuscation_estimate(std::string_view t, double scale, const text::TextModel& model) {
  const auto toks = model.tokens(t);
  if (toks.empty()) throw Error(ErrorCode::EmptyInput, "obfuscation_estimate: empty text");
  const auto tree = text::parse_shallow(toks);
  std::size_t frag = 0;
  for (const auto& c : tree.chunks) {
    if (c.label == text::ChunkLabel::Frag) frag += c.leaves.size();
  }
  return scale * static_cast<double>(frag) / static_cast<double>(toks.size());
}

std::string canonical_target(std::string_view sub_sentence) {
  return "ANSWER[" + text::normalize_text(sub_sentence) + "]";
}

std::string filler_text(std::string_view sub_sentence, std::size_t length) {
  const std::uint64_t base = fnv1a64(text::normalize_text(sub_sentence));
  std::string out;
  for (std::size_t i = 0; i < length; ++i) {
    if (i) out += ' ';
    out += "nz" + hex64(splitmix64(base + i)).substr(0, 6);
  }
  return out;
}

SimResponse respond(std::string_view query, const SimConfig& config) {
  config.validate();
  const auto subs = decompose(query);

  SimResponse r;
  if (config.gate == GateMode::Pre && content_filter(query, config).flagged) {
    r.branch = Branch::Illegal;
    r.text = std::string(kRefusal);
    r.query_tox = config.tox(query);
    return r;
  }

  r.query_ob = config.ob(query);
  r.query_tox = config.tox(query);
  auto join_parts = [&] {
    for (const auto& p : r.parts) {
      if (p.text.empty()) continue;
      if (!r.text.empty()) r.text += ' ';
      r.text += p.text;
    }
  };

  if (compare(r.query_ob, config.tau, config.ties, "Ob(Q)") == Cmp::Above) {
    r.branch = Branch::Split;
    for (const auto& s : subs) {
      if (compare(config.ob(s), config.tau, config.ties, "Ob(s_i)") == Cmp::Above) {
        const std::string t =
            config.nonsense.mode == NonsenseMode::Filler ? filler_text(s, config.nonsense.length) : std::string();
        r.parts.push_back(SimPart{s, PartKind::Nonsense, t});
      } else {
        r.parts.push_back(SimPart{s, PartKind::Target, canonical_target(s)});
      }
    }
    join_parts();
    return r;
  }

  if (compare(r.query_tox, config.theta, config.ties, "tox(Q)") == Cmp::Above) {
    r.branch = Branch::Illegal;
    r.text = std::string(kRefusal);
    return r;
  }
  r.branch = Branch::Target;
  for (const auto& s : subs) r.parts.push_back(SimPart{s, PartKind::Target, canonical_target(s)});
  join_parts();
  return r;
}

REffReport r_eff_against_sim(std::string_view s_target, std::string_view query, const SimConfig& config) {
  const auto resp = respond(query, config);
  const std::string target = canonical_target(s_target);
  REffReport rep;
  rep.measured = metrics::similarity(resp.text, target);
  for (const auto& p : resp.parts) {
    if (p.kind == PartKind::Target && p.text == target) {
      rep.target_len += p.length();
    } else {
      rep.other_len += p.length();
    }
  }
  rep.predicted = metrics::r_eff_length_ratio(rep.target_len, rep.other_len);
  return rep;
}

std::vector<std::string> restricted_indicators(std::string_view prompt, const SimConfig& config) {
  std::vector<std::string> out;
  for (const auto& s : decompose(prompt)) {
    if (config.tox(s) > config.theta) out.push_back(canonical_target(s));
  }
  return out;
}

std::string simulate_rewrites(std::string_view question, std::size_t k, const eval::RuleSet& rules) {
  static constexpr std::array<std::string_view, 14> kDecoyWords{
      "the", "of", "very", "softly", "upon", "gently", "quite", "rather",
      "beneath", "towards", "somewhat", "almost", "perhaps", "these"};
  static constexpr std::array<std::string_view, 3> kConnectives{"while", "or", "and"};

  std::vector<std::pair<std::string, std::string>> aliases;
  for (const auto& r : rules.of_kind(eval::RuleKind::Implicit)) {
    if (r.alias_of) aliases.emplace_back(text::to_lower(*r.alias_of), r.pattern);
  }
  auto words = text::split_surfaces(question);
  for (auto& w : words) {
    const auto l = text::to_lower(w);
    for (const auto& [surface, alias] : aliases) {
      if (l == surface) {
        w = alias;
        break;
      }
    }
  }
  const std::string core = text::render_words(words);
  const std::uint64_t base = fnv1a64(question);

  std::set<std::string> seen;
  std::string out;
  std::size_t salt = 0;
  for (std::size_t j = 0; j < k; ++j) {
    std::string variant;
    do {
      std::string decoy;
      for (std::size_t i = 0; i < 10; ++i) {
        if (i) decoy += ' ';
        decoy += kDecoyWords[splitmix64(hash_combine(base, salt * 131 + i)) % kDecoyWords.size()];
      }
      ++salt;
      variant = decoy + " " + std::string(kConnectives[j % kConnectives.size()]) + " " + core;
    } while (!seen.insert(variant).second);
    out += std::to_string(j + 1) + ". " + variant + "\n";
  }
  return out;
}

}  // namespace obfuskit::sim
