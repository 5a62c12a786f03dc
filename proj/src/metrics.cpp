#include "obfuskit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "obfuskit/error.hpp"

namespace obfuskit::metrics {

DistanceReport levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(std::span<const char>(a.data(), a.size()), std::span<const char>(b.data(), b.size()));
}

std::size_t obfuscation_degree(std::string_view variant, std::string_view original, const text::TextModel& model) {
  if (text::split_surfaces(variant).empty() || text::split_surfaces(original).empty()) {
    throw Error(ErrorCode::EmptyInput, "obfuscation_degree needs two non-empty sentences");
  }
  const auto a = model.tree_string(variant);
  const auto b = model.tree_string(original);
  return levenshtein(a.symbols, b.symbols).value;
}

DistanceReport edit_distance(std::string_view variant, std::string_view original) {
  return levenshtein(text::split_surfaces(variant), text::split_surfaces(original));
}

double fitness_score(double r_ob, double r_l, const Weights& w) { return r_ob * w.w1 + (1.0 - r_l) * w.w2; }

FitnessReference::FitnessReference(std::vector<std::string> seed_words, Weights weights, const text::TextModel& model)
    : seed_words_(std::move(seed_words)), weights_(weights), model_(&model) {
  if (seed_words_.empty()) throw Error(ErrorCode::EmptyInput, "fitness: empty seed");
  if (weights_.w1 < 0.0 || weights_.w2 < 0.0) throw Error(ErrorCode::InvalidConfig, "fitness: negative weight");
  seed_tree_ = tree_string_of(seed_words_);
}

text::TreeString FitnessReference::tree_string_of(std::span<const std::string> words) const {
  std::vector<text::Token> toks;
  toks.reserve(words.size());
  for (const auto& w : words) toks.push_back(text::Token{w, model_->lexicon().tag_word(w)});
  return text::serialize_tree(text::parse_shallow(toks));
}

std::size_t FitnessReference::obfuscation(std::span<const std::string> candidate_words) const {
  if (candidate_words.empty()) throw Error(ErrorCode::EmptyInput, "fitness: empty candidate");
  return levenshtein(tree_string_of(candidate_words).symbols, seed_tree_.symbols).value;
}

DistanceReport FitnessReference::edit(std::span<const std::string> candidate_words) const {
  return levenshtein(candidate_words, std::span<const std::string>(seed_words_));
}

FitnessBreakdown FitnessReference::evaluate(std::span<const std::string> candidate_words) const {
  if (candidate_words.empty()) throw Error(ErrorCode::EmptyInput, "fitness: empty candidate");
  const auto cand_tree = tree_string_of(candidate_words);
  const std::size_t ob = levenshtein(cand_tree.symbols, seed_tree_.symbols).value;
  const std::size_t tree_len = std::max(cand_tree.size(), seed_tree_.size());
  const auto words = edit(candidate_words);

  FitnessBreakdown fb;
  fb.ob = ob;
  fb.weights = weights_;
  fb.r_ob = static_cast<double>(ob) / static_cast<double>(tree_len);
  fb.r_l = words.normalized;
  fb.f_score = fitness_score(fb.r_ob, fb.r_l, weights_);
  return fb;
}

FitnessBreakdown fitness(std::string_view candidate, std::string_view seed, const Weights& weights,
                         const text::TextModel& model) {
  auto seed_words = text::split_surfaces(seed);
  if (seed_words.empty()) throw Error(ErrorCode::EmptyInput, "fitness: empty seed");
  const FitnessReference ref(std::move(seed_words), weights, model);
  return ref.evaluate(text::split_surfaces(candidate));
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& s : text::split_surfaces(text)) {
    if (s.size() == 1 && text::is_punct_char(s[0])) continue;
    out.push_back(text::to_lower(s));
  }
  return out;
}

double similarity(std::string_view a, std::string_view b) {
  std::map<std::string, long long> ta;
  std::map<std::string, long long> tb;
  for (auto& w : word_tokens(a)) ++ta[std::move(w)];
  for (auto& w : word_tokens(b)) ++tb[std::move(w)];
  if (ta.empty() || tb.empty()) return 0.0;

  long long dot = 0;
  long long na = 0;
  long long nb = 0;
  for (const auto& [w, c] : ta) {
    na += c * c;
    if (auto it = tb.find(w); it != tb.end()) dot += c * it->second;
  }
  for (const auto& [w, c] : tb) nb += c * c;
  if (dot == 0) return 0.0;
  // Integer norms keep Sim(x, x) exactly 1: sqrt of a perfect square is exact.
  const double v = static_cast<double>(dot) / std::sqrt(static_cast<double>(na) * static_cast<double>(nb));
  return std::clamp(v, 0.0, 1.0);
}

double effective_response_rate(std::string_view actual, std::string_view target, const SimilarityFn& sim) {
  return sim(actual, target);
}

double r_eff_length_ratio(std::size_t target_len, std::size_t nonsense_len) {
  const std::size_t total = target_len + nonsense_len;
  if (total == 0) return 0.0;
  return static_cast<double>(target_len) / static_cast<double>(total);
}

void MergeLedger::add(std::string variant, std::string original) {
  const std::size_t ob = obfuscation_degree(variant, original);
  components_.push_back(MergeComponent{std::move(variant), std::move(original), ob});
}

void MergeLedger::add_recorded(std::string variant, std::string original, std::size_t ob) {
  components_.push_back(MergeComponent{std::move(variant), std::move(original), ob});
}

std::size_t MergeLedger::total() const {
  std::size_t sum = 0;
  for (const auto& c : components_) sum += c.ob;
  return sum;
}

std::string MergeLedger::merged_variant() const {
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out += ' ';
    out += c.variant;
  }
  return out;
}

std::string MergeLedger::merged_original() const {
  std::string out;
  for (const auto& c : components_) {
    if (!out.empty()) out += ' ';
    out += c.original;
  }
  return out;
}

std::size_t merged_obfuscation(const MergeLedger& ledger, const text::TextModel& model) {
  for (const auto& c : ledger.components()) {
    const std::size_t actual = obfuscation_degree(c.variant, c.original, model);
    if (actual != c.ob) {
      throw Error(ErrorCode::InconsistentLedger, "component '" + c.variant + "' records ob " +
                                                     std::to_string(c.ob) + " but recomputes to " +
                                                     std::to_string(actual));
    }
  }
  return ledger.total();
}

}  // namespace obfuskit::metrics
