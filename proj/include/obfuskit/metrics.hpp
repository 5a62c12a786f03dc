#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obfuskit/text.hpp"

namespace obfuskit::metrics {

struct DistanceReport {
  std::size_t value = 0;
  // value / max(len(a), len(b)); 0 when both are empty.
  double normalized = 0.0;

  bool operator==(const DistanceReport&) const = default;
};

namespace detail {

inline DistanceReport make_report(std::size_t value, std::size_t n, std::size_t m) {
  const std::size_t longest = std::max(n, m);
  return DistanceReport{value, longest == 0 ? 0.0 : static_cast<double>(value) / static_cast<double>(longest)};
}

// Bit-parallel distance (Hyyro's formulation of Myers), pattern b of at most 64 symbols.
template <class T>
std::size_t levenshtein_bits(std::span<const T> a, std::span<const T> b) {
  const std::size_t m = b.size();
  const std::uint64_t last = std::uint64_t{1} << (m - 1);
  std::uint64_t vp = ~std::uint64_t{0};
  std::uint64_t vn = 0;
  std::size_t dist = m;
  for (const T& x : a) {
    std::uint64_t eq = 0;
    for (std::size_t j = 0; j < m; ++j) eq |= static_cast<std::uint64_t>(b[j] == x) << j;
    const std::uint64_t d0 = (((eq & vp) + vp) ^ vp) | eq | vn;
    std::uint64_t hp = vn | ~(d0 | vp);
    std::uint64_t hn = d0 & vp;
    dist += (hp & last) != 0;
    dist -= (hn & last) != 0;
    hp = (hp << 1) | 1;
    hn <<= 1;
    vp = hn | ~(d0 | hp);
    vn = hp & d0;
  }
  return dist;
}

template <class T>
std::size_t levenshtein_dp(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<std::size_t> prev(m + 1);
  std::vector<std::size_t> cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

}  // namespace detail

// Unit-cost insert/delete/substitute distance. Bit-parallel when one side
// fits in 64 symbols, two-row DP otherwise.
template <class T>
DistanceReport levenshtein(std::span<const T> a, std::span<const T> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0 || m == 0) return detail::make_report(n + m, n, m);
  std::size_t value;
  if (m <= 64) {
    value = detail::levenshtein_bits(a, b);
  } else if (n <= 64) {
    value = detail::levenshtein_bits(b, a);
  } else {
    value = detail::levenshtein_dp(a, b);
  }
  return detail::make_report(value, n, m);
}

// Reference DP, exposed for cross-checking the fast path.
template <class T>
DistanceReport levenshtein_reference(std::span<const T> a, std::span<const T> b) {
  return detail::make_report(detail::levenshtein_dp(a, b), a.size(), b.size());
}

template <class T>
DistanceReport levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  return levenshtein(std::span<const T>(a), std::span<const T>(b));
}

// Character-level convenience overload.
DistanceReport levenshtein(std::string_view a, std::string_view b);

// Tree-string distance between the shallow parses of variant and original.
std::size_t obfuscation_degree(std::string_view variant, std::string_view original,
                               const text::TextModel& model = text::TextModel::default_model());

// Word-token Levenshtein (D_edit); surfaces compared exactly.
DistanceReport edit_distance(std::string_view variant, std::string_view original);

struct Weights {
  double w1 = 0.7;  // obscurity
  double w2 = 0.3;  // closeness to the seed

  bool operator==(const Weights&) const = default;
};

struct FitnessBreakdown {
  double r_ob = 0.0;
  double r_l = 0.0;
  double f_score = 0.0;
  Weights weights;
  std::size_t ob = 0;  // raw tree-string distance behind r_ob

  bool operator==(const FitnessBreakdown&) const = default;
};

double fitness_score(double r_ob, double r_l, const Weights& w);

// Precomputed seed side of the fitness function, reused across a GA run.
class FitnessReference {
 public:
  FitnessReference(std::vector<std::string> seed_words, Weights weights,
                   const text::TextModel& model = text::TextModel::default_model());

  FitnessBreakdown evaluate(std::span<const std::string> candidate_words) const;
  std::size_t obfuscation(std::span<const std::string> candidate_words) const;
  DistanceReport edit(std::span<const std::string> candidate_words) const;

  const std::vector<std::string>& seed_words() const { return seed_words_; }
  const Weights& weights() const { return weights_; }

 private:
  text::TreeString tree_string_of(std::span<const std::string> words) const;

  std::vector<std::string> seed_words_;
  Weights weights_;
  const text::TextModel* model_;
  text::TreeString seed_tree_;
};

FitnessBreakdown fitness(std::string_view candidate, std::string_view seed, const Weights& weights,
                         const text::TextModel& model = text::TextModel::default_model());

// Lower-cased non-punctuation word tokens; the vocabulary of similarity().
std::vector<std::string> word_tokens(std::string_view text);

// Term-frequency cosine over word_tokens(). 0 whenever either side is empty.
double similarity(std::string_view a, std::string_view b);

using SimilarityFn = std::function<double(std::string_view, std::string_view)>;

// Sim(actual, target): actual is the model output, target the reference response.
double effective_response_rate(std::string_view actual, std::string_view target,
                               const SimilarityFn& sim = similarity);

// Hallucination-mixed estimate target_len / (nonsense_len + target_len); 0 when both are 0.
double r_eff_length_ratio(std::size_t target_len, std::size_t nonsense_len);

struct MergeComponent {
  std::string variant;
  std::string original;
  std::size_t ob = 0;
};

// Tracked concatenation: OB of the merge is the sum of per-component OB.
class MergeLedger {
 public:
  // Computes ob with the default text model.
  void add(std::string variant, std::string original);
  // Stores a caller-supplied ob; merged_obfuscation() verifies it.
  void add_recorded(std::string variant, std::string original, std::size_t ob);

  const std::vector<MergeComponent>& components() const { return components_; }
  std::size_t total() const;
  std::string merged_variant() const;
  std::string merged_original() const;

 private:
  std::vector<MergeComponent> components_;
};

// Throws InconsistentLedger if any stored ob disagrees with recomputation.
std::size_t merged_obfuscation(const MergeLedger& ledger,
                               const text::TextModel& model = text::TextModel::default_model());

}  // namespace obfuskit::metrics
