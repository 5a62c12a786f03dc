#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "obfuskit/metrics.hpp"
#include "obfuskit/rng.hpp"

namespace obfuskit::ga {

struct MutationRates {
  double duplication = 0.3;
  double swap = 0.3;
  double deletion = 0.2;
};

struct GAConfig {
  std::size_t population_size = 50;
  std::size_t max_iterations = 100;
  metrics::Weights weights{0.7, 0.3};
  MutationRates mutation_rates;
  double crossover_rate = 0.5;
  // Survivors need tree-string OB > tau and normalized word edit ratio < delta_edit.
  double tau = 3.0;
  double delta_edit = 0.5;
  std::size_t retain_per_seed = 10;
  std::uint64_t rng_seed = 0;

  // Throws InvalidConfig.
  void validate() const;
};

struct Individual {
  std::vector<std::string> words;
  std::size_t seed_ref = 0;
  std::optional<metrics::FitnessBreakdown> fitness;
  std::uint64_t lineage = 0;

  std::string text() const;
};

using Population = std::vector<Individual>;

enum class MutationOp { None, Duplication, Swap, Deletion };
enum class CrossoverKind { None, Matched, Random };

std::string_view to_string(MutationOp op);
std::string_view to_string(CrossoverKind kind);

// Primitive operators. Inserting the copy right after position i.
void duplicate_at(std::vector<std::string>& words, std::size_t i);
void swap_at(std::vector<std::string>& words, std::size_t i, std::size_t j);
// Refuses (returns false) when it would empty the sequence.
bool delete_at(std::vector<std::string>& words, std::size_t i);

// Per-position deletion weight: the occurrence count of the word there.
std::vector<double> deletion_weights(const std::vector<std::string>& words);

// Applies at most one operator, picked by the configured rates.
Individual mutate(const Individual& individual, const GAConfig& config, Rng& rng,
                  MutationOp* applied = nullptr);

// Seed copies first (one per seed, in order), then one-mutation copies
// cycling through the seeds until population_size is reached.
Population init_population(const std::vector<std::string>& seeds, const GAConfig& config);

// Seeds longer than 20 words are allowed but reported.
std::vector<std::string> seed_warnings(const std::vector<std::string>& seeds);

struct Selection {
  // parents[0] is the elite (argmax f_score, lowest index on ties), kept unmodified.
  std::vector<Individual> parents;
  std::size_t elite_index = 0;
  // True when every f_score was zero and roulette fell back to uniform draws.
  bool degenerate = false;
};

std::size_t roulette_draw(const Population& population, Rng& rng);
Selection select_parents(const Population& population, Rng& rng);

// Maximal runs of non-punctuation words, as [begin, end) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> sub_sentences(const std::vector<std::string>& words);

struct CrossoverResult {
  Individual first;
  Individual second;
  CrossoverKind kind = CrossoverKind::None;
};

// Matched crossover swaps spans sharing first and last word (case-insensitive);
// with no such pair, swaps randomly chosen spans.
CrossoverResult crossover(const Individual& a, const Individual& b, Rng& rng);

struct LineageEvent {
  std::size_t generation = 0;
  std::size_t seed_ref = 0;
  std::uint64_t lineage = 0;
  std::vector<std::uint64_t> parents;
  std::string op;
  std::vector<std::string> words;
};

using LineageSink = std::function<void(const LineageEvent&)>;

struct EvolutionResult {
  std::vector<Individual> survivors;
  // best_trace[seed][generation], generation 0 being the initial population.
  std::vector<std::vector<double>> best_trace;
  std::vector<std::size_t> survivors_per_seed;

  std::string to_json() const;
};

// Runs one island per seed (population_size individuals each) for
// max_iterations generations. Throws EmptySeedSet / NoSurvivors.
EvolutionResult evolve(const std::vector<std::string>& seeds, const GAConfig& config,
                       const LineageSink& trace = {});

}  // namespace obfuskit::ga
