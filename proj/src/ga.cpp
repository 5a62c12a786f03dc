#include "obfuskit/ga.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "json.hpp"

#include "obfuskit/error.hpp"

namespace obfuskit::ga {

namespace {

bool is_punct_word(const std::string& w) { return w.size() == 1 && text::is_punct_char(w[0]); }

std::string join_key(const std::vector<std::string>& words) {
  std::string key;
  for (const auto& w : words) {
    key += w;
    key += '\x1f';
  }
  return key;
}

bool equal_ci(const std::string& a, const std::string& b) { return text::to_lower(a) == text::to_lower(b); }

void emit(const LineageSink& sink, std::size_t generation, const Individual& ind, std::vector<std::uint64_t> parents,
          std::string op) {
  if (!sink) return;
  sink(LineageEvent{generation, ind.seed_ref, ind.lineage, std::move(parents), std::move(op), ind.words});
}

MutationOp pick_op(const MutationRates& rates, double u) {
  double d = rates.duplication;
  double s = rates.swap;
  double x = rates.deletion;
  const double sum = d + s + x;
  if (sum > 1.0) {
    d /= sum;
    s /= sum;
    x /= sum;
  }
  if (u < d) return MutationOp::Duplication;
  if (u < d + s) return MutationOp::Swap;
  if (u < d + s + x) return MutationOp::Deletion;
  return MutationOp::None;
}

MutationOp apply_op(std::vector<std::string>& words, MutationOp op, Rng& rng) {
  const std::size_t n = words.size();
  switch (op) {
    case MutationOp::Duplication:
      duplicate_at(words, rng.uniform_index(n));
      return op;
    case MutationOp::Swap: {
      if (n < 2) return MutationOp::None;
      const std::size_t i = rng.uniform_index(n);
      std::size_t j = rng.uniform_index(n - 1);
      if (j >= i) ++j;
      swap_at(words, i, j);
      return op;
    }
    case MutationOp::Deletion: {
      if (n < 2) return MutationOp::None;
      const auto weights = deletion_weights(words);
      delete_at(words, rng.weighted_index(weights));
      return op;
    }
    case MutationOp::None:
      return op;
  }
  return MutationOp::None;
}

std::uint64_t child_lineage(std::uint64_t parent, std::uint64_t salt, std::string_view op) {
  return hash_combine(hash_combine(parent, salt), fnv1a64(op));
}

struct Island {
  const metrics::FitnessReference* ref;
  std::unordered_map<std::string, metrics::FitnessBreakdown> cache;

  void evaluate(Individual& ind) {
    const auto key = join_key(ind.words);
    if (auto it = cache.find(key); it != cache.end()) {
      ind.fitness = it->second;
      return;
    }
    auto fb = ref->evaluate(ind.words);
    cache.emplace(key, fb);
    ind.fitness = fb;
  }
};

bool satisfies(const Individual& ind, const metrics::FitnessReference& ref, const GAConfig& config) {
  const auto& fb = *ind.fitness;
  return static_cast<double>(fb.ob) > config.tau && ref.edit(ind.words).normalized < config.delta_edit;
}

double best_of(const Population& pop) {
  double best = 0.0;
  for (const auto& ind : pop) best = std::max(best, ind.fitness->f_score);
  return best;
}

}  // namespace

void GAConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "ga: " + what); };
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (population_size < 2) bad("population_size must be >= 2");
  if (!prob(mutation_rates.duplication) || !prob(mutation_rates.swap) || !prob(mutation_rates.deletion)) {
    bad("mutation rates must lie in [0,1]");
  }
  if (!prob(crossover_rate)) bad("crossover_rate must lie in [0,1]");
  if (tau < 0.0) bad("tau must be >= 0");
  if (!(delta_edit > 0.0)) bad("delta_edit must be > 0");
  if (weights.w1 < 0.0 || weights.w2 < 0.0 || weights.w1 > 1.0 || weights.w2 > 1.0) bad("weights must lie in [0,1]");
  if (retain_per_seed == 0) bad("retain_per_seed must be >= 1");
}

std::string Individual::text() const { return text::render_words(words); }

std::string_view to_string(MutationOp op) {
  switch (op) {
    case MutationOp::None: return "none";
    case MutationOp::Duplication: return "duplication";
    case MutationOp::Swap: return "swap";
    case MutationOp::Deletion: return "deletion";
  }
  return "none";
}

std::string_view to_string(CrossoverKind kind) {
  switch (kind) {
    case CrossoverKind::None: return "none";
    case CrossoverKind::Matched: return "matched";
    case CrossoverKind::Random: return "random";
  }
  return "none";
}

void duplicate_at(std::vector<std::string>& words, std::size_t i) {
  const std::string copy = words.at(i);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(i) + 1, copy);
}

void swap_at(std::vector<std::string>& words, std::size_t i, std::size_t j) { std::swap(words.at(i), words.at(j)); }

bool delete_at(std::vector<std::string>& words, std::size_t i) {
  if (words.size() <= 1 || i >= words.size()) return false;
  words.erase(words.begin() + static_cast<std::ptrdiff_t>(i));
  return true;
}

std::vector<double> deletion_weights(const std::vector<std::string>& words) {
  std::map<std::string, double> counts;
  for (const auto& w : words) counts[w] += 1.0;
  std::vector<double> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(counts[w]);
  return out;
}

Individual mutate(const Individual& individual, const GAConfig& config, Rng& rng, MutationOp* applied) {
  if (individual.words.empty()) throw Error(ErrorCode::EmptyInput, "mutate: empty individual");
  Individual out = individual;
  const MutationOp op = apply_op(out.words, pick_op(config.mutation_rates, rng.uniform01()), rng);
  if (op != MutationOp::None) {
    out.fitness.reset();
    out.lineage = child_lineage(individual.lineage, out.words.size(), to_string(op));
  }
  if (applied) *applied = op;
  return out;
}

std::vector<std::string> seed_warnings(const std::vector<std::string>& seeds) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto n = metrics::word_tokens(seeds[i]).size();
    if (n > 20) out.push_back("seed " + std::to_string(i) + " has " + std::to_string(n) + " words (> 20)");
  }
  return out;
}

namespace {

Population init_island(const std::vector<std::vector<std::string>>& seed_words,
                       const std::vector<std::size_t>& seed_refs, const GAConfig& config, Rng& rng) {
  Population pop;
  pop.reserve(config.population_size);
  // Padding copies always carry exactly one operator when any rate is non-zero.
  MutationRates forced = config.mutation_rates;
  const double sum = forced.duplication + forced.swap + forced.deletion;
  if (sum > 0.0) {
    forced.duplication /= sum;
    forced.swap /= sum;
    forced.deletion /= sum;
  }
  for (std::size_t i = 0; i < config.population_size; ++i) {
    const std::size_t s = i % seed_words.size();
    Individual ind;
    ind.words = seed_words[s];
    ind.seed_ref = seed_refs[s];
    ind.lineage = hash_combine(fnv1a64(join_key(seed_words[s])), seed_refs[s]);
    if (i >= seed_words.size() && sum > 0.0) {
      const MutationOp op = apply_op(ind.words, pick_op(forced, rng.uniform01()), rng);
      ind.lineage = child_lineage(ind.lineage, i, to_string(op));
    }
    pop.push_back(std::move(ind));
  }
  return pop;
}

}  // namespace

Population init_population(const std::vector<std::string>& seeds, const GAConfig& config) {
  if (seeds.empty()) throw Error(ErrorCode::EmptySeedSet, "init_population: no seeds");
  config.validate();
  std::vector<std::vector<std::string>> words;
  std::vector<std::size_t> refs;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto w = text::split_surfaces(seeds[i]);
    if (w.empty()) throw Error(ErrorCode::EmptyInput, "seed " + std::to_string(i) + " is empty");
    words.push_back(std::move(w));
    refs.push_back(i);
  }
  Rng rng(config.rng_seed);
  return init_island(words, refs, config, rng);
}

std::size_t roulette_draw(const Population& population, Rng& rng) {
  std::vector<double> w;
  w.reserve(population.size());
  double total = 0.0;
  for (const auto& ind : population) {
    const double f = ind.fitness ? std::max(0.0, ind.fitness->f_score) : 0.0;
    w.push_back(f);
    total += f;
  }
  if (!(total > 0.0)) return rng.uniform_index(population.size());
  return rng.weighted_index(w);
}

Selection select_parents(const Population& population, Rng& rng) {
  if (population.empty()) throw Error(ErrorCode::EmptyInput, "select_parents: empty population");
  Selection sel;
  double best = -1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!population[i].fitness) throw Error(ErrorCode::EmptyInput, "select_parents: fitness not computed");
    const double f = population[i].fitness->f_score;
    total += std::max(0.0, f);
    if (f > best) {
      best = f;
      sel.elite_index = i;
    }
  }
  sel.degenerate = !(total > 0.0);
  sel.parents.reserve(population.size());
  sel.parents.push_back(population[sel.elite_index]);
  for (std::size_t k = 1; k < population.size(); ++k) sel.parents.push_back(population[roulette_draw(population, rng)]);
  return sel;
}

std::vector<std::pair<std::size_t, std::size_t>> sub_sentences(const std::vector<std::string>& words) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < words.size()) {
    if (is_punct_word(words[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < words.size() && !is_punct_word(words[j])) ++j;
    out.emplace_back(i, j);
    i = j;
  }
  return out;
}

CrossoverResult crossover(const Individual& a, const Individual& b, Rng& rng) {
  if (a.words.empty() || b.words.empty()) throw Error(ErrorCode::EmptyInput, "crossover: empty parent");
  CrossoverResult res{a, b, CrossoverKind::None};
  const auto sa = sub_sentences(a.words);
  const auto sb = sub_sentences(b.words);
  if (sa.empty() || sb.empty()) return res;

  using SpanPair = std::pair<std::size_t, std::size_t>;
  std::vector<SpanPair> matched;
  std::vector<SpanPair> matched_distinct;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    for (std::size_t j = 0; j < sb.size(); ++j) {
      const auto [ab, ae] = sa[i];
      const auto [bb, be] = sb[j];
      if (!equal_ci(a.words[ab], b.words[bb]) || !equal_ci(a.words[ae - 1], b.words[be - 1])) continue;
      matched.emplace_back(i, j);
      if (!std::equal(a.words.begin() + ab, a.words.begin() + ae, b.words.begin() + bb, b.words.begin() + be)) {
        matched_distinct.emplace_back(i, j);
      }
    }
  }

  SpanPair pick;
  if (!matched.empty()) {
    // Swapping identical spans is a no-op, so prefer pairs that differ.
    const auto& pool = matched_distinct.empty() ? matched : matched_distinct;
    pick = pool[rng.uniform_index(pool.size())];
    res.kind = CrossoverKind::Matched;
  } else {
    pick = {rng.uniform_index(sa.size()), rng.uniform_index(sb.size())};
    res.kind = CrossoverKind::Random;
  }

  const auto [ab, ae] = sa[pick.first];
  const auto [bb, be] = sb[pick.second];
  std::vector<std::string> child_a(a.words.begin(), a.words.begin() + ab);
  child_a.insert(child_a.end(), b.words.begin() + bb, b.words.begin() + be);
  child_a.insert(child_a.end(), a.words.begin() + ae, a.words.end());
  std::vector<std::string> child_b(b.words.begin(), b.words.begin() + bb);
  child_b.insert(child_b.end(), a.words.begin() + ab, a.words.begin() + ae);
  child_b.insert(child_b.end(), b.words.begin() + be, b.words.end());

  const auto tag = to_string(res.kind);
  res.first.words = std::move(child_a);
  res.first.fitness.reset();
  res.first.lineage = child_lineage(hash_combine(a.lineage, b.lineage), 1, tag);
  res.second.words = std::move(child_b);
  res.second.fitness.reset();
  res.second.lineage = child_lineage(hash_combine(b.lineage, a.lineage), 2, tag);
  return res;
}

EvolutionResult evolve(const std::vector<std::string>& seeds, const GAConfig& config, const LineageSink& trace) {
  if (seeds.empty()) throw Error(ErrorCode::EmptySeedSet, "evolve: no seeds");
  config.validate();

  EvolutionResult result;
  result.best_trace.resize(seeds.size());
  result.survivors_per_seed.assign(seeds.size(), 0);
  std::set<std::string> emitted;

  for (std::size_t s = 0; s < seeds.size(); ++s) {
    auto seed_words = text::split_surfaces(seeds[s]);
    if (seed_words.empty()) throw Error(ErrorCode::EmptyInput, "seed " + std::to_string(s) + " is empty");
    const metrics::FitnessReference ref(seed_words, config.weights);
    Island island{&ref, {}};
    Rng rng(hash_combine(config.rng_seed, s));

    Population pop = init_island({seed_words}, {s}, config, rng);
    std::map<std::string, Individual> archive;
    auto absorb = [&](Population& p, std::size_t gen) {
      for (auto& ind : p) {
        island.evaluate(ind);
        if (gen == 0) emit(trace, gen, ind, {}, "init");
        if (satisfies(ind, ref, config)) archive.try_emplace(join_key(ind.words), ind);
      }
      result.best_trace[s].push_back(best_of(p));
    };
    absorb(pop, 0);

    for (std::size_t gen = 1; gen <= config.max_iterations; ++gen) {
      Selection sel = select_parents(pop, rng);
      Population next;
      next.reserve(pop.size());
      next.push_back(sel.parents[0]);
      std::size_t k = 1;
      while (k < sel.parents.size()) {
        if (k + 1 < sel.parents.size()) {
          Individual a = sel.parents[k];
          Individual b = sel.parents[k + 1];
          if (rng.bernoulli(config.crossover_rate)) {
            auto x = crossover(a, b, rng);
            emit(trace, gen, x.first, {a.lineage, b.lineage}, std::string("crossover:") + std::string(to_string(x.kind)));
            emit(trace, gen, x.second, {b.lineage, a.lineage}, std::string("crossover:") + std::string(to_string(x.kind)));
            a = std::move(x.first);
            b = std::move(x.second);
          }
          for (Individual* child : {&a, &b}) {
            MutationOp op = MutationOp::None;
            const auto parent = child->lineage;
            *child = mutate(*child, config, rng, &op);
            if (op != MutationOp::None) emit(trace, gen, *child, {parent}, std::string(to_string(op)));
            next.push_back(std::move(*child));
          }
          k += 2;
        } else {
          MutationOp op = MutationOp::None;
          const auto parent = sel.parents[k].lineage;
          Individual c = mutate(sel.parents[k], config, rng, &op);
          if (op != MutationOp::None) emit(trace, gen, c, {parent}, std::string(to_string(op)));
          next.push_back(std::move(c));
          ++k;
        }
      }
      pop = std::move(next);
      absorb(pop, gen);
    }

    std::vector<Individual> ranked;
    ranked.reserve(archive.size());
    for (auto& [key, ind] : archive) ranked.push_back(std::move(ind));
    std::stable_sort(ranked.begin(), ranked.end(), [](const Individual& x, const Individual& y) {
      if (x.fitness->f_score != y.fitness->f_score) return x.fitness->f_score > y.fitness->f_score;
      return x.words < y.words;
    });
    for (auto& ind : ranked) {
      if (result.survivors_per_seed[s] >= config.retain_per_seed) break;
      if (!emitted.insert(join_key(ind.words)).second) continue;
      ++result.survivors_per_seed[s];
      result.survivors.push_back(std::move(ind));
    }
  }

  if (result.survivors.empty()) {
    throw Error(ErrorCode::NoSurvivors, "no individual satisfies OB > tau and D_edit < delta_edit");
  }
  return result;
}

std::string EvolutionResult::to_json() const {
  nlohmann::json j;
  j["survivors"] = nlohmann::json::array();
  for (const auto& s : survivors) {
    nlohmann::json e;
    e["seed_ref"] = s.seed_ref;
    e["words"] = s.words;
    e["lineage"] = hex64(s.lineage);
    if (s.fitness) {
      e["ob"] = s.fitness->ob;
      e["r_ob"] = s.fitness->r_ob;
      e["r_l"] = s.fitness->r_l;
      e["f_score"] = s.fitness->f_score;
    }
    j["survivors"].push_back(std::move(e));
  }
  j["best_trace"] = best_trace;
  j["survivors_per_seed"] = survivors_per_seed;
  return j.dump();
}

}  // namespace obfuskit::ga
