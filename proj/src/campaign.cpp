#include "obfuskit/campaign.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>

#include "obfuskit/error.hpp"
#include "obfuskit/metrics.hpp"
#include "obfuskit/parallel.hpp"
#include "obfuskit/rng.hpp"

namespace obfuskit::campaign {

namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  std::size_t line = 1;
  std::size_t row_line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  std::size_t i = 0;
  if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) throw MalformedRowError(line, "stray quote inside a field");
        quoted = was_quoted = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        row_line = ++line;
        break;
      default:
        if (was_quoted) throw MalformedRowError(line, "text after a closing quote");
        field += c;
    }
  }
  if (quoted) throw MalformedRowError(row_line, "unterminated quoted field");
  if (!field.empty() || !row.empty() || was_quoted) end_row();
  return rows;
}

std::string question_id(std::size_t row, std::string_view text) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", row);
  return "q" + std::string(buf) + "-" + hex64(fnv1a64(text)).substr(0, 8);
}

std::vector<Question> ingest_csv(std::string_view csv) {
  const auto rows = parse_csv(csv);
  if (rows.empty()) throw Error(ErrorCode::MissingHeader, "empty dataset");
  const auto& header = rows.front();
  int text_col = -1, cat_col = -1, id_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto h = lower(trim(header[c]));
    if ((h == "goal" || h == "text" || h == "question") && text_col < 0) text_col = static_cast<int>(c);
    if (h == "category") cat_col = static_cast<int>(c);
    if (h == "id") id_col = static_cast<int>(c);
  }
  if (text_col < 0) throw Error(ErrorCode::MissingHeader, "dataset header needs a goal or text column");

  // Physical line of each row start, for error messages.
  std::vector<std::size_t> starts;
  {
    std::size_t line = 1;
    bool quoted = false;
    bool at_start = true;
    for (char c : csv) {
      if (at_start && c != '\n' && c != '\r') {
        starts.push_back(line);
        at_start = false;
      }
      if (c == '"') quoted = !quoted;
      if (c == '\n') {
        ++line;
        if (!quoted) at_start = true;
      }
    }
  }

  std::vector<Question> out;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line = r < starts.size() ? starts[r] : r + 1;
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      throw MalformedRowError(line, "expected " + std::to_string(header.size()) + " fields, got " +
                                        std::to_string(row.size()));
    }
    Question q;
    q.text = trim(row[static_cast<std::size_t>(text_col)]);
    if (q.text.empty()) throw MalformedRowError(line, "empty question text");
    q.id = id_col >= 0 && !trim(row[static_cast<std::size_t>(id_col)]).empty()
               ? trim(row[static_cast<std::size_t>(id_col)])
               : question_id(r, q.text);
    if (cat_col >= 0) q.category = trim(row[static_cast<std::size_t>(cat_col)]);
    if (!ids.insert(q.id).second) throw Error(ErrorCode::DuplicateId, "duplicate question id " + q.id);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Question> ingest_dataset(const std::string& path, const std::string& categories) {
  auto qs = ingest_csv(slurp(path));
  if (!categories.empty()) {
    std::map<std::string, std::string> map;
    const auto rows = parse_csv(slurp(categories));
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() >= 2) map[trim(rows[r][0])] = trim(rows[r][1]);
    }
    for (auto& q : qs) {
      if (auto it = map.find(q.id); it != map.end()) {
        q.category = it->second;
      } else if (auto jt = map.find(q.text); jt != map.end()) {
        q.category = jt->second;
      }
    }
  }
  for (const auto& q : qs) {
    if (q.category.empty()) throw Error(ErrorCode::UnmappedQuestion, "no category for question " + q.id);
  }
  return qs;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(slurp(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    line = trim(line);
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

sim::SimConfig sim_config_from_json(const nlohmann::json& j, const eval::RuleSet& rules) {
  auto cfg = sim::SimConfig::with_rules(rules);
  try {
    cfg.tau = j.value("tau", cfg.tau);
    cfg.theta = j.value("theta", cfg.theta);
    cfg.rho = j.value("rho", cfg.rho);
    cfg.ob_scale = j.value("ob_scale", cfg.ob_scale);
    const auto mode = lower(j.value("nonsense_mode", std::string("empty")));
    if (mode == "filler") {
      cfg.nonsense.mode = sim::NonsenseMode::Filler;
    } else if (mode != "empty") {
      throw Error(ErrorCode::InvalidConfig, "simulator.nonsense_mode must be empty or filler");
    }
    cfg.nonsense.length = j.value("nonsense_length", std::size_t{0});
    const auto ties = lower(j.value("ties", std::string("lenient")));
    if (ties == "strict") {
      cfg.ties = sim::TieMode::Strict;
    } else if (ties != "lenient") {
      throw Error(ErrorCode::InvalidConfig, "simulator.ties must be lenient or strict");
    }
    const auto gate = lower(j.value("gate", std::string("off")));
    if (gate == "pre") {
      cfg.gate = sim::GateMode::Pre;
    } else if (gate != "off") {
      throw Error(ErrorCode::InvalidConfig, "simulator.gate must be off or pre");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("simulator: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ga::GAConfig ga_config_from_json(const nlohmann::json& j) {
  ga::GAConfig g;
  try {
    g.population_size = j.value("population_size", g.population_size);
    g.max_iterations = j.value("max_iterations", g.max_iterations);
    g.weights.w1 = j.value("w1", g.weights.w1);
    g.weights.w2 = j.value("w2", g.weights.w2);
    if (j.contains("mutation_rates")) {
      const auto& m = j["mutation_rates"];
      g.mutation_rates.duplication = m.value("duplication", g.mutation_rates.duplication);
      g.mutation_rates.swap = m.value("swap", g.mutation_rates.swap);
      g.mutation_rates.deletion = m.value("deletion", g.mutation_rates.deletion);
    }
    g.crossover_rate = j.value("crossover_rate", g.crossover_rate);
    g.tau = j.value("tau", g.tau);
    g.delta_edit = j.value("delta_edit", g.delta_edit);
    g.retain_per_seed = j.value("retain_per_seed", g.retain_per_seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("ga: ") + e.what());
  }
  g.validate();
  return g;
}

CampaignConfig CampaignConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  CampaignConfig c;
  auto resolve = [&](const std::string& p) {
    if (p.empty()) return p;
    const fs::path path(p);
    return path.is_absolute() ? p : (fs::path(base_dir) / path).lexically_normal().string();
  };
  try {
    if (!j.contains("rng_seed")) throw Error(ErrorCode::InvalidConfig, "rng_seed is mandatory");
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.dataset = resolve(j.value("dataset", std::string()));
    c.categories = resolve(j.value("categories", std::string()));
    c.seeds = resolve(j.value("seeds", std::string()));
    c.output_dir = j.value("output_dir", c.output_dir);
    c.parallelism = j.value("parallelism", c.parallelism);
    if (j.contains("rules")) c.rules = eval::RuleSet::from_file(resolve(j["rules"].get<std::string>()));
    c.simulator = sim_config_from_json(j.value("simulator", nlohmann::json::object()), c.rules);
    if (j.contains("ga")) c.ga = ga_config_from_json(j["ga"]);
    if (j.contains("ca")) {
      const auto& ca = j["ca"];
      c.ca.variants_per_question = ca.value("variants_per_question", c.ca.variants_per_question);
      c.ca.delta_ca = ca.value("delta_ca", c.ca.delta_ca);
      c.ca.max_retries = ca.value("max_retries", c.ca.max_retries);
      if (ca.contains("templates")) c.ca.normal_templates = ca::load_templates_file(resolve(ca["templates"]));
    }
    c.ca.parallelism = c.parallelism;
    if (j.contains("prefabs")) c.prefabs = oi::load_prefabs_file(resolve(j["prefabs"].get<std::string>()));
    if (j.contains("baseline_template")) {
      c.baseline = ca::load_baseline_template_file(resolve(j["baseline_template"].get<std::string>()));
    }
    if (j.contains("probe")) c.probe.text = j["probe"].get<std::string>();
    c.rewriter = j.value("rewriter", std::string());

    client::ModelTarget sim_target;
    sim_target.sim = c.simulator;
    sim_target.sim_rules = c.rules;
    sim_target.parallelism = c.parallelism;
    c.targets.push_back(sim_target);
    for (const auto& t : j.value("targets", nlohmann::json::array())) {
      auto mt = client::ModelTarget::from_json(t, c.simulator);
      mt.sim_rules = c.rules;
      if (mt.id == "sim") {
        c.targets.front() = std::move(mt);
      } else {
        c.targets.push_back(std::move(mt));
      }
    }
    for (const auto& a : j.at("arms")) {
      Arm arm;
      arm.method = parse_method(a.at("method").get<std::string>());
      arm.target = a.value("target", std::string("sim"));
      arm.id = a.value("id", std::string(to_string(arm.method)) + "@" + arm.target);
      c.arms.push_back(std::move(arm));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  c.validate();
  return c;
}

CampaignConfig CampaignConfig::from_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path + ": " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string());
}

const client::ModelTarget& CampaignConfig::target(const std::string& id) const {
  for (const auto& t : targets) {
    if (t.id == id) return t;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown target " + id);
}

void CampaignConfig::validate() const {
  if (arms.empty()) throw Error(ErrorCode::InvalidConfig, "at least one arm is required");
  if (parallelism < 1) throw Error(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  std::set<std::string> ids;
  for (const auto& a : arms) {
    target(a.target);
    if (!ids.insert(a.id).second) throw Error(ErrorCode::InvalidConfig, "duplicate arm id " + a.id);
    if (a.method == Method::OI && seeds.empty()) throw Error(ErrorCode::InvalidConfig, "OI arms need a seeds file");
  }
  if (!rewriter.empty()) target(rewriter);
  ga.validate();
  ca.validate();
  simulator.validate();
}

JsonlAppender::JsonlAppender(const std::string& path, bool resume) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  if (resume && fs::exists(path)) {
    const auto data = slurp(path);
    const auto last_nl = data.rfind('\n');
    const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
    if (keep != data.size()) fs::resize_file(path, keep);
    out_.open(path, std::ios::binary | std::ios::app);
  } else {
    out_.open(path, std::ios::binary | std::ios::trunc);
  }
  if (!out_) throw Error(ErrorCode::Io, "cannot open " + path);
}

void JsonlAppender::append(const nlohmann::json& record) {
  std::lock_guard<std::mutex> lock(mu_);
  out_ << record.dump() << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::Io, "write failed");
  ++written_;
}

namespace {

struct Job {
  const Question* question = nullptr;
  std::optional<PseudoLegalPrompt> prompt;
  std::string error;
  nlohmann::json provenance;
};

class ClientPool {
 public:
  explicit ClientPool(const CampaignConfig& c) : config_(c) {}
  client::ModelClient& get(const std::string& id) {
    auto& slot = clients_[id];
    if (!slot) slot = std::make_unique<client::ModelClient>(config_.target(id));
    return *slot;
  }

 private:
  const CampaignConfig& config_;
  std::map<std::string, std::unique_ptr<client::ModelClient>> clients_;
};

oi::OIConfig oi_config(const CampaignConfig& c) {
  oi::OIConfig o;
  o.ga = c.ga;
  o.parallelism = c.parallelism;
  o.rng_seed = c.rng_seed;
  o.probe = c.probe;
  return o;
}

oi::OICorpus build_oi(const CampaignConfig& c, const std::vector<Question>& qs, client::ModelClient& cl,
                      JsonlAppender* trace) {
  ga::LineageSink sink;
  if (trace) {
    sink = [trace](const ga::LineageEvent& e) {
      nlohmann::json parents = nlohmann::json::array();
      for (auto p : e.parents) parents.push_back(hex64(p));
      trace->append({{"generation", e.generation},
                     {"seed_ref", e.seed_ref},
                     {"lineage", hex64(e.lineage)},
                     {"parents", parents},
                     {"op", e.op},
                     {"words", e.words}});
    };
  }
  return oi::generate_oi_corpus(read_lines(c.seeds), c.prefabs, qs, cl, oi_config(c), c.rules, sink);
}

nlohmann::json error_provenance(Method m, const Question& q) {
  return {{"method", to_string(m)}, {"question_id", q.id}, {"stage", "generation"}};
}

}  // namespace

oi::OICorpus generate_oi(const CampaignConfig& config, const std::string& target_id, bool trace_ga) {
  const auto qs = ingest_dataset(config.dataset, config.categories);
  client::ModelClient cl(config.target(target_id));
  fs::create_directories(config.output_dir);
  std::unique_ptr<JsonlAppender> trace;
  if (trace_ga) trace = std::make_unique<JsonlAppender>((fs::path(config.output_dir) / "ga_trace.jsonl").string(), false);
  auto corpus = build_oi(config, qs, cl, trace.get());

  JsonlAppender templates((fs::path(config.output_dir) / "oi_templates.jsonl").string(), false);
  for (const auto& v : corpus.filtered.verdicts) {
    auto j = v.candidate.to_json();
    j["validated"] = v.outcome && v.outcome->cls == eval::OutcomeClass::Success;
    j["probe_outcome"] = v.outcome ? nlohmann::json(eval::to_string(v.outcome->cls)) : nlohmann::json(nullptr);
    if (!v.error.empty()) j["error"] = v.error;
    templates.append(j);
  }
  JsonlAppender prompts((fs::path(config.output_dir) / "oi_prompts.jsonl").string(), false);
  for (const auto& p : corpus.prompts) prompts.append(p.to_json());
  std::ofstream((fs::path(config.output_dir) / "oi_counts.json").string()) << corpus.counts().dump(2) << "\n";
  return corpus;
}

ca::CACorpus generate_ca(const CampaignConfig& config, const std::string& target_id) {
  const auto qs = ingest_dataset(config.dataset, config.categories);
  client::ModelClient cl(config.target(config.rewriter.empty() ? target_id : config.rewriter));
  auto corpus = ca::generate_ca_corpus(qs, config.ca, cl, ca::surface_toxicity_evaluator(config.rules));
  fs::create_directories(config.output_dir);
  JsonlAppender prompts((fs::path(config.output_dir) / "ca_prompts.jsonl").string(), false);
  for (const auto& r : corpus.results) {
    auto j = r.prompt.to_json();
    j["variants"] = nlohmann::json::array();
    for (const auto& v : r.variants) j["variants"].push_back(v.text);
    prompts.append(j);
  }
  std::ofstream((fs::path(config.output_dir) / "ca_counts.json").string()) << corpus.counts().dump(2) << "\n";
  return corpus;
}

RunResult run_campaign(const CampaignConfig& config, const RunOptions& options) {
  config.validate();
  if (options.only_target &&
      std::none_of(config.arms.begin(), config.arms.end(), [&](const Arm& a) { return a.target == *options.only_target; })) {
    throw Error(ErrorCode::InvalidConfig, "no arm uses target " + *options.only_target);
  }
  const auto questions = ingest_dataset(config.dataset, config.categories);

  fs::create_directories(config.output_dir);
  const std::string attempts_path = (fs::path(config.output_dir) / "attempts.jsonl").string();
  JsonlAppender out(attempts_path, options.resume);
  std::set<std::string> done;
  if (options.resume) {
    for (const auto& r : report::read_records(attempts_path)) done.insert(r.key());
  }
  std::unique_ptr<JsonlAppender> trace;
  if (options.trace_ga) {
    trace = std::make_unique<JsonlAppender>((fs::path(config.output_dir) / "ga_trace.jsonl").string(), false);
  }

  ClientPool pool(config);
  const auto surface = eval::LexiconScorer::surface(config.rules);
  RunResult result;

  for (const auto& arm : config.arms) {
    if (options.only_target && arm.target != *options.only_target) continue;
    auto& target_client = pool.get(arm.target);

    std::vector<Job> jobs(questions.size());
    for (std::size_t i = 0; i < questions.size(); ++i) jobs[i].question = &questions[i];

    switch (arm.method) {
      case Method::Baseline:
        for (auto& job : jobs) {
          ca::AmbiguityVariant v{job.question->text, job.question->text, 0, std::nullopt};
          auto p = ca::embed_variant(v, config.baseline);
          p.method = Method::Baseline;
          p.question_id = job.question->id;
          p.provenance = {{"method", "BASELINE"}, {"question_id", job.question->id}, {"template_id", config.baseline.id}};
          job.prompt = std::move(p);
        }
        break;
      case Method::OI: {
        auto corpus = build_oi(config, questions, target_client, trace.get());
        result.corpus_counts[arm.id] = corpus.counts();
        for (std::size_t i = 0; i < jobs.size(); ++i) jobs[i].prompt = std::move(corpus.prompts[i]);
        break;
      }
      case Method::CA: {
        auto& rewriter = pool.get(config.rewriter.empty() ? arm.target : config.rewriter);
        auto corpus = ca::generate_ca_corpus(questions, config.ca, rewriter, ca::surface_toxicity_evaluator(config.rules));
        result.corpus_counts[arm.id] = corpus.counts();
        std::map<std::string, ca::CAResult*> found;
        for (auto& r : corpus.results) found[r.prompt.question_id] = &r;
        for (auto& job : jobs) {
          if (auto it = found.find(job.question->id); it != found.end()) {
            job.prompt = it->second->prompt;
          } else {
            job.error = corpus.failures[job.question->id];
          }
        }
        break;
      }
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& job = jobs[i];
      job.provenance = job.prompt ? job.prompt->provenance : error_provenance(arm.method, *job.question);
      job.provenance["arm_id"] = arm.id;
      job.provenance["target"] = arm.target;
      const std::string key = job.question->id + "\t" + arm.id + "\t" + provenance_hash(job.provenance);
      if (done.count(key)) {
        ++result.skipped;
      } else {
        todo.push_back(i);
      }
    }

    const std::size_t batch = std::max<std::size_t>(1, config.parallelism) * 4;
    for (std::size_t start = 0; start < todo.size() && !result.interrupted; start += batch) {
      const std::size_t end = std::min(todo.size(), start + batch);
      std::vector<report::AttemptRecord> recs(end - start);
      parallel_for(end - start, config.parallelism, [&](std::size_t k) {
        const auto& job = jobs[todo[start + k]];
        auto& r = recs[k];
        r.question_id = job.question->id;
        r.category = job.question->category;
        r.arm_id = arm.id;
        r.method = std::string(to_string(arm.method));
        r.target = arm.target;
        r.provenance = job.provenance;
        r.provenance_hash = provenance_hash(job.provenance);
        r.timestamp = client::iso_timestamp_now();
        if (!job.prompt) {
          r.error = job.error.empty() ? "no prompt generated" : job.error;
          return;
        }
        r.prompt = job.prompt->text;
        r.prompt_toxicity = eval::toxicity(r.prompt, *surface);
        r.prompt_length = metrics::word_tokens(r.prompt).size();
        try {
          r.exchange = target_client.complete(r.prompt);
          r.response_toxicity = eval::toxicity(r.exchange->response, *surface);
          r.response_length = metrics::word_tokens(r.exchange->response).size();
          const auto meta = question_meta(*job.question, target_client.target(), job.prompt->embedded_question);
          r.outcome = eval::classify(r.exchange->response, meta, config.rules);
        } catch (const Error& e) {
          r.error = e.what();
        }
      });
      for (auto& r : recs) {
        out.append(r.to_json());
        ++result.new_records;
        if (options.stop_after && result.new_records >= *options.stop_after) {
          result.interrupted = true;
          break;
        }
      }
    }
    if (result.interrupted) break;
  }

  const auto records = report::read_records(attempts_path);
  if (!records.empty()) {
    report::export_report(records, config.output_dir);
    result.report = report::build_report(records);
  }
  return result;
}

}  // namespace obfuskit::campaign
