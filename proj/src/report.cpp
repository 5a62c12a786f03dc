#include "obfuskit/report.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "obfuskit/error.hpp"

namespace obfuskit::report {

namespace fs = std::filesystem;

nlohmann::json AttemptRecord::to_json() const {
  nlohmann::json j{{"question_id", question_id},
                   {"category", category},
                   {"arm_id", arm_id},
                   {"method", method},
                   {"target", target},
                   {"provenance", provenance},
                   {"provenance_hash", provenance_hash},
                   {"prompt", prompt},
                   {"prompt_toxicity", prompt_toxicity},
                   {"response_toxicity", response_toxicity},
                   {"prompt_length", prompt_length},
                   {"response_length", response_length},
                   {"timestamp", timestamp}};
  j["exchange"] = exchange ? exchange->to_json() : nlohmann::json(nullptr);
  j["outcome"] = outcome ? outcome->to_json() : nlohmann::json(nullptr);
  j["error"] = error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error);
  return j;
}

AttemptRecord AttemptRecord::from_json(const nlohmann::json& j) {
  AttemptRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.category = j.value("category", std::string());
  r.arm_id = j.at("arm_id").get<std::string>();
  r.method = j.value("method", std::string());
  r.target = j.value("target", std::string());
  r.provenance = j.value("provenance", nlohmann::json::object());
  r.provenance_hash = j.value("provenance_hash", std::string());
  r.prompt = j.value("prompt", std::string());
  r.prompt_toxicity = j.value("prompt_toxicity", 0.0);
  r.response_toxicity = j.value("response_toxicity", 0.0);
  r.prompt_length = j.value("prompt_length", std::size_t{0});
  r.response_length = j.value("response_length", std::size_t{0});
  r.timestamp = j.value("timestamp", std::string());
  if (j.contains("exchange") && !j["exchange"].is_null()) {
    const auto& e = j["exchange"];
    client::Exchange ex;
    ex.prompt = e.value("prompt", std::string());
    ex.response = e.value("response", std::string());
    ex.latency_seconds = e.value("latency", 0.0);
    ex.target = e.value("target", std::string());
    ex.timestamp = e.value("timestamp", std::string());
    ex.attempt_count = e.value("attempt_count", 0);
    r.exchange = std::move(ex);
  }
  if (j.contains("outcome") && !j["outcome"].is_null()) {
    const auto& o = j["outcome"];
    eval::Outcome out;
    out.cls = eval::parse_outcome_class(o.at("class").get<std::string>());
    out.conditions.con1 = o.at("conditions").value("con1", false);
    out.conditions.con2 = o.at("conditions").value("con2", false);
    out.conditions.con3 = o.at("conditions").value("con3", false);
    out.evidence = o.value("evidence", std::vector<std::string>{});
    out.question_id = o.value("question_id", r.question_id);
    r.outcome = std::move(out);
  }
  if (j.contains("error") && j["error"].is_string()) r.error = j["error"].get<std::string>();
  return r;
}

std::string AttemptRecord::key() const { return question_id + "\t" + arm_id + "\t" + provenance_hash; }

nlohmann::json CampaignReport::to_json() const {
  nlohmann::json j;
  j["arms"] = nlohmann::json::array();
  for (const auto& a : arms) {
    nlohmann::json ja{{"arm_id", a.arm_id}, {"method", a.method}, {"target", a.target}, {"errors", a.errors}};
    ja["metrics"] = a.metrics ? a.metrics->to_json() : nlohmann::json(nullptr);
    ja["categories"] = nlohmann::json::object();
    for (const auto& [cat, cm] : a.categories) {
      ja["categories"][cat] = {{"metrics", cm.metrics.to_json()},
                               {"corpus_count", cm.corpus_count},
                               {"corpus_total", cm.corpus_total},
                               {"corpus_ratio", cm.corpus_ratio}};
    }
    ja["toxicity"] = nlohmann::json::array();
    for (const auto& h : a.histograms) ja["toxicity"].push_back(h.to_json());
    j["arms"].push_back(std::move(ja));
  }
  j["average"] = {{"asr", avg_asr},
                  {"rej", avg_rej},
                  {"hal", avg_hal},
                  {"asr_display", eval::format_percent(avg_asr)},
                  {"rej_display", eval::format_percent(avg_rej)},
                  {"hal_display", eval::format_percent(avg_hal)}};
  j["categories"] = categories;
  return j;
}

std::string CampaignReport::overall_csv() const {
  std::ostringstream os;
  os << "arm,method,target,n,n_s,n_r,n_h,errors,ASR,REJ,HAL\n";
  for (const auto& a : arms) {
    os << a.arm_id << ',' << a.method << ',' << a.target << ',';
    if (a.metrics) {
      const auto& m = *a.metrics;
      os << m.n << ',' << m.n_s << ',' << m.n_r << ',' << m.n_h << ',' << a.errors << ','
         << eval::format_percent(m.n_s, m.n) << ',' << eval::format_percent(m.n_r, m.n) << ','
         << eval::format_percent(m.n_h, m.n) << '\n';
    } else {
      os << "0,0,0,0," << a.errors << ",,,\n";
    }
  }
  os << "average,,,,,,,," << eval::format_percent(avg_asr) << ',' << eval::format_percent(avg_rej) << ','
     << eval::format_percent(avg_hal) << '\n';
  return os.str();
}

std::string CampaignReport::category_csv() const {
  std::ostringstream os;
  os << "arm,category,corpus_count,corpus_ratio,n,n_s,n_r,n_h,ASR,REJ,HAL\n";
  for (const auto& a : arms) {
    for (const auto& cat : categories) {
      auto it = a.categories.find(cat);
      if (it == a.categories.end()) continue;
      const auto& cm = it->second;
      const auto& m = cm.metrics;
      os << a.arm_id << ',' << cat << ',' << cm.corpus_count << ',' << cm.corpus_ratio << ',' << m.n << ','
         << m.n_s << ',' << m.n_r << ',' << m.n_h << ',' << eval::format_percent(m.n_s, m.n) << ','
         << eval::format_percent(m.n_r, m.n) << ',' << eval::format_percent(m.n_h, m.n) << '\n';
    }
  }
  return os.str();
}

CampaignReport build_report(const std::vector<AttemptRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "no attempt records");
  eval::CategoryTaxonomy taxonomy;
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AttemptRecord*>> by_arm;
  for (const auto& r : records) {
    if (!r.category.empty()) taxonomy.assign(r.question_id, r.category);
    if (!by_arm.count(r.arm_id)) order.push_back(r.arm_id);
    by_arm[r.arm_id].push_back(&r);
  }

  CampaignReport rep;
  std::size_t with_metrics = 0;
  for (const auto& arm : order) {
    ArmReport a;
    a.arm_id = arm;
    a.method = by_arm[arm].front()->method;
    a.target = by_arm[arm].front()->target;
    std::vector<eval::Outcome> outcomes;
    std::vector<eval::ToxicityRecord> tox;
    for (const auto* r : by_arm[arm]) {
      if (!r->error.empty() || !r->outcome) {
        ++a.errors;
        continue;
      }
      outcomes.push_back(*r->outcome);
      tox.push_back({r->prompt_toxicity, r->response_toxicity, r->prompt_length, r->response_length});
    }
    if (!outcomes.empty()) {
      a.metrics = eval::aggregate(outcomes);
      if (!taxonomy.assignments().empty()) a.categories = eval::by_category(outcomes, taxonomy);
      a.histograms = eval::toxicity_report(tox);
      rep.avg_asr += a.metrics->asr;
      rep.avg_rej += a.metrics->rej;
      rep.avg_hal += a.metrics->hal;
      ++with_metrics;
    }
    rep.arms.push_back(std::move(a));
  }
  if (with_metrics) {
    rep.avg_asr /= static_cast<double>(with_metrics);
    rep.avg_rej /= static_cast<double>(with_metrics);
    rep.avg_hal /= static_cast<double>(with_metrics);
  }
  rep.categories = taxonomy.categories();
  return rep;
}

namespace {

std::string write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + p.string());
  out << content;
  return p.string();
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (unsigned char c : s) out += std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '_';
  return out;
}

}  // namespace

std::vector<std::string> export_report(const std::vector<AttemptRecord>& records, const std::string& output_dir) {
  const auto rep = build_report(records);
  fs::create_directories(output_dir);
  const fs::path dir(output_dir);
  std::vector<std::string> paths;
  paths.push_back(write_file(dir / "report.json", rep.to_json().dump(2) + "\n"));
  paths.push_back(write_file(dir / "report.csv", rep.overall_csv()));
  paths.push_back(write_file(dir / "report_categories.csv", rep.category_csv()));
  for (const auto& a : rep.arms) {
    for (const auto& h : a.histograms) {
      paths.push_back(write_file(dir / ("toxicity_hist_" + safe_name(a.arm_id) + "_" + h.panel + ".csv"), h.to_csv()));
    }
  }
  return paths;
}

std::vector<AttemptRecord> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();
  std::vector<AttemptRecord> out;
  std::size_t pos = 0;
  std::size_t line = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    if (nl == std::string::npos) break;
    ++line;
    const auto text = data.substr(pos, nl - pos);
    pos = nl + 1;
    if (text.empty()) continue;
    try {
      out.push_back(AttemptRecord::from_json(nlohmann::json::parse(text)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Io, path + ":" + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace obfuskit::report
