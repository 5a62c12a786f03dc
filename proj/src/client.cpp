#include "obfuskit/client.hpp"

#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <regex>
#include <thread>

#include "obfuskit/error.hpp"

namespace obfuskit::client {

namespace {

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

void real_sleep(double s) {
  if (s > 0) std::this_thread::sleep_for(std::chrono::duration<double>(s));
}

TargetKind parse_kind(const std::string& s) {
  if (s == "sim" || s == "SIM") return TargetKind::Sim;
  if (s == "remote" || s == "REMOTE") return TargetKind::Remote;
  throw Error(ErrorCode::InvalidConfig, "target kind must be sim or remote, got " + s);
}

bool transient(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

struct ModelClient::Gate {
  std::mutex mu;
  std::condition_variable cv;
  std::size_t free;
};

ModelTarget ModelTarget::from_json(const nlohmann::json& j, const sim::SimConfig& sim_config) {
  ModelTarget t;
  t.sim = sim_config;
  try {
    t.id = j.at("id").get<std::string>();
    t.kind = parse_kind(j.value("kind", std::string("sim")));
    t.endpoint = j.value("endpoint", std::string());
    t.model_name = j.value("model_name", t.kind == TargetKind::Sim ? std::string("obfuskit-sim") : t.id);
    if (j.contains("params")) {
      t.params.temperature = j["params"].value("temperature", t.params.temperature);
      t.params.max_tokens = j["params"].value("max_tokens", t.params.max_tokens);
    }
    t.rate_limit = j.value("rate_limit", 0.0);
    if (j.contains("retry_policy")) {
      t.retry_policy.max_attempts = j["retry_policy"].value("max_attempts", t.retry_policy.max_attempts);
      t.retry_policy.backoff_base = j["retry_policy"].value("backoff_base", t.retry_policy.backoff_base);
    }
    t.parallelism = j.value("parallelism", t.parallelism);
    t.timeout_seconds = j.value("timeout_seconds", t.timeout_seconds);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("target: ") + e.what());
  }
  if (j.contains("api_key") || j.contains("credential")) {
    throw Error(ErrorCode::InvalidConfig, "target " + t.id + ": credentials are read from " +
                                              credential_env_var(t.id) + ", not from config");
  }
  t.validate();
  return t;
}

void ModelTarget::validate() const {
  auto bad = [&](const std::string& w) { throw Error(ErrorCode::InvalidConfig, "target " + id + ": " + w); };
  if (id.empty()) bad("empty id");
  if (kind == TargetKind::Remote) {
    if (endpoint.empty()) bad("remote target needs an endpoint");
    http::parse_url(endpoint);
  }
  if (retry_policy.max_attempts < 1) bad("retry_policy.max_attempts must be >= 1");
  if (retry_policy.backoff_base < 0) bad("retry_policy.backoff_base must be >= 0");
  if (rate_limit < 0) bad("rate_limit must be >= 0");
  if (parallelism < 1) bad("parallelism must be >= 1");
}

std::string credential_env_var(std::string_view target_id) {
  std::string out = "OBFK_API_KEY_";
  for (unsigned char c : target_id) out += std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_';
  return out;
}

nlohmann::json Exchange::to_json() const {
  return {{"prompt", prompt},   {"response", response},   {"latency", latency_seconds},
          {"target", target},   {"timestamp", timestamp}, {"attempt_count", attempt_count}};
}

std::string iso_timestamp_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

RateLimiter::RateLimiter(double per_minute, Clock clock, Sleeper sleeper)
    : per_minute_(per_minute), clock_(std::move(clock)), sleeper_(std::move(sleeper)) {}

void RateLimiter::acquire() {
  if (per_minute_ <= 0) return;
  const auto limit = static_cast<std::size_t>(std::floor(per_minute_));
  std::lock_guard<std::mutex> lock(mu_);
  for (;;) {
    const double now = clock_();
    while (!sent_.empty() && now - sent_.front() >= 60.0) sent_.pop_front();
    if (sent_.size() < std::max<std::size_t>(limit, 1)) {
      sent_.push_back(now);
      return;
    }
    sleeper_(sent_.front() + 60.0 - now);
  }
}

ModelClient::ModelClient(ModelTarget target, ClientHooks hooks)
    : target_(std::move(target)), hooks_(std::move(hooks)), gate_(std::make_unique<Gate>()) {
  target_.validate();
  if (!hooks_.transport) {
    hooks_.transport = [](const http::Url& u, const std::string& b, const http::Headers& h, int t) {
      return http::post_json(u, b, h, t);
    };
  }
  if (!hooks_.sleeper) hooks_.sleeper = real_sleep;
  if (!hooks_.clock) hooks_.clock = steady_seconds;
  if (!hooks_.getenv) hooks_.getenv = [](const char* n) -> const char* { return std::getenv(n); };
  limiter_ = std::make_unique<RateLimiter>(target_.rate_limit, hooks_.clock, hooks_.sleeper);
  gate_->free = target_.parallelism;
}

ModelClient::~ModelClient() = default;

std::string ModelClient::request_body(const ModelTarget& target, std::string_view prompt) {
  nlohmann::json j;
  j["model"] = target.model_name;
  j["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  j["temperature"] = target.params.temperature;
  j["max_tokens"] = target.params.max_tokens;
  return j.dump();
}

std::string ModelClient::parse_reply(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, e.what());
  }
}

std::string ModelClient::complete_sim(std::string_view prompt) const {
  if (prompt.substr(0, kRewriteHeader.size()) == kRewriteHeader) {
    static const std::regex k_re(R"(into (\d+) different)");
    const std::string p(prompt);
    std::smatch m;
    std::size_t k = 1;
    if (std::regex_search(p, m, k_re)) k = std::stoul(m[1]);
    const auto qpos = p.rfind("\nQuestion: ");
    if (qpos == std::string::npos) throw Error(ErrorCode::MalformedResponse, "rewrite request without a question");
    std::string question = p.substr(qpos + 11);
    while (!question.empty() && (question.back() == '\n' || question.back() == '\r')) question.pop_back();
    return sim::simulate_rewrites(question, k, target_.sim_rules);
  }
  return sim::respond(prompt, target_.sim).text;
}

std::string ModelClient::complete_remote(std::string_view prompt, int& attempts) {
  const std::string var = credential_env_var(target_.id);
  const char* key = hooks_.getenv(var.c_str());
  if (!key || !*key) throw Error(ErrorCode::MissingCredential, var + " is not set");

  const http::Url url = http::parse_url(target_.endpoint);
  const std::string body = request_body(target_, prompt);
  const http::Headers headers{{"Authorization", std::string("Bearer ") + key}};

  http::Response last;
  for (attempts = 1;; ++attempts) {
    limiter_->acquire();
    last = hooks_.transport(url, body, headers, target_.timeout_seconds);
    if (last.status >= 200 && last.status < 300) return parse_reply(last.body);
    if (!transient(last.status) || attempts >= target_.retry_policy.max_attempts) break;
    hooks_.sleeper(target_.retry_policy.backoff_base * std::pow(2.0, attempts - 1));
  }
  if (last.status == 429) {
    throw Error(ErrorCode::RateLimited, target_.id + ": still rate limited after " + std::to_string(attempts) + " attempts");
  }
  const std::string detail = last.status == 0 ? last.transport_error : "HTTP " + std::to_string(last.status);
  throw Error(ErrorCode::TargetUnavailable, target_.id + ": " + detail);
}

Exchange ModelClient::complete(std::string_view prompt) {
  if (prompt.empty()) throw Error(ErrorCode::EmptyQuery, "empty prompt");

  {
    std::unique_lock<std::mutex> lock(gate_->mu);
    gate_->cv.wait(lock, [&] { return gate_->free > 0; });
    --gate_->free;
  }
  struct Release {
    Gate& g;
    ~Release() {
      {
        std::lock_guard<std::mutex> lock(g.mu);
        ++g.free;
      }
      g.cv.notify_one();
    }
  } release{*gate_};

  Exchange ex;
  ex.prompt = std::string(prompt);
  ex.target = target_.model_name;
  ex.timestamp = iso_timestamp_now();
  const double start = hooks_.clock();
  if (target_.kind == TargetKind::Sim) {
    ex.response = complete_sim(prompt);
    ex.attempt_count = 1;
  } else {
    ex.response = complete_remote(prompt, ex.attempt_count);
  }
  ex.latency_seconds = hooks_.clock() - start;
  return ex;
}

}  // namespace obfuskit::client
