#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "obfuskit/http.hpp"
#include "obfuskit/sim.hpp"
#include "obfuskit/toxicity.hpp"

namespace obfuskit::client {

// First line of every ambiguity-rewrite request; SIM targets route these to
// the simulated rewriter instead of respond().
inline constexpr std::string_view kRewriteHeader = "[obfuskit:ca-rewrite:v1]";

enum class TargetKind { Remote, Sim };

struct RequestParams {
  double temperature = 0.0;
  int max_tokens = 512;
};

struct RetryPolicy {
  int max_attempts = 4;
  double backoff_base = 0.5;  // seconds; delay before retry n is base * 2^(n-1)
};

struct ModelTarget {
  std::string id = "sim";
  TargetKind kind = TargetKind::Sim;
  std::string endpoint;
  std::string model_name = "obfuskit-sim";
  RequestParams params;
  double rate_limit = 0.0;  // requests per minute, 0 = unlimited
  RetryPolicy retry_policy;
  std::size_t parallelism = 4;
  int timeout_seconds = 60;
  sim::SimConfig sim = sim::SimConfig::defaults();
  eval::RuleSet sim_rules = eval::RuleSet::builtin();

  // {id, kind: "sim"|"remote", endpoint, model_name, params, rate_limit, retry_policy, parallelism}
  static ModelTarget from_json(const nlohmann::json& j, const sim::SimConfig& sim_config = sim::SimConfig::defaults());
  void validate() const;
};

// OBFK_API_KEY_<ID>, with the id upper-cased and non-alphanumerics mapped to '_'.
std::string credential_env_var(std::string_view target_id);

struct Exchange {
  std::string prompt;
  std::string response;
  double latency_seconds = 0.0;
  std::string target;
  std::string timestamp;  // UTC ISO-8601
  int attempt_count = 0;

  nlohmann::json to_json() const;
};

using Transport = std::function<http::Response(const http::Url&, const std::string& body, const http::Headers&, int timeout_seconds)>;
using Sleeper = std::function<void(double seconds)>;
using Clock = std::function<double()>;  // monotonic seconds

struct ClientHooks {
  Transport transport;
  Sleeper sleeper;
  Clock clock;
  std::function<const char*(const char*)> getenv;
};

// Sliding 60 s window shared by all callers of one client.
class RateLimiter {
 public:
  RateLimiter(double per_minute, Clock clock, Sleeper sleeper);
  void acquire();

 private:
  double per_minute_;
  Clock clock_;
  Sleeper sleeper_;
  std::mutex mu_;
  std::deque<double> sent_;
};

std::string iso_timestamp_now();

class ModelClient {
 public:
  explicit ModelClient(ModelTarget target, ClientHooks hooks = {});
  ~ModelClient();

  ModelClient(const ModelClient&) = delete;
  ModelClient& operator=(const ModelClient&) = delete;

  // Thread-safe; at most target.parallelism calls in flight.
  Exchange complete(std::string_view prompt);

  const ModelTarget& target() const { return target_; }

  // Request body sent to REMOTE targets.
  static std::string request_body(const ModelTarget& target, std::string_view prompt);
  // choices[0].message.content; throws MalformedResponse.
  static std::string parse_reply(std::string_view body);

 private:
  std::string complete_sim(std::string_view prompt) const;
  std::string complete_remote(std::string_view prompt, int& attempts);

  ModelTarget target_;
  ClientHooks hooks_;
  std::unique_ptr<RateLimiter> limiter_;
  struct Gate;
  std::unique_ptr<Gate> gate_;
};

}  // namespace obfuskit::client
