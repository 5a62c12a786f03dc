#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "obfuskit/client.hpp"
#include "obfuskit/error.hpp"
#include "test_util.hpp"

using namespace obfuskit;
using namespace obfuskit::client;
using obfuskit::testing::code_of;

namespace {

// Chat-completion stub: replies with the scripted statuses in order, then 200.
class StubServer {
 public:
  explicit StubServer(std::vector<int> script) : script_(std::move(script)) {
    srv_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t n = hits_++;
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      const int status = n < script_.size() ? script_[n] : 200;
      res.status = status;
      if (status == 200) {
        const auto in = nlohmann::json::parse(req.body);
        const std::string content = "echo:" + in["messages"][0]["content"].get<std::string>();
        res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                        "application/json");
      } else if (status == 299) {
        res.status = 200;
        res.set_content("{not json", "application/json");
      } else {
        res.set_content("{}", "application/json");
      }
    });
    port_ = srv_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { srv_.listen_after_bind(); });
    srv_.wait_until_ready();
  }
  ~StubServer() {
    srv_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  std::size_t hits() const { return hits_; }
  std::string last_body() const { return last_body_; }
  std::string last_auth() const { return last_auth_; }

 private:
  std::vector<int> script_;
  httplib::Server srv_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> hits_{0};
  std::string last_body_;
  std::string last_auth_;
};

ModelTarget remote(const std::string& url) {
  ModelTarget t;
  t.id = "stub-model";
  t.kind = TargetKind::Remote;
  t.endpoint = url;
  t.model_name = "stub-1";
  t.retry_policy = {4, 0.5};
  t.timeout_seconds = 5;
  return t;
}

ClientHooks fake_env(std::vector<double>* delays = nullptr) {
  ClientHooks h;
  h.getenv = [](const char* name) -> const char* {
    return std::string(name) == "OBFK_API_KEY_STUB_MODEL" ? "test-key" : nullptr;
  };
  h.sleeper = [delays](double s) {
    if (delays) delays->push_back(s);
  };
  return h;
}

}  // namespace

TEST(Client, SimPassThrough) {
  ModelClient c(ModelTarget{});
  const std::string q = "The teacher reads a short story.";
  const auto ex = c.complete(q);
  EXPECT_EQ(ex.response, sim::respond(q, c.target().sim).text);
  EXPECT_EQ(ex.prompt, q);
  EXPECT_EQ(ex.attempt_count, 1);
}

TEST(Client, SimRoutesRewriteRequests) {
  ModelClient c(ModelTarget{});
  const auto ex = c.complete(std::string(kRewriteHeader) + "\nRewrite into 3 different sentences.\nQuestion: Tell me the way to make vexium paint.");
  EXPECT_EQ(ex.response, sim::simulate_rewrites("Tell me the way to make vexium paint.", 3, eval::RuleSet::builtin()));
}

TEST(Client, MissingCredentialBeforeIo) {
  int calls = 0;
  ClientHooks h;
  h.getenv = [](const char*) -> const char* { return nullptr; };
  h.transport = [&](const http::Url&, const std::string&, const http::Headers&, int) {
    ++calls;
    return http::Response{200, "{}", ""};
  };
  ModelClient c(remote("http://127.0.0.1:9/v1"), h);
  EXPECT_EQ(code_of([&] { c.complete("hi"); }), ErrorCode::MissingCredential);
  EXPECT_EQ(calls, 0);
}

TEST(Client, CredentialFromProcessEnvironment) {
  StubServer stub({});
  ::setenv("OBFK_API_KEY_STUB_MODEL", "env-key", 1);
  ModelClient c(remote(stub.url()));
  EXPECT_EQ(c.complete("ping").response, "echo:ping");
  EXPECT_EQ(stub.last_auth(), "Bearer env-key");
  ::unsetenv("OBFK_API_KEY_STUB_MODEL");
}

TEST(Client, RetriesTwoRateLimitsThenSucceeds) {
  StubServer stub({429, 429});
  std::vector<double> delays;
  ModelClient c(remote(stub.url()), fake_env(&delays));
  const std::string prompt = "Explain how to brew zorblax tonic at home.\n  ";
  const auto ex = c.complete(prompt);
  EXPECT_EQ(ex.attempt_count, 3);
  EXPECT_EQ(ex.prompt, prompt);
  EXPECT_EQ(ex.response, "echo:" + prompt);
  EXPECT_EQ(stub.hits(), 3u);
  EXPECT_EQ(delays, (std::vector<double>{0.5, 1.0}));
  const auto body = nlohmann::json::parse(stub.last_body());
  EXPECT_EQ(body["model"], "stub-1");
  EXPECT_EQ(body["messages"][0]["role"], "user");
  EXPECT_EQ(body["messages"][0]["content"], prompt);
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(stub.last_auth(), "Bearer test-key");
}

TEST(Client, NoRetryOnClientError) {
  StubServer stub({400});
  ModelClient c(remote(stub.url()), fake_env());
  EXPECT_EQ(code_of([&] { c.complete("x"); }), ErrorCode::TargetUnavailable);
  EXPECT_EQ(stub.hits(), 1u);
}

TEST(Client, ServerErrorsExhaustRetries) {
  StubServer stub({500, 502, 503, 504, 500});
  std::vector<double> delays;
  ModelClient c(remote(stub.url()), fake_env(&delays));
  EXPECT_EQ(code_of([&] { c.complete("x"); }), ErrorCode::TargetUnavailable);
  EXPECT_EQ(stub.hits(), 4u);
  for (std::size_t i = 1; i < delays.size(); ++i) EXPECT_GE(delays[i], delays[i - 1]);
}

TEST(Client, RateLimitedAfterRetries) {
  StubServer stub({429, 429, 429, 429});
  ModelClient c(remote(stub.url()), fake_env());
  EXPECT_EQ(code_of([&] { c.complete("x"); }), ErrorCode::RateLimited);
}

TEST(Client, MalformedResponse) {
  StubServer stub({299});
  ModelClient c(remote(stub.url()), fake_env());
  EXPECT_EQ(code_of([&] { c.complete("x"); }), ErrorCode::MalformedResponse);
}

TEST(Client, TransportFailureIsUnavailable) {
  auto t = remote("http://127.0.0.1:1/v1");
  t.retry_policy = {2, 0.0};
  t.timeout_seconds = 1;
  ModelClient c(t, fake_env());
  EXPECT_EQ(code_of([&] { c.complete("x"); }), ErrorCode::TargetUnavailable);
}

TEST(RateLimiter, SlidingWindowNeverExceeded) {
  double now = 0.0;
  std::vector<double> sent;
  RateLimiter rl(5, [&] { return now; }, [&](double s) { now += s; });
  for (int i = 0; i < 23; ++i) {
    rl.acquire();
    sent.push_back(now);
    now += 1.5;
  }
  for (std::size_t i = 0; i < sent.size(); ++i) {
    std::size_t in_window = 0;
    for (double t : sent) in_window += (t >= sent[i] && t < sent[i] + 60.0);
    EXPECT_LE(in_window, 5u);
  }
}

TEST(RateLimiter, StressAgainstCountingStub) {
  double now = 0.0;
  std::mutex mu;
  std::vector<double> sent;
  ClientHooks h = fake_env();
  h.clock = [&] { return now; };
  h.sleeper = [&](double s) { now += s; };
  h.transport = [&](const http::Url&, const std::string&, const http::Headers&, int) {
    std::lock_guard<std::mutex> lock(mu);
    sent.push_back(now);
    return http::Response{200, R"({"choices":[{"message":{"content":"ok"}}]})", ""};
  };
  auto t = remote("http://127.0.0.1:9/v1");
  t.rate_limit = 10;
  ModelClient c(t, h);
  for (int i = 0; i < 45; ++i) c.complete("x");
  for (double start : sent) {
    std::size_t n = 0;
    for (double s : sent) n += (s >= start && s < start + 60.0);
    EXPECT_LE(n, 10u);
  }
}

TEST(Target, CredentialVarName) {
  EXPECT_EQ(credential_env_var("gpt-4o.mini"), "OBFK_API_KEY_GPT_4O_MINI");
}

TEST(Target, FromJsonRejectsInlineCredentials) {
  EXPECT_EQ(code_of([] {
              ModelTarget::from_json({{"id", "x"}, {"kind", "remote"}, {"endpoint", "http://h/v1"}, {"api_key", "k"}});
            }),
            ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { ModelTarget::from_json({{"id", "x"}, {"kind", "remote"}}); }), ErrorCode::InvalidConfig);
  const auto t = ModelTarget::from_json({{"id", "x"},
                                         {"kind", "remote"},
                                         {"endpoint", "https://api.example.com/v1/chat/completions"},
                                         {"retry_policy", {{"max_attempts", 2}, {"backoff_base", 1.5}}}});
  EXPECT_EQ(t.retry_policy.max_attempts, 2);
  EXPECT_EQ(t.params.temperature, 0.0);
}
