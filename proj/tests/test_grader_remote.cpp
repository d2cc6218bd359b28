// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "metacog/grader_client.hpp"
#include "support.hpp"

using namespace metacog::grader;
using metacog::errc;

namespace {

std::string envelope(const std::string& content) {
  nlohmann::json j;
  j["choices"][0]["message"]["role"] = "assistant";
  j["choices"][0]["message"]["content"] = content;
  return j.dump();
}

std::string good_verdict() {
  return R"({"k": 2, "r": 1, "a": 0.75, "s": 0, "c": 1})";
}

/// In-process judge stub bound to a random loopback port.
class StubJudge {
 public:
  template <typename Handler>
  explicit StubJudge(Handler handler) {
    server_.Post("/v1/chat/completions", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    REQUIRE(port_ > 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubJudge() {
    server_.stop();
    thread_.join();
  }

  GraderEndpoint endpoint() const {
    GraderEndpoint ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port_);
    ep.model_name = "stub-judge";
    ep.timeout = std::chrono::milliseconds(5000);
    return ep;
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("a healthy judge answers in one attempt") {
  std::string seen_body;
  std::string seen_auth;
  StubJudge judge([&](const httplib::Request& req, httplib::Response& res) {
    seen_body = req.body;
    seen_auth = req.get_header_value("Authorization");
    res.set_content(envelope(good_verdict()), "application/json");
  });

  GraderResponse out = grade_remote(judge.endpoint(), "grade this please", 5);
  REQUIRE(out.attempts == 1);
  REQUIRE(out.verdict.k == 2);
  REQUIRE(out.verdict.r == 1);
  REQUIRE(out.verdict.a == 0.75);
  REQUIRE(out.verdict.s == 0);
  REQUIRE(out.verdict.c == 1);
  REQUIRE(out.raw == good_verdict());

  auto payload = nlohmann::json::parse(seen_body);
  REQUIRE(payload.at("model") == "stub-judge");
  REQUIRE(payload.at("temperature") == 0);
  REQUIRE(payload.at("messages").size() == 1);
  REQUIRE(payload.at("messages")[0].at("role") == "user");
  REQUIRE(payload.at("messages")[0].at("content") == "grade this please");
  REQUIRE(seen_auth.empty());
}

TEST_CASE("the bearer token comes from the configured environment variable") {
  std::string seen_auth;
  StubJudge judge([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(envelope(good_verdict()), "application/json");
  });

  ::setenv("METACOG_TEST_JUDGE_KEY", "secret123", 1);
  GraderEndpoint ep = judge.endpoint();
  ep.api_key_env = "METACOG_TEST_JUDGE_KEY";
  grade_remote(ep, "prompt", 5);
  ::unsetenv("METACOG_TEST_JUDGE_KEY");
  REQUIRE(seen_auth == "Bearer secret123");
}

TEST_CASE("a flaky judge is retried until it answers") {
  std::atomic<int> calls{0};
  StubJudge judge([&](const httplib::Request&, httplib::Response& res) {
    if (++calls == 1) {
      res.status = 500;
      res.set_content("overloaded", "text/plain");
    } else {
      res.set_content(envelope(good_verdict()), "application/json");
    }
  });

  GraderEndpoint ep = judge.endpoint();
  ep.max_attempts = 3;
  GraderResponse out = grade_remote(ep, "prompt", 5);
  REQUIRE(out.attempts == 2);
  REQUIRE(calls == 2);
  REQUIRE(out.verdict.k == 2);
}

TEST_CASE("a judge that never replies usefully is unavailable") {
  std::atomic<int> calls{0};
  StubJudge judge([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 503;
    res.set_content("down", "text/plain");
  });

  GraderEndpoint ep = judge.endpoint();
  ep.max_attempts = 2;
  support::require_error([&] { grade_remote(ep, "prompt", 5); },
                         errc::grader_unavailable);
  REQUIRE(calls == 2);
}

TEST_CASE("a broken reply envelope counts as unavailable") {
  StubJudge judge([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"surprise": true})", "application/json");
  });

  GraderEndpoint ep = judge.endpoint();
  ep.max_attempts = 1;
  support::require_error([&] { grade_remote(ep, "prompt", 5); },
                         errc::grader_unavailable);
}

TEST_CASE("replies without an admissible verdict are incoherent") {
  std::atomic<int> calls{0};
  StubJudge judge([&](const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.set_content(envelope("I would rather write a poem."),
                    "application/json");
  });

  GraderEndpoint ep = judge.endpoint();
  ep.max_attempts = 2;
  support::require_error([&] { grade_remote(ep, "prompt", 5); },
                         errc::grader_incoherent);
  REQUIRE(calls == 2);

  // Out-of-range verdicts are replies, not transport failures.
  StubJudge strict([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(envelope(R"({"k": 9, "r": 0, "a": 1, "s": 0, "c": 1})"),
                    "application/json");
  });
  GraderEndpoint ep2 = strict.endpoint();
  ep2.max_attempts = 1;
  support::require_error([&] { grade_remote(ep2, "prompt", 5); },
                         errc::grader_incoherent);
}

TEST_CASE("an unreachable endpoint fails fast as unavailable") {
  GraderEndpoint ep;
  ep.base_url = "http://127.0.0.1:1";
  ep.model_name = "nobody";
  ep.timeout = std::chrono::milliseconds(250);
  ep.max_attempts = 1;
  support::require_error([&] { grade_remote(ep, "prompt", 3); },
                         errc::grader_unavailable);
}

TEST_CASE("endpoint configuration is validated up front") {
  GraderEndpoint ep;
  ep.base_url = "";
  ep.model_name = "judge";
  support::require_error([&] { GraderClient client(ep); },
                         errc::invalid_config);

  GraderEndpoint bad_attempts;
  bad_attempts.base_url = "http://127.0.0.1:1";
  bad_attempts.model_name = "judge";
  bad_attempts.max_attempts = 0;
  support::require_error([&] { grade_remote(bad_attempts, "p", 1); },
                         errc::invalid_config);
}

TEST_CASE("the client bounds in-flight requests") {
  std::atomic<int> active{0};
  std::atomic<int> max_active{0};
  StubJudge judge([&](const httplib::Request&, httplib::Response& res) {
    int now = ++active;
    int seen = max_active.load();
    while (now > seen && !max_active.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(40));
    --active;
    res.set_content(envelope(good_verdict()), "application/json");
  });

  GraderEndpoint ep = judge.endpoint();
  ep.max_in_flight = 2;
  GraderClient client(ep);

  std::vector<std::thread> callers;
  std::atomic<int> done{0};
  for (int i = 0; i < 8; ++i) {
    callers.emplace_back([&] {
      GraderResponse out = client.grade("prompt", 5);
      if (out.verdict.k == 2) ++done;
    });
  }
  for (auto& t : callers) t.join();
  REQUIRE(done == 8);
  REQUIRE(max_active.load() <= 2);
}
