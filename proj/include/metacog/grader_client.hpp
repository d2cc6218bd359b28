#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 the metacog authors

/**
 * metacog/grader_client.hpp
 *
 * HTTP transport for the grader protocol. The judge is addressed as a
 * chat-completion service: one POST to /v1/chat/completions per request,
 * temperature pinned to 0, the rendered scoring prompt as the sole user
 * message. The reply content is handed to parse_verdict.
 *
 * Failure taxonomy after retries are exhausted:
 *   GraderUnavailable  no attempt ever produced a reply body (connection
 *                      refused, timeout, non-2xx status, bad envelope)
 *   GraderIncoherent   at least one reply body arrived but none parsed
 *                      into an admissible verdict
 *
 * Split into its own header so library users who never grade remotely do
 * not pay for the httplib include.
 */

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "metacog/errors.hpp"
#include "metacog/grader.hpp"

namespace metacog::grader {

namespace detail {

/// Pull the assistant text out of a chat-completion reply envelope.
/// Returns empty optional when the envelope does not have that shape.
inline std::optional<std::string> completion_content(const std::string& body) {
  auto doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    return std::nullopt;
  }
  const auto& first = choices->front();
  if (!first.is_object()) return std::nullopt;
  auto message = first.find("message");
  if (message == first.end() || !message->is_object()) return std::nullopt;
  auto content = message->find("content");
  if (content == message->end() || !content->is_string()) return std::nullopt;
  return content->get<std::string>();
}

}  // namespace detail

/**
 * One round trip (plus retries) to a remote judge. `n` is the gold unit
 * count the verdict is range-checked against. Throws GraderUnavailable or
 * GraderIncoherent per the header comment; endpoint misconfiguration
 * throws InvalidConfig.
 */
inline GraderResponse grade_remote(const GraderEndpoint& endpoint,
                                   const std::string& prompt, int n) {
  endpoint.validate();

  nlohmann::json payload = {
      {"model", endpoint.model_name},
      {"temperature", 0},
      {"messages",
       nlohmann::json::array(
           {nlohmann::json{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string body = payload.dump();

  std::string last_raw;
  bool any_body = false;
  std::string last_transport;

  for (int attempt = 1; attempt <= endpoint.max_attempts; ++attempt) {
    httplib::Client client(endpoint.base_url);
    client.set_connection_timeout(endpoint.timeout);
    client.set_read_timeout(endpoint.timeout);
    client.set_write_timeout(endpoint.timeout);
    if (const char* key = std::getenv(endpoint.api_key_env.c_str());
        key != nullptr && key[0] != '\0') {
      client.set_bearer_token_auth(key);
    }

    auto res = client.Post("/v1/chat/completions", body, "application/json");
    if (!res) {
      last_transport = httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_transport = "HTTP status " + std::to_string(res->status);
      continue;
    }
    auto content = detail::completion_content(res->body);
    if (!content) {
      last_transport = "reply is not a chat completion envelope";
      continue;
    }
    any_body = true;
    last_raw = *content;
    try {
      GraderResponse out;
      out.verdict = parse_verdict(*content, n);
      out.raw = *content;
      out.attempts = attempt;
      return out;
    } catch (const Error&) {
      // Reply arrived but the verdict is malformed; retry in case the
      // judge is nondeterministic at the transport layer.
      continue;
    }
  }

  if (any_body) {
    throw Error(errc::grader_incoherent,
                "no admissible verdict in " +
                    std::to_string(endpoint.max_attempts) +
                    " replies; last reply: " + last_raw);
  }
  throw Error(errc::grader_unavailable,
              "no reply from " + endpoint.base_url + " in " +
                  std::to_string(endpoint.max_attempts) +
                  " attempts; last error: " + last_transport);
}

/**
 * Bounds concurrent grade_remote calls. One instance is shared by the
 * pipeline's worker threads; each call holds a slot for its full retry
 * loop so a flaky judge cannot be hammered by every worker at once.
 */
class GraderClient {
 public:
  explicit GraderClient(GraderEndpoint endpoint)
      : endpoint_(std::move(endpoint)),
        slots_(std::make_unique<std::counting_semaphore<>>(
            endpoint_.max_in_flight)) {
    endpoint_.validate();
  }

  GraderResponse grade(const std::string& prompt, int n) {
    slots_->acquire();
    try {
      auto out = grade_remote(endpoint_, prompt, n);
      slots_->release();
      return out;
    } catch (...) {
      slots_->release();
      throw;
    }
  }

  const GraderEndpoint& endpoint() const { return endpoint_; }

 private:
  GraderEndpoint endpoint_;
  std::unique_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace metacog::grader
