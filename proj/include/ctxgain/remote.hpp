#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "httplib.h"
#include "json.hpp"

#include "ctxgain/errors.hpp"
#include "ctxgain/verifier.hpp"

namespace ctxgain {

struct RemoteConfig {
  std::string endpoint;  // base URL, e.g. "http://127.0.0.1:8311"
  std::string path = "/v1/completions";
  std::string model;
  std::string separator = "\n\n";
  double timeout_seconds = 30.0;
};

// Scores segments against an echo-capable completions endpoint. One round
// trip per scoring: the prompt is echoed back with per-token logprobs and
// text offsets, and only the segment's tokens are averaged. Every failure
// surfaces as RemoteError; nothing is silently zeroed.
class RemoteLogprobClient : public VerifierBackend {
 public:
  explicit RemoteLogprobClient(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.endpoint.empty()) throw ConfigError("remote endpoint is empty");
  }

  std::string name() const override { return "remote:" + cfg_.model; }
  const RemoteConfig& config() const { return cfg_; }

 protected:
  NllReport do_nll(std::string_view segment,
                   std::optional<std::string_view> context) const override {
    if (segment.empty()) throw EmptySegment("segment is empty");

    std::string prompt;
    if (context && !context->empty()) {
      prompt.reserve(context->size() + cfg_.separator.size() + segment.size());
      prompt.append(*context).append(cfg_.separator).append(segment);
    } else {
      prompt = std::string(segment);
    }
    const size_t boundary = prompt.size() - segment.size();

    nlohmann::json req = {{"model", cfg_.model},
                          {"prompt", prompt},
                          {"echo", true},
                          {"max_new", 0},
                          {"logprobs", true}};

    // A fresh connection per request keeps concurrent scoring safe; the
    // effective in-flight cap is the caller's worker pool.
    httplib::Client client(cfg_.endpoint);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_seconds));
    auto res = client.Post(cfg_.path, req.dump(), "application/json");
    if (!res)
      throw RemoteError("remote verifier unreachable: " +
                        httplib::to_string(res.error()));
    if (res->status != 200)
      throw RemoteError("remote verifier returned HTTP " +
                        std::to_string(res->status));

    nlohmann::json body;
    try {
      body = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw RemoteError(std::string("malformed remote response: ") + e.what());
    }
    if (!body.contains("choices") || body["choices"].empty())
      throw RemoteError("remote response has no choices");
    const auto& lp = body["choices"][0]["logprobs"];
    if (!lp.is_object() || !lp.contains("token_logprobs") ||
        !lp.contains("text_offset"))
      throw RemoteError("remote response lacks echoed logprobs");

    const auto& logprobs = lp["token_logprobs"];
    const auto& offsets = lp["text_offset"];
    if (!logprobs.is_array() || !offsets.is_array() ||
        logprobs.size() != offsets.size())
      throw RemoteError("remote logprob arrays are misaligned");

    // The segment must start exactly on a token boundary of the echo; a
    // token straddling it means the tokenization merged across the
    // separator and the pair would not be comparable.
    size_t first = logprobs.size();
    for (size_t i = 0; i < offsets.size(); ++i) {
      size_t off = offsets[i].get<size_t>();
      if (off == boundary) {
        first = i;
        break;
      }
      if (off > boundary)
        throw RemoteError("segment boundary falls inside an echoed token");
    }
    if (first == logprobs.size())
      throw RemoteError("echo contains no tokens at the segment boundary");

    double sum = 0.0;
    uint64_t count = 0;
    for (size_t i = first; i < logprobs.size(); ++i) {
      if (logprobs[i].is_null())
        throw RemoteError("segment token " + std::to_string(i) +
                          " has no logprob");
      sum += logprobs[i].get<double>();
      ++count;
    }
    if (count == 0) throw EmptySegment("segment tokenized to zero tokens");
    return {-sum / double(count), count};
  }

 private:
  RemoteConfig cfg_;
};

}  // namespace ctxgain
