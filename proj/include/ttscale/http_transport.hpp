// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <semaphore>
#include <string>

#include "ttscale/provider.hpp"

namespace ttscale {

enum class WireFormat { OpenAI, Gemini };

/// Request bodies and response decoding for the vendor chat endpoints.
json openai_request_body(const ChatRequest& request);
ChatResponse openai_parse_response(const json& body);
json gemini_request_body(const ChatRequest& request);
ChatResponse gemini_parse_response(const json& body);

/// Live chat-completion adapter. Connection failures, 429 and 5xx are
/// transient TransportErrors; other non-2xx statuses are permanent.
class HttpTransport final : public Transport {
 public:
  struct Options {
    std::string base_url;
    std::string api_key;
    int max_in_flight = 8;
    int timeout_s = 600;
  };

  HttpTransport(WireFormat format, Options options);
  ~HttpTransport() override;

  ChatResponse send(const ChatRequest& request) override;

 private:
  WireFormat format_;
  Options options_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // anything after the origin
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

}  // namespace ttscale
