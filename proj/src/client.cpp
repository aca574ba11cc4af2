#include "bioloop/client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "bioloop/directive.hpp"
#include "bioloop/error.hpp"

namespace bioloop {

MockClient::MockClient(std::vector<std::string> scripted_analyses)
    : scripted_(scripted_analyses.begin(), scripted_analyses.end()) {}

std::optional<std::string> MockClient::generate(const std::string& prompt, const GenerationParams& params) {
  return mock_generate(prompt, params.seed);
}

std::optional<std::string> MockClient::analyze_note(const std::string&) {
  if (scripted_.empty()) return std::nullopt;
  auto reply = std::move(scripted_.front());
  scripted_.pop_front();
  return reply;
}

HttpGenerationClient::HttpGenerationClient(HttpClientOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw Error(ErrorCode::kConfig, "live client needs an endpoint");
}

std::optional<std::string> HttpGenerationClient::post(const std::string& body) {
  // Split scheme://host[:port] from the request path.
  const auto scheme_end = options_.endpoint.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = options_.endpoint.find('/', host_start);
  const std::string base = options_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : options_.endpoint.substr(path_start);

  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client cli(base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers;
    if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

    auto res = cli.Post(path, headers, body, "application/json");
    if (!res) {
      set_error("transport error: " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status != 200) {
      set_error("HTTP status " + std::to_string(res->status));
      continue;
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("text") || !parsed["text"].is_string()) {
      set_error("reply is not a JSON object with a text field");
      continue;
    }
    set_error({});
    return parsed["text"].get<std::string>();
  }
  return std::nullopt;
}

void HttpGenerationClient::set_error(std::string message) {
  std::lock_guard lock(error_mutex_);
  last_error_ = std::move(message);
}

std::string HttpGenerationClient::last_error() const {
  std::lock_guard lock(error_mutex_);
  return last_error_;
}

std::optional<std::string> HttpGenerationClient::generate(const std::string& prompt,
                                                          const GenerationParams& params) {
  nlohmann::json body = {{"task", "generate"},
                         {"prompt", prompt},
                         {"temperature", params.temperature},
                         {"seed", params.seed}};
  return post(body.dump());
}

std::optional<std::string> HttpGenerationClient::analyze_note(const std::string& transcript) {
  nlohmann::json body = {{"task", "analyze_note"}, {"transcript", transcript}};
  return post(body.dump());
}

std::unique_ptr<GenerationClient> make_live_client_from_env(std::chrono::milliseconds timeout) {
  const char* endpoint = std::getenv(kEndpointEnv);
  if (endpoint == nullptr || *endpoint == '\0') {
    throw Error(ErrorCode::kConfig, std::string("live client requires ") + kEndpointEnv);
  }
  const char* key = std::getenv(kApiKeyEnv);
  return std::make_unique<HttpGenerationClient>(
      HttpClientOptions{endpoint, key == nullptr ? "" : key, timeout});
}

CompletionQueue::CompletionQueue(GenerationClient& client) : client_(client) {}

CompletionQueue::~CompletionQueue() {
  for (auto& p : pending_) p.result.wait();
}

std::uint64_t CompletionQueue::submit(std::string prompt, GenerationParams params) {
  const auto id = next_id_++;
  pending_.push_back({id, std::async(std::launch::async, [this, prompt = std::move(prompt), params] {
                        return client_.generate(prompt, params);
                      })});
  return id;
}

std::vector<CompletionQueue::Completion> CompletionQueue::poll() {
  std::vector<Completion> done;
  while (!pending_.empty() &&
         pending_.front().result.wait_for(std::chrono::seconds(0)) == std::future_status::ready) {
    done.push_back({pending_.front().id, pending_.front().result.get()});
    pending_.pop_front();
  }
  return done;
}

std::vector<CompletionQueue::Completion> CompletionQueue::drain() {
  std::vector<Completion> done;
  while (!pending_.empty()) {
    done.push_back({pending_.front().id, pending_.front().result.get()});
    pending_.pop_front();
  }
  return done;
}

}  // namespace bioloop
