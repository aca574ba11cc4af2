#pragma once

// Pluggable generation / note-analysis backends.

#include <chrono>
#include <cstdint>
#include <deque>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bioloop {

struct GenerationParams {
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;

  // nullopt when the backend produced no reply (timeout, transport error).
  virtual std::optional<std::string> generate(const std::string& prompt, const GenerationParams& params) = 0;

  // Returns the raw analyzer line, `score=<float>; feedback=<text>`.
  virtual std::optional<std::string> analyze_note(const std::string& transcript) = 0;

  virtual std::string id() const = 0;
};

// Deterministic double: replies come from mock_generate, note analyses are
// scripted and consumed in order.
class MockClient final : public GenerationClient {
 public:
  explicit MockClient(std::vector<std::string> scripted_analyses = {});

  std::optional<std::string> generate(const std::string& prompt, const GenerationParams& params) override;
  std::optional<std::string> analyze_note(const std::string& transcript) override;
  std::string id() const override { return "mock"; }

 private:
  std::deque<std::string> scripted_;
};

struct HttpClientOptions {
  std::string endpoint;  // scheme://host[:port][/path]
  std::string api_key;
  std::chrono::milliseconds timeout{10000};
};

// POSTs {"task": "generate"|"analyze_note", ...} as JSON and reads the
// "text" field of the JSON reply. One retry, then gives up with nullopt.
class HttpGenerationClient final : public GenerationClient {
 public:
  explicit HttpGenerationClient(HttpClientOptions options);

  std::optional<std::string> generate(const std::string& prompt, const GenerationParams& params) override;
  std::optional<std::string> analyze_note(const std::string& transcript) override;
  std::string id() const override { return "live"; }

  std::string last_error() const;

 private:
  std::optional<std::string> post(const std::string& body);

  void set_error(std::string message);

  HttpClientOptions options_;
  mutable std::mutex error_mutex_;
  std::string last_error_;
};

inline constexpr const char* kEndpointEnv = "BIOLOOP_ENDPOINT";
inline constexpr const char* kApiKeyEnv = "BIOLOOP_API_KEY";

// Reads BIOLOOP_ENDPOINT / BIOLOOP_API_KEY. Throws kConfig when the
// endpoint is not set.
std::unique_ptr<GenerationClient> make_live_client_from_env(std::chrono::milliseconds timeout);

// Runs generation requests off the control loop. The loop submits and
// later collects finished replies without blocking.
class CompletionQueue {
 public:
  struct Completion {
    std::uint64_t request_id = 0;
    std::optional<std::string> reply;
  };

  explicit CompletionQueue(GenerationClient& client);
  ~CompletionQueue();

  std::uint64_t submit(std::string prompt, GenerationParams params);
  std::vector<Completion> poll();   // finished so far, in submission order
  std::vector<Completion> drain();  // blocks until everything finished

 private:
  struct Pending {
    std::uint64_t id;
    std::future<std::optional<std::string>> result;
  };
  GenerationClient& client_;
  std::deque<Pending> pending_;
  std::uint64_t next_id_ = 0;
};

}  // namespace bioloop
