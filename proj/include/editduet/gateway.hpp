// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace editduet {

struct ImageContent {
  std::string media_type;   // e.g. "image/png"
  std::string base64_data;

  bool operator==(const ImageContent&) const = default;
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  std::vector<ImageContent> images;

  bool operator==(const ChatMessage&) const = default;
};

/// Chat-completions wire form. Messages with images become content-part arrays.
nlohmann::json to_json(const ChatMessage& message);

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  /// JSON schema the reply must satisfy, forwarded as response_format.
  std::optional<nlohmann::json> constraint;
  double temperature = 0.0;
  std::optional<std::int64_t> seed;
};

enum class GatewayErrorKind { Transport, Auth, RateLimited, Exhausted, ScriptMismatch, BadResponse, CacheMiss };

std::string_view to_string(GatewayErrorKind kind);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  GatewayErrorKind kind() const { return kind_; }

 private:
  GatewayErrorKind kind_;
};

class CacheMiss : public GatewayError {
 public:
  explicit CacheMiss(const std::string& what) : GatewayError(GatewayErrorKind::CacheMiss, what) {}
};

/// Throws std::invalid_argument unless messages is non-empty and starts with a
/// system message.
void validate_request(const CompletionRequest& request);

class ChatGateway {
 public:
  virtual ~ChatGateway() = default;
  /// Returns the assistant text. Thread-safe for every backend in this file.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptEntry {
  /// When set, the last user message must contain this substring.
  std::optional<std::string> match;
  std::string reply;
};

/// Replays a fixed transcript strictly in order. Running past the end raises
/// GatewayError(Exhausted); a failed match raises GatewayError(ScriptMismatch)
/// naming the expected substring.
class ScriptedGateway final : public ChatGateway {
 public:
  explicit ScriptedGateway(std::vector<ScriptEntry> entries);

  /// {"entries": [{"match": str|null, "reply": str|object}, ...]}; object
  /// replies are serialized to compact JSON.
  static std::vector<ScriptEntry> parse_script(const nlohmann::json& doc);
  static std::vector<ScriptEntry> load_script(const std::filesystem::path& path);

  std::string complete(const CompletionRequest& request) override;

  std::size_t consumed() const;
  std::size_t remaining() const;
  std::vector<CompletionRequest> requests() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptEntry> entries_;
  std::size_t next_ = 0;
  std::vector<CompletionRequest> requests_;
};

// ---------------------------------------------------------------------------
// Remote backend (OpenAI-compatible /chat/completions)

struct RemoteConfig {
  std::string base_url;  // e.g. "https://api.example.com/v1"
  std::string api_key;
  std::string model;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
  bool send_response_format = true;
};

class RemoteGateway final : public ChatGateway {
 public:
  explicit RemoteGateway(RemoteConfig config);

  std::string complete(const CompletionRequest& request) override;

  /// Request body sent to {base_url}/chat/completions.
  nlohmann::json request_body(const CompletionRequest& request) const;

 private:
  RemoteConfig config_;
};

// ---------------------------------------------------------------------------
// Record / replay

enum class SessionMode { Record, Replay };

/// Persists one file per request, named by the request hash, holding
/// {"request": ..., "reply": ...}. Replay serves stored replies verbatim and
/// raises CacheMiss for unseen requests.
class RecordReplayGateway final : public ChatGateway {
 public:
  RecordReplayGateway(std::filesystem::path session_dir, SessionMode mode,
                      std::shared_ptr<ChatGateway> inner = nullptr);

  std::string complete(const CompletionRequest& request) override;

  static nlohmann::json request_json(const CompletionRequest& request);
  static std::string request_hash(const CompletionRequest& request);

 private:
  std::filesystem::path dir_;
  SessionMode mode_;
  std::shared_ptr<ChatGateway> inner_;
  std::mutex write_mutex_;
};

std::unique_ptr<ChatGateway> record_replay(const std::filesystem::path& session_dir,
                                           SessionMode mode,
                                           std::shared_ptr<ChatGateway> inner = nullptr);

}  // namespace editduet
