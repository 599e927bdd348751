// SPDX-License-Identifier: Apache-2.0
#include "editduet/gateway.hpp"

#include "editduet/errors.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>

#include "editduet/hashing.hpp"
#include "http_util.hpp"

namespace editduet {

using nlohmann::json;

json to_json(const ChatMessage& message) {
  if (message.images.empty()) return {{"role", message.role}, {"content", message.content}};
  json parts = json::array();
  parts.push_back({{"type", "text"}, {"text", message.content}});
  for (const auto& img : message.images) {
    parts.push_back({{"type", "image_url"},
                     {"image_url", {{"url", "data:" + img.media_type + ";base64," + img.base64_data}}}});
  }
  return {{"role", message.role}, {"content", std::move(parts)}};
}

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::Transport: return "Transport";
    case GatewayErrorKind::Auth: return "Auth";
    case GatewayErrorKind::RateLimited: return "RateLimited";
    case GatewayErrorKind::Exhausted: return "Exhausted";
    case GatewayErrorKind::ScriptMismatch: return "ScriptMismatch";
    case GatewayErrorKind::BadResponse: return "BadResponse";
    case GatewayErrorKind::CacheMiss: return "CacheMiss";
  }
  return "?";
}

void validate_request(const CompletionRequest& request) {
  if (request.messages.empty()) throw std::invalid_argument("completion request has no messages");
  if (request.messages.front().role != "system") {
    throw std::invalid_argument("first message of a completion request must be a system message");
  }
}

// ---------------------------------------------------------------------------

ScriptedGateway::ScriptedGateway(std::vector<ScriptEntry> entries) : entries_(std::move(entries)) {}

std::vector<ScriptEntry> ScriptedGateway::parse_script(const json& doc) {
  const json& entries = doc.is_array() ? doc : doc.at("entries");
  std::vector<ScriptEntry> out;
  for (const auto& e : entries) {
    ScriptEntry entry;
    if (e.contains("match") && !e["match"].is_null()) entry.match = e["match"].get<std::string>();
    const json& reply = e.at("reply");
    entry.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
    out.push_back(std::move(entry));
  }
  return out;
}

std::vector<ScriptEntry> ScriptedGateway::load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open script " + path.string());
  try {
    return parse_script(json::parse(in));
  } catch (const json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

std::string ScriptedGateway::complete(const CompletionRequest& request) {
  validate_request(request);
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (next_ >= entries_.size()) {
    throw GatewayError(GatewayErrorKind::Exhausted,
                       "scripted transcript exhausted after " + std::to_string(entries_.size()) +
                           " replies");
  }
  const ScriptEntry& entry = entries_[next_];
  if (entry.match) {
    const ChatMessage* last_user = nullptr;
    for (auto it = request.messages.rbegin(); it != request.messages.rend(); ++it) {
      if (it->role == "user") {
        last_user = &*it;
        break;
      }
    }
    if (last_user == nullptr || last_user->content.find(*entry.match) == std::string::npos) {
      throw GatewayError(GatewayErrorKind::ScriptMismatch,
                         "script entry " + std::to_string(next_) +
                             " expected the last user message to contain \"" + *entry.match + "\"");
    }
  }
  ++next_;
  return entry.reply;
}

std::size_t ScriptedGateway::consumed() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::size_t ScriptedGateway::remaining() const {
  std::lock_guard lock(mutex_);
  return entries_.size() - next_;
}

std::vector<CompletionRequest> ScriptedGateway::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

// ---------------------------------------------------------------------------

RemoteGateway::RemoteGateway(RemoteConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw std::invalid_argument("remote gateway needs a base URL");
}

json RemoteGateway::request_body(const CompletionRequest& request) const {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back(to_json(m));
  json body = {{"model", config_.model}, {"messages", std::move(messages)},
               {"temperature", request.temperature}};
  if (request.seed) body["seed"] = *request.seed;
  if (request.constraint && config_.send_response_format) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", "response"}, {"schema", *request.constraint}, {"strict", true}}}};
  }
  return body;
}

std::string RemoteGateway::complete(const CompletionRequest& request) {
  validate_request(request);
  const auto url = detail::split_url(config_.base_url);
  const std::string body = request_body(request).dump();
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto backoff = config_.initial_backoff;
  GatewayErrorKind last_kind = GatewayErrorKind::Transport;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto res = client.Post(url.path + "/chat/completions", headers, body, "application/json");
    if (!res) {
      last_kind = GatewayErrorKind::Transport;
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw GatewayError(GatewayErrorKind::Auth, "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    if (res->status == 429) {
      last_kind = GatewayErrorKind::RateLimited;
      last_error = "HTTP 429: rate limited";
      continue;
    }
    if (res->status >= 500) {
      last_kind = GatewayErrorKind::Transport;
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw GatewayError(GatewayErrorKind::BadResponse,
                         "HTTP " + std::to_string(res->status) + ": " + res->body);
    }
    try {
      const json reply = json::parse(res->body);
      const json& content = reply.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw GatewayError(GatewayErrorKind::BadResponse, "message content is not a string");
      return content.get<std::string>();
    } catch (const json::exception& e) {
      throw GatewayError(GatewayErrorKind::BadResponse, std::string("malformed completion: ") + e.what());
    }
  }
  throw GatewayError(last_kind, last_error + " (after " + std::to_string(config_.max_retries) + " retries)");
}

// ---------------------------------------------------------------------------

RecordReplayGateway::RecordReplayGateway(std::filesystem::path session_dir, SessionMode mode,
                                         std::shared_ptr<ChatGateway> inner)
    : dir_(std::move(session_dir)), mode_(mode), inner_(std::move(inner)) {
  if (mode_ == SessionMode::Record) {
    if (!inner_) throw std::invalid_argument("record mode needs an inner gateway");
    std::filesystem::create_directories(dir_);
  } else if (!std::filesystem::is_directory(dir_)) {
    throw std::invalid_argument("replay session directory does not exist: " + dir_.string());
  }
}

json RecordReplayGateway::request_json(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back(to_json(m));
  json out = {{"messages", std::move(messages)}, {"temperature", request.temperature}};
  out["constraint"] = request.constraint ? *request.constraint : json(nullptr);
  out["seed"] = request.seed ? json(*request.seed) : json(nullptr);
  return out;
}

std::string RecordReplayGateway::request_hash(const CompletionRequest& request) {
  return sha256_hex(request_json(request).dump());
}

std::string RecordReplayGateway::complete(const CompletionRequest& request) {
  validate_request(request);
  const std::string hash = request_hash(request);
  const auto path = dir_ / (hash + ".json");
  if (mode_ == SessionMode::Replay) {
    std::ifstream in(path);
    if (!in) throw CacheMiss("no recorded reply for request " + hash);
    const json entry = json::parse(in);
    return entry.at("reply").get<std::string>();
  }
  std::string reply = inner_->complete(request);
  const json entry = {{"request", request_json(request)}, {"reply", reply}};
  std::lock_guard lock(write_mutex_);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write session log " + path.string());
  out << entry.dump(2) << '\n';
  return reply;
}

std::unique_ptr<ChatGateway> record_replay(const std::filesystem::path& session_dir, SessionMode mode,
                                           std::shared_ptr<ChatGateway> inner) {
  return std::make_unique<RecordReplayGateway>(session_dir, mode, std::move(inner));
}

}  // namespace editduet
