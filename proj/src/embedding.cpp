// SPDX-License-Identifier: Apache-2.0
#include "editduet/embedding.hpp"

#include <cctype>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "editduet/hashing.hpp"
#include "http_util.hpp"
#include "text_util.hpp"

namespace editduet {

HashProjectionEmbedder::HashProjectionEmbedder(Eigen::Index dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension <= 0) throw std::invalid_argument("embedding dimension must be positive");
}

Embedding HashProjectionEmbedder::embed(std::string_view text) const {
  Embedding out = Embedding::Zero(dimension_);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::uint64_t state = seed_ ^ fnv1a64(token);
    for (Eigen::Index i = 0; i < dimension_; ++i) {
      // 53 random bits mapped onto [-1, 1).
      const double u = static_cast<double>(detail::splitmix64(state) >> 11) * 0x1.0p-53;
      out[i] += 2.0 * u - 1.0;
    }
    token.clear();
  };
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      token.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  const double n = out.norm();
  if (n > 0.0) out /= n;
  return out;
}

HttpEmbedder::HttpEmbedder(std::string url, std::string api_key, std::chrono::seconds timeout)
    : url_(std::move(url)), api_key_(std::move(api_key)), timeout_(timeout) {}

Embedding HttpEmbedder::embed(std::string_view text) const {
  const auto parts = detail::split_url(url_);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  const nlohmann::json body = {{"input", std::string(text)}};
  auto res = client.Post(parts.path.empty() ? "/" : parts.path, headers, body.dump(),
                         "application/json");
  if (!res) throw EmbedderError("embedding endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw EmbedderError("embedding endpoint returned HTTP " + std::to_string(res->status));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw EmbedderError(std::string("embedding reply is not JSON: ") + e.what());
  }
  const nlohmann::json* values = nullptr;
  if (reply.contains("embedding")) {
    values = &reply["embedding"];
  } else if (reply.contains("data") && reply["data"].is_array() && !reply["data"].empty()) {
    values = &reply["data"][0]["embedding"];
  }
  if (values == nullptr || !values->is_array() || values->empty()) {
    throw EmbedderError("embedding reply lacks an embedding array");
  }
  Embedding out(static_cast<Eigen::Index>(values->size()));
  for (std::size_t i = 0; i < values->size(); ++i) {
    if (!(*values)[i].is_number()) throw EmbedderError("embedding contains a non-number");
    out[static_cast<Eigen::Index>(i)] = (*values)[i].get<double>();
  }
  return out;
}

}  // namespace editduet
