// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace editduet {

using Embedding = Eigen::VectorXd;

/// Cosine similarity of two dense vectors. Zero-norm inputs score 0.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  return a.dot(b) / denom;
}

/// Rows of `m` scaled to unit length; zero rows stay zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalized_rows(
    const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = m;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const Scalar n = out.row(r).norm();
    if (n > Scalar(0)) out.row(r) /= n;
  }
  return out;
}

class EmbedderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps query text to a vector comparable with segment embeddings.
class TextEmbedder {
 public:
  virtual ~TextEmbedder() = default;
  virtual Embedding embed(std::string_view text) const = 0;
};

/// Deterministic bag-of-words random projection: each lower-cased
/// alphanumeric token contributes a fixed pseudo-random vector derived from
/// (seed, token). Texts sharing words get positive cosine similarity.
class HashProjectionEmbedder final : public TextEmbedder {
 public:
  explicit HashProjectionEmbedder(Eigen::Index dimension, std::uint64_t seed = 0);

  Embedding embed(std::string_view text) const override;
  Eigen::Index dimension() const { return dimension_; }

 private:
  Eigen::Index dimension_;
  std::uint64_t seed_;
};

/// POSTs {"input": text} to an embedding endpoint and reads back
/// {"embedding": [...]}. An OpenAI-style {"data":[{"embedding":[...]}]} reply
/// is accepted as well.
class HttpEmbedder final : public TextEmbedder {
 public:
  HttpEmbedder(std::string url, std::string api_key = {},
               std::chrono::seconds timeout = std::chrono::seconds(60));

  Embedding embed(std::string_view text) const override;

 private:
  std::string url_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

}  // namespace editduet
