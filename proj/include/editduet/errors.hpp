// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace editduet {

// Input file does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A shot-type or camera-motion label outside the closed vocabularies.
class VocabularyError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

// Embeddings of differing length within one collection, or a query
// embedding that does not match the collection.
class DimensionError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class EmptyCollection : public std::runtime_error {
 public:
  EmptyCollection() : std::runtime_error("video collection has no segments") {}
  using std::runtime_error::runtime_error;
};

class MissingTemplate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Domain error in a metric (non-positive target duration, p outside [0, 1], ...).
class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BadDuration : public MetricError {
 public:
  using MetricError::MetricError;
};

class LengthMismatch : public MetricError {
 public:
  using MetricError::MetricError;
};

class EmptyInput : public MetricError {
 public:
  using MetricError::MetricError;
};

class OutOfRange : public MetricError {
 public:
  using MetricError::MetricError;
};

// Human votes on a pair split evenly, so no majority exists.
class TieError : public MetricError {
 public:
  using MetricError::MetricError;
};

}  // namespace editduet
