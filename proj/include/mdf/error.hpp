/**
 * Copyright 2026 The Medformer Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef MDF_ERROR_HPP_
#define MDF_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mdf {

/// Base of every error thrown by the library. The C API maps each subclass
/// onto an mdf_status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape or extent mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument is outside its valid domain (patch size, axis, schedule...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// API misuse, e.g. calling backward on a non-scalar.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Text-format error with the offending line (1-based, 0 if unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string &msg, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A named entity (latent, task, parameter) could not be resolved.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (run config, model config, task table).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad sample or batch passed to a model or augmentation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Label outside the range admitted by the task type.
class LabelError : public Error {
 public:
  using Error::Error;
};

/// Batch too small or degenerate for a batch statistic.
class BatchError : public Error {
 public:
  using Error::Error;
};

/// Head does not belong to the task being processed.
class RoutingError : public Error {
 public:
  using Error::Error;
};

/// Archive / npy ingestion failure; message names the entry.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint could not be read or applied.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Metric is undefined for the given labels (e.g. AUC with one class).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdf

#endif  // MDF_ERROR_HPP_
