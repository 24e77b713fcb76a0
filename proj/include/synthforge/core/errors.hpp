/* Copyright 2026 The Synthforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace synthforge {

// Root of every error raised by the library. The CLI maps subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration, vocabulary, or template input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A value violated a domain-type invariant at construction time.
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  DimensionMismatchError(std::size_t expected, std::size_t actual)
      : Error("dimension mismatch: expected " + std::to_string(expected) +
              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
};

// Anything a model provider did wrong: transport failures, refusals, bad payloads.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// Worth retrying: timeouts, 429, 5xx.
class TransientProviderError : public ProviderError {
 public:
  TransientProviderError(const std::string& what, int status = 0)
      : ProviderError(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// The provider declined the request on content grounds.
class RefusalError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// The request itself is unacceptable (oversized prompt, empty text); never retried.
class InvalidRequestError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Retries were used up.
class ProviderExhaustedError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// A judge response could not be turned into a quality score.
class ScoringError : public Error {
 public:
  using Error::Error;
};

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace synthforge
