// Copyright 2026 The relassess Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relassess {

// Base for every error raised by the library. `kind()` is the stable,
// machine-readable name surfaced by the CLI (--json-errors) and the HTTP API.
class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

  private:
    std::string kind_;
};

#define RELASSESS_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                               \
      public:                                                                 \
        explicit Name(const std::string& message) : Error(#Name, message) {} \
    }

RELASSESS_DEFINE_ERROR(InvalidInput);
RELASSESS_DEFINE_ERROR(UnresolvedVote);
RELASSESS_DEFINE_ERROR(BackendUnavailable);
RELASSESS_DEFINE_ERROR(CapabilityError);
RELASSESS_DEFINE_ERROR(AuthError);
RELASSESS_DEFINE_ERROR(StoreCorruption);
RELASSESS_DEFINE_ERROR(ConflictError);
RELASSESS_DEFINE_ERROR(IoError);
RELASSESS_DEFINE_ERROR(MissingImage);
RELASSESS_DEFINE_ERROR(ImageDecodeError);
RELASSESS_DEFINE_ERROR(ConfigError);
RELASSESS_DEFINE_ERROR(InsufficientData);
RELASSESS_DEFINE_ERROR(ShortRankingError);
RELASSESS_DEFINE_ERROR(EmptyInput);
RELASSESS_DEFINE_ERROR(Cancelled);

#undef RELASSESS_DEFINE_ERROR

// Retryable backend failure (HTTP 429/5xx, timeouts). Never escapes the
// gateway: it is converted to BackendUnavailable once retries run out.
class TransientBackendError : public Error {
  public:
    explicit TransientBackendError(const std::string& message)
        : Error("TransientBackendError", message) {}
};

// No pair is labeled by both inputs. `skipped()` counts pairs left out as
// unresolved majority votes.
class EmptyOverlap : public Error {
  public:
    explicit EmptyOverlap(const std::string& message, std::int64_t skipped = 0)
        : Error("EmptyOverlap", message), skipped_(skipped) {}

    [[nodiscard]] std::int64_t skipped() const noexcept { return skipped_; }

  private:
    std::int64_t skipped_;
};

class SchemaViolation : public Error {
  public:
    SchemaViolation(const std::string& message, std::string fragment)
        : Error("SchemaViolation", message), fragment_(std::move(fragment)) {}

    // The piece of model output that failed validation (possibly truncated).
    [[nodiscard]] const std::string& fragment() const noexcept { return fragment_; }

  private:
    std::string fragment_;
};

}  // namespace relassess
