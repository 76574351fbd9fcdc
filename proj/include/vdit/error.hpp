// Copyright 2026 The vdit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vdit {

enum class ErrorKind {
  InvalidArgument,
  ShapeMismatch,
  OutOfVocabulary,
  MissingFile,
  CountMismatch,
  Divergence,
  FrozenViolation,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind and the offending subject
/// (a path, a token, a tensor name).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string subject, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message +
                           (subject.empty() ? "" : " [" + subject + "]")),
        kind_(kind),
        subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::ShapeMismatch: return "shape mismatch";
    case ErrorKind::OutOfVocabulary: return "out of vocabulary";
    case ErrorKind::MissingFile: return "missing file";
    case ErrorKind::CountMismatch: return "count mismatch";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::FrozenViolation: return "frozen weights modified";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

#define VDIT_REQUIRE(cond, kind, subject, msg)          \
  do {                                                  \
    if (!(cond)) throw ::vdit::Error((kind), (subject), (msg)); \
  } while (0)

}  // namespace vdit
