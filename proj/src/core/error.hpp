// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace partcraft {

// Mirrors pc_status in include/partcraft/partcraft.h; values must stay in sync.
enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kValidation = 3,
  kNotFound = 4,
  kCapability = 5,
  kConfiguration = 6,
  kBackend = 7,
  kIo = 8,
  kState = 9,
  kInternal = 10,
};

const char* error_code_name(ErrorCode code);

struct FieldError {
  std::string field;
  std::string message;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<FieldError> fields = {});

  ErrorCode code() const noexcept { return code_; }
  const std::vector<FieldError>& fields() const noexcept { return fields_; }

 private:
  ErrorCode code_;
  std::vector<FieldError> fields_;
};

// Re-throws the in-flight exception with `context` prepended to its message.
// Codes and field errors of partcraft::Error are preserved; anything else
// becomes kInternal.
[[noreturn]] void rethrow_with_context(const std::string& context);

}  // namespace partcraft
