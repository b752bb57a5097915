// Copyright 2026 The PartCraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/error.hpp"

#include <exception>

namespace partcraft {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kCapability: return "capability_error";
    case ErrorCode::kConfiguration: return "configuration_error";
    case ErrorCode::kBackend: return "backend_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kState: return "state_error";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "unknown_error";
}

Error::Error(ErrorCode code, const std::string& message,
             std::vector<FieldError> fields)
    : std::runtime_error(message), code_(code), fields_(std::move(fields)) {}

void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.code(), context + ": " + e.what(), e.fields());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInternal, context + ": " + e.what());
  }
}

}  // namespace partcraft
