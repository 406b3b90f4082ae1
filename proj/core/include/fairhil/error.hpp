#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairhil {

enum class ErrorCode {
  kValidation,    // bad user input (unknown column, non-binary target, ...)
  kStructural,    // malformed CSV body
  kSchema,        // header problems, type mismatches at bind time
  kEmptyDataset,
  kState,         // operation not allowed in the current session state
  kNotFound,
  kParse,         // expression syntax
  kInternal,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace fairhil
