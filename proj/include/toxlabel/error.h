#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toxlabel {

// Coarse error classes. Each maps onto a process exit status in the CLI.
enum class ErrorClass {
  kConfig,    // exit 2
  kData,      // exit 3
  kEndpoint,  // exit 4
};

enum class ErrorCode {
  // taxonomy
  kUnknownCategory,
  kUnknownSubtopic,
  kNotToxic,
  kInvalidTaxonomy,
  // ingest
  kFormatError,
  kUnmappedLabel,
  kInvalidRegistry,
  kFileNotFound,
  kDuplicateRecordId,
  // prompting
  kUnsupportedVersion,
  kInvalidRequest,
  // annotator
  kEndpointFailure,
  kMissingCredential,
  // parse
  kParseFailure,
  // transfer
  kMissingAnnotation,
  kIoError,
  // metrics
  kEmptyInput,
  kShapeMismatch,
  kLabelMismatch,
  // softprompt
  kCurrentLineTooLong,
  kUnmappedOrigin,
  // cli
  kInvalidConfig,
};

std::string_view to_string(ErrorCode code);
ErrorClass error_class(ErrorCode code);
int exit_status(ErrorClass cls);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return toxlabel::error_class(code_); }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace toxlabel
