#include "toxlabel/error.h"

namespace toxlabel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownCategory: return "UnknownCategory";
    case ErrorCode::kUnknownSubtopic: return "UnknownSubtopic";
    case ErrorCode::kNotToxic: return "NotToxic";
    case ErrorCode::kInvalidTaxonomy: return "InvalidTaxonomy";
    case ErrorCode::kFormatError: return "FormatError";
    case ErrorCode::kUnmappedLabel: return "UnmappedLabel";
    case ErrorCode::kInvalidRegistry: return "InvalidRegistry";
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kDuplicateRecordId: return "DuplicateRecordId";
    case ErrorCode::kUnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kEndpointFailure: return "EndpointFailure";
    case ErrorCode::kMissingCredential: return "MissingCredential";
    case ErrorCode::kParseFailure: return "ParseFailure";
    case ErrorCode::kMissingAnnotation: return "MissingAnnotation";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kCurrentLineTooLong: return "CurrentLineTooLong";
    case ErrorCode::kUnmappedOrigin: return "UnmappedOrigin";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

ErrorClass error_class(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidTaxonomy:
    case ErrorCode::kInvalidRegistry:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kMissingCredential:
    case ErrorCode::kInvalidConfig:
      return ErrorClass::kConfig;
    case ErrorCode::kEndpointFailure:
      return ErrorClass::kEndpoint;
    default:
      return ErrorClass::kData;
  }
}

int exit_status(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::kConfig: return 2;
    case ErrorClass::kData: return 3;
    case ErrorClass::kEndpoint: return 4;
  }
  return 1;
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace toxlabel
