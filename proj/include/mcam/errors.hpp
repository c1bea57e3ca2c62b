#pragma once

#include <stdexcept>
#include <string>

namespace mcam {

enum class ErrorCode {
  EmptyImage,
  DecodeError,
  InvalidLayout,
  LayoutMismatch,
  UnknownChannel,
  NumericalFailure,
  KExceedsSamples,
  EmptySet,
  DimMismatch,
  ChannelMismatch,
  EmptyGallery,
  UnknownGallerySignature,
  UnknownQuery,
  MissingTruth,
  DatasetNotFound,
  InsufficientIdentities,
  MissingRoot,
  EmptyDataset,
  VersionMismatch,
  CorruptRecord,
  InvalidConfig,
  IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

  // Exit status class used by the CLI: 3 = data error, 4 = numeric failure.
  int exit_status() const {
    return code_ == ErrorCode::NumericalFailure ? 4 : 3;
  }

 private:
  ErrorCode code_;
};

}  // namespace mcam
