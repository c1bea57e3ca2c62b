#include "mcam/errors.hpp"

namespace mcam {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::InvalidLayout: return "InvalidLayout";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::KExceedsSamples: return "KExceedsSamples";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ChannelMismatch: return "ChannelMismatch";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::UnknownGallerySignature: return "UnknownGallerySignature";
    case ErrorCode::UnknownQuery: return "UnknownQuery";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::DatasetNotFound: return "DatasetNotFound";
    case ErrorCode::InsufficientIdentities: return "InsufficientIdentities";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mcam
