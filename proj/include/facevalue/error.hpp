#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facevalue {

/// Every failure the library can report. Codes are stable and appear verbatim
/// in CLI diagnostics and HTTP error payloads.
enum class Errc {
  // game core
  kEmptyPrizeSet,
  kDuplicatePrize,
  kDegenerateRemoval,
  kPrizeNotPresent,
  kPlayerBoxOpened,
  kDealAlreadyTaken,
  kInvalidMoney,
  // episode log
  kUnknownKeyword,
  kMalformedLine,
  kMissingHeader,
  kDuplicateOpen,
  kPrizeNotOnBoard,
  kMissingEnd,
  kTrailingContent,
  kNonAscendingBoard,
  kSecondDeal,
  kRoundOutOfSequence,
  kOfferOutOfSequence,
  kResponseWithoutOffer,
  kTooManyOpens,
  kChecksumMismatch,
  // simulation and synthesis
  kConfigError,
  kDimensionTooSmall,
  // classification and training
  kEmptyTrack,
  kDimensionMismatch,
  kEmptySplit,
  kDivergenceDetected,
  kMalformedFile,
  // metrics
  kEmptyInput,
  kDegenerateLabels,
  kUnequalRaters,
  kDegenerateChance,
  kMissingAnnotations,
  // annotation service
  kUnknownDataset,
  kUnknownSession,
  kUnknownItem,
  kAlreadyAnswered,
  kInvalidChoice,
  kNoData,
  kBadRequest,
  kIoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, int line = 0, int column = 0);

  Errc code() const noexcept { return code_; }
  /// 1-based source position when the error originates from text input, else 0.
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  /// The message without the code and position prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
  int line_;
  int column_;
};

}  // namespace facevalue
