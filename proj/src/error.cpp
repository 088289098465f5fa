#include "facevalue/error.hpp"

namespace facevalue {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::kEmptyPrizeSet: return "EmptyPrizeSet";
    case Errc::kDuplicatePrize: return "DuplicatePrize";
    case Errc::kDegenerateRemoval: return "DegenerateRemoval";
    case Errc::kPrizeNotPresent: return "PrizeNotPresent";
    case Errc::kPlayerBoxOpened: return "PlayerBoxOpened";
    case Errc::kDealAlreadyTaken: return "DealAlreadyTaken";
    case Errc::kInvalidMoney: return "InvalidMoney";
    case Errc::kUnknownKeyword: return "UnknownKeyword";
    case Errc::kMalformedLine: return "MalformedLine";
    case Errc::kMissingHeader: return "MissingHeader";
    case Errc::kDuplicateOpen: return "DuplicateOpen";
    case Errc::kPrizeNotOnBoard: return "PrizeNotOnBoard";
    case Errc::kMissingEnd: return "MissingEnd";
    case Errc::kTrailingContent: return "TrailingContent";
    case Errc::kNonAscendingBoard: return "NonAscendingBoard";
    case Errc::kSecondDeal: return "SecondDeal";
    case Errc::kRoundOutOfSequence: return "RoundOutOfSequence";
    case Errc::kOfferOutOfSequence: return "OfferOutOfSequence";
    case Errc::kResponseWithoutOffer: return "ResponseWithoutOffer";
    case Errc::kTooManyOpens: return "TooManyOpens";
    case Errc::kChecksumMismatch: return "ChecksumMismatch";
    case Errc::kConfigError: return "ConfigError";
    case Errc::kDimensionTooSmall: return "DimensionTooSmall";
    case Errc::kEmptyTrack: return "EmptyTrack";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kEmptySplit: return "EmptySplit";
    case Errc::kDivergenceDetected: return "DivergenceDetected";
    case Errc::kMalformedFile: return "MalformedFile";
    case Errc::kEmptyInput: return "EmptyInput";
    case Errc::kDegenerateLabels: return "DegenerateLabels";
    case Errc::kUnequalRaters: return "UnequalRaters";
    case Errc::kDegenerateChance: return "DegenerateChance";
    case Errc::kMissingAnnotations: return "MissingAnnotations";
    case Errc::kUnknownDataset: return "UnknownDataset";
    case Errc::kUnknownSession: return "UnknownSession";
    case Errc::kUnknownItem: return "UnknownItem";
    case Errc::kAlreadyAnswered: return "AlreadyAnswered";
    case Errc::kInvalidChoice: return "InvalidChoice";
    case Errc::kNoData: return "NoData";
    case Errc::kBadRequest: return "BadRequest";
    case Errc::kIoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string decorate(Errc code, const std::string& message, int line, int column) {
  std::string out(to_string(code));
  if (line > 0) {
    out += " at line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
  }
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(Errc code, const std::string& message, int line, int column)
    : std::runtime_error(decorate(code, message, line, column)),
      code_(code),
      detail_(message),
      line_(line),
      column_(column) {}

}  // namespace facevalue
