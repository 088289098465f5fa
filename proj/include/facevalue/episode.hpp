#pragma once

// Line-based episode logs (".dond"). One record per line:
//
//   EPISODE <id>
//   PRIZES <p1> <p2> ... <pn>      pence, strictly ascending
//   OPEN <round> <pence>           round = 1-based index of the opening
//   OFFER <round> <pence>          round = number of openings so far
//   DEAL <round> | NODEAL <round>  answers the offer of the same round
//   END [<crc32>]
//
// Blank lines and lines starting with '#' are ignored. The serializer seals
// END with a CRC-32 of the canonical body so that a corrupted byte can never
// turn one valid episode into another; unsealed END lines are accepted for
// hand-written files.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "facevalue/error.hpp"
#include "facevalue/money.hpp"

namespace facevalue {

enum class ActionKind { kOpen, kOffer, kDeal, kNoDeal };

std::string_view keyword(ActionKind kind);

/// Where an action came from in a parsed file. Zero means unknown.
struct SourcePos {
  int line = 0;
  int round_column = 0;
  int amount_column = 0;
};

struct Action {
  ActionKind kind = ActionKind::kOpen;
  int round = 1;
  std::optional<Money> amount;  // present for OPEN and OFFER
  SourcePos source;             // not part of the value

  static Action open(int round, Money amount) { return {ActionKind::kOpen, round, amount, {}}; }
  static Action offer(int round, Money amount) { return {ActionKind::kOffer, round, amount, {}}; }
  static Action deal(int round) { return {ActionKind::kDeal, round, std::nullopt, {}}; }
  static Action no_deal(int round) { return {ActionKind::kNoDeal, round, std::nullopt, {}}; }

  bool operator==(const Action& other) const {
    return kind == other.kind && round == other.round && amount == other.amount;
  }
};

struct Episode {
  std::string id;
  PrizeSet board;
  std::vector<Action> actions;

  bool operator==(const Episode&) const = default;
};

struct Diagnostic {
  Errc code;
  int line = 0;    // 1-based, 0 when the episode was not parsed from text
  int column = 0;  // 1-based column of the first offending token
  std::string message;

  std::string to_string() const;
};

struct ParseOutcome {
  std::optional<Episode> episode;    // set iff diagnostics is empty
  std::vector<Diagnostic> diagnostics;
};

/// Never throws on any byte input.
ParseOutcome try_parse_episode(std::string_view text);

/// Throws Error carrying the first diagnostic's code and position.
Episode parse_episode(std::string_view text);

/// Canonical sealed text ending in "END <crc32>\n". Throws MalformedLine if
/// the id or an action cannot be represented.
std::string serialize_episode(const Episode& episode);

/// Empty iff the episode satisfies every log invariant.
std::vector<Diagnostic> validate_episode(const Episode& episode);

/// Lowercase 8-hex-digit CRC-32 of the canonical body (everything before END).
std::string episode_checksum(const Episode& episode);

/// Episode ids are non-empty runs of printable, non-space ASCII.
bool is_valid_episode_id(std::string_view id);

}  // namespace facevalue
