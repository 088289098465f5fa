#include "facevalue/episode.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

namespace facevalue {

std::string_view keyword(ActionKind kind) {
  switch (kind) {
    case ActionKind::kOpen: return "OPEN";
    case ActionKind::kOffer: return "OFFER";
    case ActionKind::kDeal: return "DEAL";
    case ActionKind::kNoDeal: return "NODEAL";
  }
  return "?";
}

std::string Diagnostic::to_string() const {
  std::string out(facevalue::to_string(code));
  if (line > 0) out += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

bool is_valid_episode_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) { return c > 0x20 && c < 0x7f; });
}

namespace {

struct Token {
  std::string_view text;
  int column;  // 1-based
};

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_blank(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_blank(line[j])) ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

// Canonical non-negative decimal: no sign, no leading zeros.
std::optional<std::int64_t> parse_count(std::string_view s, std::int64_t max) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  if (s.size() > 1 && s[0] == '0') return std::nullopt;
  if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v > max) return std::nullopt;
  return v;
}

bool is_hex8(std::string_view s) {
  return s.size() == 8 && std::all_of(s.begin(), s.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string body_text(const Episode& e) {
  if (!is_valid_episode_id(e.id)) {
    throw Error(Errc::kMalformedLine, "episode id must be non-empty printable ASCII without spaces");
  }
  std::string out = "EPISODE " + e.id + "\nPRIZES";
  for (Money m : e.board.values()) out += " " + std::to_string(m.pence);
  out += '\n';
  for (const Action& a : e.actions) {
    out += keyword(a.kind);
    out += ' ';
    out += std::to_string(a.round);
    const bool needs_amount = a.kind == ActionKind::kOpen || a.kind == ActionKind::kOffer;
    if (needs_amount != a.amount.has_value()) {
      throw Error(Errc::kMalformedLine, std::string(keyword(a.kind)) + " has the wrong arity");
    }
    if (a.amount) out += " " + std::to_string(a.amount->pence);
    out += '\n';
  }
  return out;
}

std::string crc_hex(std::string_view body) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc & 0xffffffffUL));
  return buf;
}

struct RawParse {
  Episode episode;
  bool have_header = false;
  bool have_board = false;
  int end_line = 0;
  std::string seal;
  int seal_column = 0;
  // Records found after END, parsed for diagnostics only.
  std::vector<Action> trailing;
  std::vector<Diagnostic> diagnostics;
};

void parse_lines(std::string_view text, RawParse& out) {
  int line_no = 0;
  std::size_t pos = 0;
  auto bad = [&](Errc code, int column, std::string msg) {
    out.diagnostics.push_back({code, line_no, column, std::move(msg)});
  };
  while (pos <= text.size()) {
    if (pos == text.size()) break;
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;

    auto tokens = tokenize(line);
    if (tokens.empty() || tokens[0].text.front() == '#') continue;
    const Token& kw = tokens[0];
    const bool after_end = out.end_line != 0;

    if (kw.text == "EPISODE" || kw.text == "PRIZES" || kw.text == "END") {
      if (after_end) {
        bad(Errc::kTrailingContent, kw.column, "record after END");
        continue;
      }
    }

    if (kw.text == "EPISODE") {
      if (out.have_header) {
        bad(Errc::kMalformedLine, kw.column, "second EPISODE header");
      } else if (tokens.size() != 2) {
        bad(Errc::kMalformedLine, kw.column, "expected: EPISODE <id>");
      } else if (!is_valid_episode_id(tokens[1].text)) {
        bad(Errc::kMalformedLine, tokens[1].column, "invalid episode id");
        out.have_header = true;
      } else {
        out.episode.id = std::string(tokens[1].text);
        out.have_header = true;
      }
      continue;
    }
    if (!out.have_header) {
      if (kw.text == "PRIZES" || kw.text == "END" || kw.text == "OPEN" || kw.text == "OFFER" ||
          kw.text == "DEAL" || kw.text == "NODEAL") {
        bad(Errc::kMissingHeader, kw.column, "first record must be EPISODE");
        out.have_header = true;  // report once
      } else {
        bad(Errc::kUnknownKeyword, kw.column, "unknown keyword '" + std::string(kw.text) + "'");
      }
      continue;
    }
    if (kw.text == "PRIZES") {
      if (out.have_board) {
        bad(Errc::kMalformedLine, kw.column, "second PRIZES record");
        continue;
      }
      out.have_board = true;
      if (tokens.size() < 2) {
        bad(Errc::kMalformedLine, kw.column, "PRIZES needs at least one amount");
        continue;
      }
      std::vector<Money> prizes;
      bool ok = true;
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        auto v = parse_count(tokens[i].text, Money::kMaxPence);
        if (!v) {
          bad(Errc::kMalformedLine, tokens[i].column, "bad amount '" + std::string(tokens[i].text) + "'");
          ok = false;
          break;
        }
        if (!prizes.empty() && *v <= prizes.back().pence) {
          bad(Errc::kNonAscendingBoard, tokens[i].column, "prizes must be strictly ascending");
          ok = false;
          break;
        }
        prizes.push_back(Money{*v});
      }
      if (ok && prizes.size() < 2) {
        bad(Errc::kEmptyPrizeSet, kw.column, "board needs at least two prizes");
      } else if (ok) {
        out.episode.board = PrizeSet(std::move(prizes));
      }
      continue;
    }
    if (kw.text == "END") {
      if (!out.have_board) bad(Errc::kMissingHeader, kw.column, "PRIZES record missing");
      out.end_line = line_no;
      if (tokens.size() == 2) {
        if (!is_hex8(tokens[1].text)) {
          bad(Errc::kMalformedLine, tokens[1].column, "END seal must be 8 lowercase hex digits");
        } else {
          out.seal = std::string(tokens[1].text);
          out.seal_column = tokens[1].column;
        }
      } else if (tokens.size() > 2) {
        bad(Errc::kMalformedLine, tokens[2].column, "expected: END [<crc32>]");
      }
      continue;
    }

    ActionKind kind;
    if (kw.text == "OPEN") kind = ActionKind::kOpen;
    else if (kw.text == "OFFER") kind = ActionKind::kOffer;
    else if (kw.text == "DEAL") kind = ActionKind::kDeal;
    else if (kw.text == "NODEAL") kind = ActionKind::kNoDeal;
    else {
      bad(Errc::kUnknownKeyword, kw.column, "unknown keyword '" + std::string(kw.text) + "'");
      continue;
    }
    if (!out.have_board) {
      bad(Errc::kMissingHeader, kw.column, "PRIZES must precede actions");
      out.have_board = true;
      continue;
    }
    const bool wants_amount = kind == ActionKind::kOpen || kind == ActionKind::kOffer;
    const std::size_t arity = wants_amount ? 3 : 2;
    if (tokens.size() != arity) {
      const int col = tokens.size() > arity ? tokens[arity].column : kw.column;
      bad(Errc::kMalformedLine, col,
          std::string("expected: ") + std::string(kw.text) + (wants_amount ? " <round> <pence>" : " <round>"));
      continue;
    }
    auto round = parse_count(tokens[1].text, 1'000'000);
    if (!round || *round < 1) {
      bad(Errc::kMalformedLine, tokens[1].column, "bad round '" + std::string(tokens[1].text) + "'");
      continue;
    }
    Action a;
    a.kind = kind;
    a.round = static_cast<int>(*round);
    a.source = {line_no, tokens[1].column, 0};
    if (wants_amount) {
      auto amount = parse_count(tokens[2].text, Money::kMaxPence);
      if (!amount) {
        bad(Errc::kMalformedLine, tokens[2].column, "bad amount '" + std::string(tokens[2].text) + "'");
        continue;
      }
      a.amount = Money{*amount};
      a.source.amount_column = tokens[2].column;
    }
    (after_end ? out.trailing : out.episode.actions).push_back(a);
  }
  if (out.end_line == 0 && out.diagnostics.empty()) {
    out.diagnostics.push_back({Errc::kMissingEnd, line_no + 1, 1, "log is not terminated by END"});
  }
}

}  // namespace

std::vector<Diagnostic> validate_episode(const Episode& episode) {
  std::vector<Diagnostic> out;
  auto bad = [&](Errc code, const Action& a, int column, std::string msg) {
    out.push_back({code, a.source.line, a.source.line ? column : 0, std::move(msg)});
  };
  if (!is_valid_episode_id(episode.id)) {
    out.push_back({Errc::kMalformedLine, 0, 0, "invalid episode id"});
  }
  if (episode.board.size() < 2) {
    out.push_back({Errc::kEmptyPrizeSet, 0, 0, "board needs at least two prizes"});
  }

  std::set<Money> opened;
  int opens = 0;
  int last_offer_round = 0;
  std::optional<int> pending_offer;
  bool deal_taken = false;
  const Action* pending_action = nullptr;

  for (const Action& a : episode.actions) {
    const bool wants_amount = a.kind == ActionKind::kOpen || a.kind == ActionKind::kOffer;
    if (wants_amount != a.amount.has_value()) {
      bad(Errc::kMalformedLine, a, 1, std::string(keyword(a.kind)) + " has the wrong arity");
      continue;
    }
    switch (a.kind) {
      case ActionKind::kOpen: {
        if (pending_offer) {
          bad(Errc::kOfferOutOfSequence, a, 1,
              "offer of round " + std::to_string(*pending_offer) + " was never answered");
          pending_offer.reset();
        }
        if (a.round != opens + 1) {
          bad(Errc::kRoundOutOfSequence, a, a.source.round_column,
              "expected OPEN round " + std::to_string(opens + 1));
        }
        const Money x = *a.amount;
        if (!episode.board.contains(x)) {
          bad(Errc::kPrizeNotOnBoard, a, a.source.amount_column,
              std::to_string(x.pence) + " is not on the board");
        } else if (!opened.insert(x).second) {
          bad(Errc::kDuplicateOpen, a, a.source.amount_column,
              std::to_string(x.pence) + " was already opened");
        }
        ++opens;
        if (episode.board.size() >= 2 && opens > static_cast<int>(episode.board.size()) - 1) {
          bad(Errc::kTooManyOpens, a, 1, "the player's box can never be opened");
        }
        break;
      }
      case ActionKind::kOffer:
        if (pending_offer) {
          bad(Errc::kOfferOutOfSequence, a, 1,
              "offer of round " + std::to_string(*pending_offer) + " was never answered");
        }
        if (a.round != opens || a.round <= last_offer_round) {
          bad(Errc::kOfferOutOfSequence, a, a.source.round_column,
              "offer rounds must follow the openings and strictly increase");
        }
        last_offer_round = std::max(last_offer_round, a.round);
        pending_offer = a.round;
        pending_action = &a;
        break;
      case ActionKind::kDeal:
      case ActionKind::kNoDeal:
        if (!pending_offer || *pending_offer != a.round) {
          bad(Errc::kResponseWithoutOffer, a, a.source.round_column,
              std::string(keyword(a.kind)) + " does not answer an offer of the same round");
        }
        if (a.kind == ActionKind::kDeal) {
          if (deal_taken) bad(Errc::kSecondDeal, a, 1, "a deal was already accepted");
          deal_taken = true;
        }
        pending_offer.reset();
        break;
    }
  }
  if (pending_offer && pending_action) {
    bad(Errc::kOfferOutOfSequence, *pending_action, 1,
        "offer of round " + std::to_string(*pending_offer) + " was never answered");
  }
  return out;
}

ParseOutcome try_parse_episode(std::string_view text) {
  ParseOutcome outcome;
  RawParse raw;
  try {
    parse_lines(text, raw);
  } catch (const std::exception& e) {
    // parse_lines validates before constructing; this is unreachable in
    // practice but keeps the no-throw contract airtight.
    outcome.diagnostics.push_back({Errc::kMalformedLine, 0, 0, e.what()});
    return outcome;
  }
  if (!raw.diagnostics.empty()) {
    outcome.diagnostics = std::move(raw.diagnostics);
    return outcome;
  }

  // Semantic checks see trailing records as if they continued the log so the
  // real problem with a stray record is reported, not just its position.
  Episode extended = raw.episode;
  extended.actions.insert(extended.actions.end(), raw.trailing.begin(), raw.trailing.end());
  outcome.diagnostics = validate_episode(extended);
  for (const Action& a : raw.trailing) {
    outcome.diagnostics.push_back({Errc::kTrailingContent, a.source.line, 1, "record after END"});
  }
  std::stable_sort(outcome.diagnostics.begin(), outcome.diagnostics.end(),
                   [](const Diagnostic& x, const Diagnostic& y) { return x.line < y.line; });
  if (!outcome.diagnostics.empty()) return outcome;

  if (!raw.seal.empty()) {
    const std::string expected = crc_hex(body_text(raw.episode));
    if (expected != raw.seal) {
      outcome.diagnostics.push_back({Errc::kChecksumMismatch, raw.end_line, raw.seal_column,
                                     "content does not match seal " + raw.seal});
      return outcome;
    }
  }
  outcome.episode = std::move(raw.episode);
  return outcome;
}

Episode parse_episode(std::string_view text) {
  auto outcome = try_parse_episode(text);
  if (!outcome.diagnostics.empty()) {
    const Diagnostic& d = outcome.diagnostics.front();
    throw Error(d.code, d.message, d.line, d.column);
  }
  return std::move(*outcome.episode);
}

std::string episode_checksum(const Episode& episode) { return crc_hex(body_text(episode)); }

std::string serialize_episode(const Episode& episode) {
  std::string body = body_text(episode);
  const std::string seal = crc_hex(body);
  return body + "END " + seal + "\n";
}

}  // namespace facevalue
