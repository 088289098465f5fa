#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace facevalue {

/// Binary polarity used for the deal flip, event labels and predictions.
enum class Sign : int { kNegative = -1, kPositive = 1 };

constexpr int to_int(Sign s) noexcept { return static_cast<int>(s); }
constexpr Sign negate(Sign s) noexcept {
  return s == Sign::kPositive ? Sign::kNegative : Sign::kPositive;
}
constexpr Sign operator*(Sign a, Sign b) noexcept {
  return a == b ? Sign::kPositive : Sign::kNegative;
}
/// Maps a score to a label; zero goes to the negative class.
constexpr Sign sign_of(double score) noexcept {
  return score > 0.0 ? Sign::kPositive : Sign::kNegative;
}

/// Exact amount of money in pence.
struct Money {
  /// Largest accepted amount; keeps sums of thousands of prizes inside int64.
  static constexpr std::int64_t kMaxPence = 1'000'000'000'000'000;

  std::int64_t pence = 0;

  static Money from_pence(std::int64_t pence);
  static Money from_pounds(std::int64_t pounds) { return from_pence(pounds * 100); }

  auto operator<=>(const Money&) const = default;
};

/// Renders pence as "£1,234.56" for human-facing output.
std::string format_pounds(Money m);

/// Strictly ascending set of distinct prizes.
class PrizeSet {
 public:
  PrizeSet() = default;
  /// Sorts the input; throws DuplicatePrize on repeated values.
  explicit PrizeSet(std::vector<Money> prizes);
  PrizeSet(std::initializer_list<std::int64_t> pence);

  std::span<const Money> values() const noexcept { return prizes_; }
  std::size_t size() const noexcept { return prizes_.size(); }
  bool empty() const noexcept { return prizes_.empty(); }
  bool contains(Money m) const noexcept;
  /// Returns a copy without `m`; throws PrizeNotPresent.
  PrizeSet without(Money m) const;

  bool operator==(const PrizeSet&) const = default;

 private:
  std::vector<Money> prizes_;
};

/// Mean of a prize multiset held as an unreduced (total, count) pair.
struct ExactMean {
  std::int64_t numerator = 0;    // total pence
  std::int64_t denominator = 1;  // number of prizes

  /// True iff `amount` < numerator/denominator, via cross-multiplication.
  bool exceeds(Money amount) const noexcept;
  double to_double() const noexcept {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
  /// "numerator/denominator".
  std::string to_string() const;

  bool operator==(const ExactMean&) const = default;
};

/// Value comparison of two means (cross-multiplied, no division).
std::strong_ordering compare(const ExactMean& a, const ExactMean& b) noexcept;

}  // namespace facevalue
