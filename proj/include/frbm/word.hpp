#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace frbm {

// Address of a construction square: a string over {1,2,3,4}, one digit per
// generation. Digit d places the child in the corner
//   1 = (-,+)   2 = (+,+)   3 = (-,-)   4 = (+,-)
// of its parent. The empty word is the root square [-1/2, 1/2]^2.
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> digits);

  // Accepts "" / "root" / "-" for the empty word.
  static Word parse(std::string_view text);
  // Inverse of index(): the depth-`depth` word whose base-4 rank is `index`.
  static Word from_index(std::uint64_t index, std::size_t depth);

  std::size_t size() const { return digits_.size(); }
  bool empty() const { return digits_.empty(); }
  std::uint8_t operator[](std::size_t i) const { return digits_[i]; }
  const std::vector<std::uint8_t>& digits() const { return digits_; }

  Word child(std::uint8_t digit) const;
  Word prefix(std::size_t length) const;
  bool has_prefix(const Word& p) const;

  // Base-4 rank with digit d contributing (d-1); unique among words of equal length.
  std::uint64_t index() const;
  std::string str() const;

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;

 private:
  std::vector<std::uint8_t> digits_;
};

// Corner signs of a digit.
constexpr int digit_sign_x(std::uint8_t d) { return (d == 2 || d == 4) ? 1 : -1; }
constexpr int digit_sign_y(std::uint8_t d) { return (d == 1 || d == 2) ? 1 : -1; }
// Digit permutations induced by the reflections x -> -x and y -> -y.
constexpr std::uint8_t mirror_x(std::uint8_t d) {
  constexpr std::uint8_t m[5] = {0, 2, 1, 4, 3};
  return m[d];
}
constexpr std::uint8_t mirror_y(std::uint8_t d) {
  constexpr std::uint8_t m[5] = {0, 3, 4, 1, 2};
  return m[d];
}

Word mirror_x(const Word& w);
Word mirror_y(const Word& w);

}  // namespace frbm
