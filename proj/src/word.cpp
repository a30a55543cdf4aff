#include "frbm/word.hpp"

#include "frbm/errors.hpp"

namespace frbm {

Word::Word(std::vector<std::uint8_t> digits) : digits_(std::move(digits)) {
  for (auto d : digits_) {
    if (d < 1 || d > 4) {
      throw InvalidWord("word digit " + std::to_string(int(d)) + " outside {1,2,3,4}");
    }
  }
}

Word Word::parse(std::string_view text) {
  if (text == "root" || text == "-") return Word{};
  std::vector<std::uint8_t> digits;
  digits.reserve(text.size());
  for (char c : text) {
    if (c < '1' || c > '4') {
      throw InvalidWord("invalid word '" + std::string(text) + "': symbol '" + c +
                        "' outside {1,2,3,4}");
    }
    digits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Word(std::move(digits));
}

Word Word::from_index(std::uint64_t index, std::size_t depth) {
  std::vector<std::uint8_t> digits(depth);
  for (std::size_t i = depth; i-- > 0;) {
    digits[i] = static_cast<std::uint8_t>(index % 4 + 1);
    index /= 4;
  }
  return Word(std::move(digits));
}

Word Word::child(std::uint8_t digit) const {
  auto digits = digits_;
  digits.push_back(digit);
  return Word(std::move(digits));
}

Word Word::prefix(std::size_t length) const {
  if (length > digits_.size()) throw InvalidWord("prefix longer than word");
  return Word(std::vector<std::uint8_t>(digits_.begin(), digits_.begin() + length));
}

bool Word::has_prefix(const Word& p) const {
  if (p.size() > size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != digits_[i]) return false;
  }
  return true;
}

std::uint64_t Word::index() const {
  std::uint64_t idx = 0;
  for (auto d : digits_) idx = idx * 4 + (d - 1);
  return idx;
}

std::string Word::str() const {
  std::string s;
  s.reserve(digits_.size());
  for (auto d : digits_) s.push_back(static_cast<char>('0' + d));
  return s;
}

Word mirror_x(const Word& w) {
  auto digits = w.digits();
  for (auto& d : digits) d = mirror_x(d);
  return Word(std::move(digits));
}

Word mirror_y(const Word& w) {
  auto digits = w.digits();
  for (auto& d : digits) d = mirror_y(d);
  return Word(std::move(digits));
}

}  // namespace frbm
