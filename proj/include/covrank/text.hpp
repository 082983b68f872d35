#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// One tokenizer shared by every module: split on whitespace, strip leading and
// trailing ASCII punctuation, keep internal apostrophes and hyphens. Mask
// placeholders ("[ENT]", "[NUM]") survive as whole tokens. Bytes >= 0x80 are
// treated as word characters, so UTF-8 text passes through untouched.
namespace covrank::text {

inline constexpr std::string_view kEntityMask = "[ENT]";
inline constexpr std::string_view kNumberMask = "[NUM]";

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

// ASCII case-fold.
std::string fold(std::string_view s);

// Case-fold, trim, and collapse internal whitespace runs to one space.
std::string normalize_phrase(std::string_view s);

// Byte spans of tokens in `text`.
std::vector<Span> token_spans(std::string_view text);

std::vector<std::string> tokenize(std::string_view text);

// Tokens case-folded; the representation used by BM25 and TF-IDF.
std::vector<std::string> folded_tokens(std::string_view text);

std::size_t word_count(std::string_view text);

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Segments without any token are dropped.
std::vector<std::string_view> split_sentences(std::string_view text);

// Maximal vowel groups (aeiouy); one fewer for a trailing silent 'e' when
// there is more than one group; at least 1.
int count_syllables(std::string_view word);

// Digit runs, allowing single ',' or '.' between digits ("1,200", "3.5").
std::vector<Span> number_spans(std::string_view text);

}  // namespace covrank::text
