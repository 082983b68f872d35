#include "covrank/text.hpp"

#include <cctype>

namespace covrank::text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u) != 0;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_vowel(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

bool all_punct(std::string_view s) {
  for (char c : s) {
    if (!is_punct(c)) return false;
  }
  return true;
}

}  // namespace

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string normalize_phrase(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

std::vector<Span> token_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    if (j == i) break;
    std::string_view chunk = text.substr(i, j - i);
    const bool masked =
        (chunk.starts_with(kEntityMask) && all_punct(chunk.substr(kEntityMask.size()))) ||
        (chunk.starts_with(kNumberMask) && all_punct(chunk.substr(kNumberMask.size())));
    if (masked) {
      spans.push_back({i, i + kEntityMask.size()});
    } else {
      std::size_t b = i;
      std::size_t e = j;
      while (b < e && is_punct(text[b])) ++b;
      while (e > b && is_punct(text[e - 1])) --e;
      if (e > b) spans.push_back({b, e});
    }
    i = j;
  }
  return spans;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (const Span& s : token_spans(text)) tokens.emplace_back(text.substr(s.begin, s.size()));
  return tokens;
}

std::vector<std::string> folded_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  for (const Span& s : token_spans(text)) tokens.push_back(fold(text.substr(s.begin, s.size())));
  return tokens;
}

std::size_t word_count(std::string_view text) { return token_spans(text).size(); }

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> sentences;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view segment = text.substr(start, end - start);
    if (!token_spans(segment).empty()) sentences.push_back(segment);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    if (i + 1 == text.size() || is_space(text[i + 1])) {
      flush(i + 1);
      start = i + 1;
    }
  }
  if (start < text.size()) flush(text.size());
  return sentences;
}

int count_syllables(std::string_view word) {
  const std::string w = fold(word);
  int groups = 0;
  bool in_group = false;
  for (char c : w) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  // Only a letter-final 'e' counts as silent.
  std::size_t last = w.size();
  while (last > 0 && !std::isalpha(static_cast<unsigned char>(w[last - 1]))) --last;
  if (groups > 1 && last > 0 && w[last - 1] == 'e') --groups;
  return groups < 1 ? 1 : groups;
}

std::vector<Span> number_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n) {
      if (is_digit(text[j])) {
        ++j;
      } else if ((text[j] == ',' || text[j] == '.') && j + 1 < n && is_digit(text[j + 1])) {
        j += 1;
      } else {
        break;
      }
    }
    spans.push_back({i, j});
    i = j;
  }
  return spans;
}

}  // namespace covrank::text
