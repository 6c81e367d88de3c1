#pragma once

/**
 * Word tokenization shared by the length counter and the ROUGE metrics.
 *
 * Rules:
 * - fragments are split on Unicode whitespace;
 * - inside a fragment, punctuation runs become their own tokens, except
 *   apostrophes and hyphens flanked by alphanumerics on both sides
 *   ("don't", "state-of-the-art" stay single tokens);
 * - a token counts as a word iff it contains at least one alphanumeric
 *   character. Pure-punctuation tokens are kept (ROUGE wants them) but
 *   never counted as words.
 */

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lenmc {

namespace detail {

// Decodes one UTF-8 code point starting at `i`; advances `i`. Invalid bytes
// decode as U+FFFD and advance by one.
inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) {
    ++i;
    return c;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((c & 0xe0) == 0xc0) {
    cp = c & 0x1f;
    extra = 1;
  } else if ((c & 0xf0) == 0xe0) {
    cp = c & 0x0f;
    extra = 2;
  } else if ((c & 0xf8) == 0xf0) {
    cp = c & 0x07;
    extra = 3;
  } else {
    ++i;
    return 0xfffd;
  }
  std::size_t j = i + 1;
  for (int k = 0; k < extra; ++k, ++j) {
    if (j >= s.size() || (static_cast<unsigned char>(s[j]) & 0xc0) != 0x80) {
      ++i;
      return 0xfffd;
    }
    cp = (cp << 6) | (static_cast<unsigned char>(s[j]) & 0x3f);
  }
  i = j;
  return cp;
}

inline bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\f':
    case U'\v':
    case 0x0085:
    case 0x00a0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202f:
    case 0x205f:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200a;
  }
}

inline bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
           (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e);
  }
  // General Punctuation block (dashes, quotes, ellipsis, bullets).
  if (cp >= 0x2000 && cp <= 0x206f) return true;
  switch (cp) {
    case 0x00a1:  // inverted exclamation
    case 0x00ab:  // guillemets
    case 0x00bb:
    case 0x00b7:  // middle dot
    case 0x00bf:  // inverted question mark
      return true;
    default:
      return false;
  }
}

// Everything printable that is neither whitespace nor punctuation is treated
// as alphanumeric: ASCII letters/digits, accented letters, CJK, etc.
inline bool is_alnum(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') ||
           (cp >= 'a' && cp <= 'z');
  }
  return !is_unicode_space(cp) && !is_punct(cp) && cp >= 0x20;
}

inline bool is_word_connector(char32_t cp) {
  return cp == U'\'' || cp == 0x2019 || cp == U'-' || cp == 0x2010 ||
         cp == 0x2011;
}

}  // namespace detail

struct Token {
  std::string text;
  bool has_alnum = false;
};

inline std::vector<Token> tokenize(std::string_view text) {
  struct Cp {
    char32_t cp;
    std::size_t begin, end;
  };
  std::vector<Cp> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    std::size_t begin = i;
    char32_t cp = detail::decode_utf8(text, i);
    cps.push_back({cp, begin, i});
  }

  std::vector<Token> tokens;
  std::size_t n = cps.size();
  std::size_t i = 0;
  auto emit = [&](std::size_t from, std::size_t to, bool alnum) {
    tokens.push_back(
        {std::string(text.substr(cps[from].begin, cps[to - 1].end - cps[from].begin)),
         alnum});
  };
  while (i < n) {
    if (detail::is_unicode_space(cps[i].cp)) {
      ++i;
      continue;
    }
    if (detail::is_alnum(cps[i].cp)) {
      std::size_t start = i;
      ++i;
      while (i < n) {
        if (detail::is_alnum(cps[i].cp)) {
          ++i;
        } else if (detail::is_word_connector(cps[i].cp) && i + 1 < n &&
                   detail::is_alnum(cps[i + 1].cp)) {
          i += 2;  // connector glued between alphanumerics
        } else {
          break;
        }
      }
      emit(start, i, true);
    } else {
      // A maximal run of punctuation (and anything unclassifiable) is one token.
      std::size_t start = i;
      ++i;
      while (i < n && !detail::is_unicode_space(cps[i].cp) &&
             !detail::is_alnum(cps[i].cp)) {
        ++i;
      }
      emit(start, i, false);
    }
  }
  return tokens;
}

// Lowercased token texts (ASCII lowering only), punctuation tokens included.
inline std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) {
    std::string s = std::move(t.text);
    for (char& c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace lenmc
