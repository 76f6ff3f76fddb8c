#include "ldpjudge/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "ldpjudge/error.hpp"

namespace ldpjudge {

namespace {

bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 code point at `pos`; invalid sequences decode as a
// single byte so tokenization never fails.
char32_t decode_utf8(std::string_view text, std::size_t pos, std::size_t& length) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  int extra = 0;
  char32_t cp = lead;
  if (lead >= 0xC0 && lead < 0xE0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if (lead >= 0xE0 && lead < 0xF0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if (lead >= 0xF0 && lead < 0xF8) {
    extra = 3;
    cp = lead & 0x07;
  }
  if (extra == 0 || pos + extra >= text.size()) {
    length = 1;
    return lead;
  }
  for (int i = 1; i <= extra; ++i) {
    const auto byte = static_cast<unsigned char>(text[pos + i]);
    if ((byte & 0xC0) != 0x80) {
      length = 1;
      return lead;
    }
    cp = (cp << 6) | (byte & 0x3F);
  }
  length = static_cast<std::size_t>(extra) + 1;
  return cp;
}

// Token sequence interned to integer ids.
using Ids = std::vector<int>;

struct Interned {
  Ids candidate;
  Ids reference;
};

Interned intern(std::span<const std::string> candidate, std::span<const std::string> reference) {
  std::unordered_map<std::string_view, int> ids;
  auto map = [&](std::span<const std::string> tokens) {
    Ids out;
    out.reserve(tokens.size());
    for (const auto& token : tokens) {
      auto [it, inserted] = ids.try_emplace(token, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  Interned result;
  result.candidate = map(candidate);
  result.reference = map(reference);
  return result;
}

// Sorted list of n-gram start offsets, ordered lexicographically by content.
std::vector<std::size_t> sorted_ngrams(const Ids& tokens, int n) {
  std::vector<std::size_t> starts;
  if (tokens.size() < static_cast<std::size_t>(n)) return starts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) starts.push_back(i);
  std::sort(starts.begin(), starts.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(tokens.begin() + a, tokens.begin() + a + n,
                                        tokens.begin() + b, tokens.begin() + b + n);
  });
  return starts;
}

// Sum over distinct n-grams of min(count in a, count in b).
std::size_t clipped_overlap(const Ids& a, const Ids& b, int n) {
  const auto sa = sorted_ngrams(a, n);
  const auto sb = sorted_ngrams(b, n);
  auto compare = [&](std::size_t ia, std::size_t ib) {
    for (int k = 0; k < n; ++k) {
      if (a[ia + k] != b[ib + k]) return a[ia + k] < b[ib + k] ? -1 : 1;
    }
    return 0;
  };
  std::size_t i = 0, j = 0, overlap = 0;
  while (i < sa.size() && j < sb.size()) {
    const int c = compare(sa[i], sb[j]);
    if (c < 0) {
      ++i;
    } else if (c > 0) {
      ++j;
    } else {
      ++overlap;
      ++i;
      ++j;
    }
  }
  return overlap;
}

std::size_t ngram_count(std::size_t length, int n) {
  return length >= static_cast<std::size_t>(n) ? length - n + 1 : 0;
}

void require_tokens(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "input is empty after tokenization");
  }
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t length = 1;
    const char32_t cp = decode_utf8(text, pos, length);
    if (is_unicode_space(cp)) {
      flush();
    } else if (length == 1) {
      const auto c = static_cast<unsigned char>(text[pos]);
      if (c < 0x80 && std::ispunct(c)) {
        // ASCII punctuation is dropped without splitting ("don't" -> "dont").
      } else {
        current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
      }
    } else {
      current.append(text.substr(pos, length));
    }
    pos += length;
  }
  flush();
  return tokens;
}

NGramProfile NGramProfile::build(std::span<const std::string> tokens, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  NGramProfile profile;
  profile.n = n;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++profile.counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return profile;
}

int NGramProfile::total() const {
  int sum = 0;
  for (const auto& [gram, count] : counts) sum += count;
  return sum;
}

double clipped_precision(std::span<const std::string> candidate,
                         std::span<const std::string> reference, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  const auto ids = intern(candidate, reference);
  const std::size_t denominator = ngram_count(ids.candidate.size(), n);
  if (denominator == 0) return 0.0;
  return static_cast<double>(clipped_overlap(ids.candidate, ids.reference, n)) /
         static_cast<double>(denominator);
}

double bleu_tokens(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int max_n) {
  if (max_n < 1 || max_n > 4) throw Error(ErrorCode::kInvalidArgument, "max_n must be in 1..4");
  require_tokens(candidate, reference);
  const auto ids = intern(candidate, reference);
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const std::size_t denominator = ngram_count(ids.candidate.size(), n);
    const std::size_t matches =
        denominator == 0 ? 0 : clipped_overlap(ids.candidate, ids.reference, n);
    if (matches == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches) / static_cast<double>(denominator));
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c < r ? std::exp(1.0 - r / c) : 1.0;
  return brevity * std::exp(log_sum / max_n);
}

double bleu(std::string_view candidate, std::string_view reference, int max_n) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return bleu_tokens(c, r, max_n);
}

RougeScore rouge_n_tokens(std::span<const std::string> candidate,
                          std::span<const std::string> reference, int n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n-gram order must be >= 1");
  require_tokens(candidate, reference);
  const auto ids = intern(candidate, reference);
  const std::size_t overlap = clipped_overlap(ids.candidate, ids.reference, n);
  const std::size_t ref_total = ngram_count(ids.reference.size(), n);
  const std::size_t cand_total = ngram_count(ids.candidate.size(), n);
  RougeScore score;
  score.recall = ref_total == 0 ? 0.0 : static_cast<double>(overlap) / ref_total;
  score.precision = cand_total == 0 ? 0.0 : static_cast<double>(overlap) / cand_total;
  score.f1 = harmonic(score.precision, score.recall);
  return score;
}

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_n_tokens(c, r, n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

RougeScore rouge_l_tokens(std::span<const std::string> candidate,
                          std::span<const std::string> reference) {
  require_tokens(candidate, reference);
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  RougeScore score;
  score.recall = lcs / static_cast<double>(reference.size());
  score.precision = lcs / static_cast<double>(candidate.size());
  score.f1 = harmonic(score.precision, score.recall);
  return score;
}

RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  return rouge_l_tokens(c, r);
}

}  // namespace ldpjudge
