#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ldpjudge {

// Reference-based n-gram baselines (BLEU, ROUGE-N, ROUGE-L) over a documented
// tokenizer: ASCII lowercase, split on Unicode whitespace, ASCII punctuation
// removed, empty tokens dropped.

using Tokens = std::vector<std::string>;

Tokens tokenize(std::string_view text);

/// Multiset of the n-grams of one token sequence.
struct NGramProfile {
  int n = 1;
  std::map<std::vector<std::string>, int> counts;

  static NGramProfile build(std::span<const std::string> tokens, int n);
  int total() const;
};

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
};

/// Single-reference BLEU with brevity penalty, no smoothing. `max_n` in 1..4.
/// Throws Error(kInvalidArgument) when either side tokenizes to nothing.
double bleu(std::string_view candidate, std::string_view reference, int max_n);
double bleu_tokens(std::span<const std::string> candidate, std::span<const std::string> reference,
                   int max_n);

/// Clipped n-gram precision for one order; 0 when the candidate has no n-grams.
double clipped_precision(std::span<const std::string> candidate,
                         std::span<const std::string> reference, int n);

RougeScore rouge_n(std::string_view candidate, std::string_view reference, int n);
RougeScore rouge_n_tokens(std::span<const std::string> candidate,
                          std::span<const std::string> reference, int n);

RougeScore rouge_l(std::string_view candidate, std::string_view reference);
RougeScore rouge_l_tokens(std::span<const std::string> candidate,
                          std::span<const std::string> reference);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace ldpjudge
