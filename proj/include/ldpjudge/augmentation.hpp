#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/domain.hpp"
#include "ldpjudge/judge.hpp"

namespace ldpjudge {

enum class AugmentationKind : std::uint8_t {
  kRemoveInfo,
  kIncompleteInfo,
  kChangeValue,
  kAddExtraInfo,
  kContradictingInfo,
};

inline constexpr AugmentationKind kAllAugmentationKinds[] = {
    AugmentationKind::kRemoveInfo, AugmentationKind::kIncompleteInfo,
    AugmentationKind::kChangeValue, AugmentationKind::kAddExtraInfo,
    AugmentationKind::kContradictingInfo};

std::string_view to_string(AugmentationKind kind);
std::optional<AugmentationKind> parse_augmentation_kind(std::string_view name);

struct AugmentedExample {
  AugmentationKind kind = AugmentationKind::kRemoveInfo;
  std::string original_qa_id;
  QAPair qa;              // id "<original>:<kind>", answer rewritten
  Evaluation evaluation;  // refers to qa.id
  std::string edit_log;
  /// Number of rewritten assertions for contradicting_info, otherwise 0.
  std::size_t added_assertions = 0;
};

nlohmann::json to_json_value(const AugmentedExample& example);

/// Where an LDP's text sits in an answer: exact match first, then ASCII
/// case-insensitive.
struct Span {
  std::size_t pos = 0;
  std::size_t len = 0;
};
std::optional<Span> locate_span(std::string_view answer, std::string_view text);

/// Closed-form tag counts after applying `kind` to an evaluation with counts
/// `before`. `added` is the number of rewritten assertions (contradicting_info).
TagCounts expected_counts(AugmentationKind kind, const TagCounts& before, std::size_t added = 0);

/// Machine check of an example against its source: domain validation, the
/// kind-specific edit rule, and the closed-form count delta.
Violations check_consistency(const AugmentedExample& example, const QAPair& original_qa,
                             const Evaluation& original);

/// Applies the five rewrites. Text edits other than remove_info go through the
/// chat client; tag bookkeeping is local. Every result passes
/// check_consistency or the call throws Error(kValidation).
class Augmenter {
 public:
  explicit Augmenter(std::shared_ptr<const ChatClient> client);

  /// Error(kPrecondition) when the kind has nothing eligible to edit;
  /// Error(kProviderResponse) when a rewrite comes back unusable.
  AugmentedExample apply(AugmentationKind kind, const QAPair& qa, const Evaluation& evaluation,
                         std::uint64_t seed) const;

  AugmentedExample remove_info(const QAPair& qa, const Evaluation& evaluation,
                               std::uint64_t seed) const;
  AugmentedExample incomplete_info(const QAPair& qa, const Evaluation& evaluation,
                                   std::uint64_t seed) const;
  AugmentedExample change_value(const QAPair& qa, const Evaluation& evaluation,
                                std::uint64_t seed) const;
  AugmentedExample add_extra_info(const QAPair& qa, const Evaluation& evaluation,
                                  std::uint64_t seed) const;
  AugmentedExample contradicting_info(const QAPair& qa, const Evaluation& evaluation,
                                      std::uint64_t seed) const;

 private:
  std::string ask(RequestPurpose purpose, const QAPair& qa,
                  std::map<std::string, std::string> context, std::string prompt) const;

  std::shared_ptr<const ChatClient> client_;
};

/// Edit-log CSV: kind,original_qa_id,qa_id,edit_log.
std::string edit_log_csv(const std::vector<AugmentedExample>& examples);

}  // namespace ldpjudge
