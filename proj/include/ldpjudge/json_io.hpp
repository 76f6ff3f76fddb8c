#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ldpjudge/domain.hpp"

namespace ldpjudge {

// nlohmann/json hooks. Decoders are strict: unknown enum values, missing
// required fields, and wrong types raise Error(kValidation) naming the field.

void to_json(nlohmann::json& j, Tag tag);
void from_json(const nlohmann::json& j, Tag& tag);
void to_json(nlohmann::json& j, const LegalDataPoint& ldp);
void from_json(const nlohmann::json& j, LegalDataPoint& ldp);
void to_json(nlohmann::json& j, const ContractDoc& doc);
void from_json(const nlohmann::json& j, ContractDoc& doc);
void to_json(nlohmann::json& j, const QAPair& qa);
void from_json(const nlohmann::json& j, QAPair& qa);
void to_json(nlohmann::json& j, const Evaluation& evaluation);
void from_json(const nlohmann::json& j, Evaluation& evaluation);
void to_json(nlohmann::json& j, const TagCounts& counts);
void from_json(const nlohmann::json& j, TagCounts& counts);
void to_json(nlohmann::json& j, const ScoreSet& scores);
void from_json(const nlohmann::json& j, ScoreSet& scores);
void to_json(nlohmann::json& j, const HumanReview& review);
void from_json(const nlohmann::json& j, HumanReview& review);

struct JsonLine {
  std::size_t line_number = 0;  // 1-based
  nlohmann::json value;
};

/// Reads a JSONL file, skipping blank lines. Parse failures raise
/// Error(kValidation) with the offending line number in details.
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);
/// Same as read_jsonl over in-memory content; `name` prefixes error messages.
std::vector<JsonLine> parse_jsonl(std::string_view content, const std::string& name);

/// One compact object per line, trailing newline after every record.
std::string to_jsonl(const std::vector<nlohmann::json>& records);

template <typename T>
std::string to_jsonl(const std::vector<T>& records) {
  std::vector<nlohmann::json> values;
  values.reserve(records.size());
  for (const auto& r : records) values.emplace_back(r);
  return to_jsonl(values);
}

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial files.
void write_file(const std::filesystem::path& path, const std::string& content);

/// Decodes a vector of records from a JSONL file; errors carry the line number.
template <typename T>
std::vector<T> load_jsonl(const std::filesystem::path& path);

extern template std::vector<Evaluation> load_jsonl<Evaluation>(const std::filesystem::path&);
extern template std::vector<HumanReview> load_jsonl<HumanReview>(const std::filesystem::path&);
extern template std::vector<QAPair> load_jsonl<QAPair>(const std::filesystem::path&);
extern template std::vector<ContractDoc> load_jsonl<ContractDoc>(const std::filesystem::path&);

}  // namespace ldpjudge
