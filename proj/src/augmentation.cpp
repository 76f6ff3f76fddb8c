#include "ldpjudge/augmentation.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include <fmt/format.h>

#include "ldpjudge/csv.hpp"
#include "ldpjudge/error.hpp"
#include "ldpjudge/json_io.hpp"

namespace ldpjudge {

namespace {

struct Located {
  std::size_t ldp_index = 0;
  Span span;
};

std::size_t count_icase(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  const std::string h = to_lower_ascii(haystack);
  const std::string n = to_lower_ascii(needle);
  std::size_t count = 0;
  for (auto pos = h.find(n); pos != std::string::npos; pos = h.find(n, pos + 1)) ++count;
  return count;
}

std::vector<Located> eligible_correct(const QAPair& qa, const Evaluation& evaluation) {
  std::vector<Located> out;
  for (std::size_t i = 0; i < evaluation.ldps.size(); ++i) {
    const auto& ldp = evaluation.ldps[i];
    if (ldp.tag != Tag::kCorrect) continue;
    if (auto span = locate_span(qa.answer, ldp.text)) out.push_back({i, *span});
  }
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return items[rng() % items.size()];
}

// Joins the text around a removed span without leaving doubled or leading spaces.
std::string splice(std::string_view text, Span span, std::string_view replacement) {
  std::string left(text.substr(0, span.pos));
  std::string right(text.substr(span.pos + span.len));
  if (replacement.empty()) {
    while (!left.empty() && left.back() == ' ' && (right.empty() || right.front() == ' ')) {
      left.pop_back();
    }
    if (left.empty()) {
      while (!right.empty() && right.front() == ' ') right.erase(right.begin());
    }
  }
  return left + std::string(replacement) + right;
}

AugmentedExample start(AugmentationKind kind, const QAPair& qa, const Evaluation& evaluation) {
  AugmentedExample ex;
  ex.kind = kind;
  ex.original_qa_id = qa.id;
  ex.qa = qa;
  ex.qa.id = fmt::format("{}:{}", qa.id, to_string(kind));
  ex.evaluation = evaluation;
  ex.evaluation.qa_id = ex.qa.id;
  return ex;
}

void check_or_throw(const AugmentedExample& ex, const QAPair& qa, const Evaluation& evaluation) {
  if (auto violations = check_consistency(ex, qa, evaluation); !violations.empty()) {
    nlohmann::json details = nlohmann::json::array();
    for (const auto& v : violations) details.push_back({{"path", v.path}, {"message", v.message}});
    throw Error(ErrorCode::kValidation,
                fmt::format("{} on {} failed consistency: {}", to_string(ex.kind), qa.id,
                            violations.front().message),
                {{"violations", details}});
  }
}

// Candidate values inside [span.pos, span.pos + span.len): maximal digit runs
// and capitalized words that do not open a sentence.
std::vector<Span> value_candidates(std::string_view answer, Span span) {
  std::vector<Span> out;
  const std::size_t end = span.pos + span.len;
  auto is_word = [&](std::size_t k) {
    return k < answer.size() && std::isalnum(static_cast<unsigned char>(answer[k]));
  };
  std::size_t k = span.pos;
  while (k < end) {
    if (!is_word(k)) {
      ++k;
      continue;
    }
    std::size_t stop = k;
    while (stop < end && is_word(stop)) ++stop;
    const bool starts_word = k == 0 || !is_word(k - 1);
    const bool ends_word = !is_word(stop);
    const std::string_view word = answer.substr(k, stop - k);
    if (starts_word && ends_word) {
      const bool digits = std::all_of(word.begin(), word.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
      });
      bool entity = false;
      if (!digits && std::isupper(static_cast<unsigned char>(word.front()))) {
        std::size_t prev = k;
        while (prev > 0 && std::isspace(static_cast<unsigned char>(answer[prev - 1]))) --prev;
        const bool sentence_start =
            prev == 0 || answer[prev - 1] == '.' || answer[prev - 1] == '!' ||
            answer[prev - 1] == '?' || answer[prev - 1] == ':';
        entity = !sentence_start && k != span.pos;
      }
      if (digits || entity) out.push_back({k, stop - k});
    }
    k = stop;
  }
  return out;
}

std::optional<std::size_t> single_difference(const Evaluation& a, const Evaluation& b) {
  if (a.ldps.size() != b.ldps.size()) return std::nullopt;
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < a.ldps.size(); ++i) {
    if (a.ldps[i] == b.ldps[i]) continue;
    if (found) return std::nullopt;
    found = i;
  }
  return found;
}

}  // namespace

std::string_view to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kRemoveInfo: return "remove_info";
    case AugmentationKind::kIncompleteInfo: return "incomplete_info";
    case AugmentationKind::kChangeValue: return "change_value";
    case AugmentationKind::kAddExtraInfo: return "add_extra_info";
    case AugmentationKind::kContradictingInfo: return "contradicting_info";
  }
  return "unknown";
}

std::optional<AugmentationKind> parse_augmentation_kind(std::string_view name) {
  const std::string lowered = to_lower_ascii(trim(name));
  for (auto kind : kAllAugmentationKinds) {
    if (lowered == to_string(kind)) return kind;
  }
  return std::nullopt;
}

nlohmann::json to_json_value(const AugmentedExample& example) {
  return {{"kind", to_string(example.kind)},
          {"original_qa_id", example.original_qa_id},
          {"qa", example.qa},
          {"evaluation", example.evaluation},
          {"edit_log", example.edit_log},
          {"added_assertions", example.added_assertions}};
}

std::optional<Span> locate_span(std::string_view answer, std::string_view text) {
  const std::string needle = trim(text);
  if (needle.empty()) return std::nullopt;
  if (auto pos = answer.find(needle); pos != std::string_view::npos) {
    return Span{pos, needle.size()};
  }
  if (auto pos = to_lower_ascii(answer).find(to_lower_ascii(needle)); pos != std::string::npos) {
    return Span{pos, needle.size()};
  }
  return std::nullopt;
}

TagCounts expected_counts(AugmentationKind kind, const TagCounts& before, std::size_t added) {
  TagCounts after = before;
  switch (kind) {
    case AugmentationKind::kRemoveInfo:
    case AugmentationKind::kIncompleteInfo:
      --after.n_correct;
      ++after.n_missing;
      break;
    case AugmentationKind::kChangeValue:
      --after.n_correct;
      ++after.n_incorrect;
      break;
    case AugmentationKind::kAddExtraInfo:
      ++after.n_incorrect;
      break;
    case AugmentationKind::kContradictingInfo:
      after.n_missing += before.n_correct;
      after.n_correct = 0;
      after.n_incorrect += static_cast<std::int64_t>(added);
      break;
  }
  return after;
}

Violations check_consistency(const AugmentedExample& ex, const QAPair& original_qa,
                             const Evaluation& original) {
  Violations out = validate(ex.evaluation, ex.qa);
  for (auto& v : validate(ex.qa)) out.push_back({"qa." + v.path, v.message});
  if (ex.original_qa_id != original_qa.id) {
    out.push_back({"original_qa_id", "original_qa_id names the source QA pair"});
  }
  if (ex.qa.contract_id != original_qa.contract_id || ex.qa.question != original_qa.question) {
    out.push_back({"qa", "contract and question unchanged"});
  }
  if (ex.qa.answer == original_qa.answer) out.push_back({"qa.answer", "answer was edited"});
  const std::size_t added =
      ex.kind == AugmentationKind::kContradictingInfo ? ex.added_assertions : 0;
  if (tag_counts(ex.evaluation) != expected_counts(ex.kind, tag_counts(original), added)) {
    out.push_back({"evaluation.ldps", "tag counts follow the closed-form delta"});
  }

  const auto& old_ldps = original.ldps;
  const auto& new_ldps = ex.evaluation.ldps;
  switch (ex.kind) {
    case AugmentationKind::kRemoveInfo:
    case AugmentationKind::kIncompleteInfo: {
      const auto index = single_difference(original, ex.evaluation);
      if (!index) {
        out.push_back({"evaluation.ldps", "exactly one LDP re-tagged"});
        break;
      }
      const auto& before = old_ldps[*index];
      const auto& after = new_ldps[*index];
      if (before.tag != Tag::kCorrect || after.tag != Tag::kMissing || after.text != before.text) {
        out.push_back({"evaluation.ldps", "a Correct LDP became Missing with its text kept"});
      }
      if (count_icase(ex.qa.answer, before.text) >= count_icase(original_qa.answer, before.text)) {
        out.push_back({"qa.answer", "the edited span no longer appears in the answer"});
      }
      if (ex.kind == AugmentationKind::kRemoveInfo &&
          ex.qa.answer.size() >= original_qa.answer.size()) {
        out.push_back({"qa.answer", "removing information shortens the answer"});
      }
      break;
    }
    case AugmentationKind::kChangeValue: {
      const auto index = single_difference(original, ex.evaluation);
      if (!index) {
        out.push_back({"evaluation.ldps", "exactly one LDP re-tagged"});
        break;
      }
      const auto& before = old_ldps[*index];
      const auto& after = new_ldps[*index];
      if (before.tag != Tag::kCorrect || after.tag != Tag::kIncorrect ||
          after.text == before.text) {
        out.push_back({"evaluation.ldps", "a Correct LDP became Incorrect with a new value"});
      }
      if (!locate_span(ex.qa.answer, after.text)) {
        out.push_back({"qa.answer", "the changed LDP appears in the answer"});
      }
      if (count_icase(ex.qa.answer, before.text) >= count_icase(original_qa.answer, before.text)) {
        out.push_back({"qa.answer", "the old value is gone from the edited position"});
      }
      break;
    }
    case AugmentationKind::kAddExtraInfo: {
      if (new_ldps.size() != old_ldps.size() + 1 ||
          !std::equal(old_ldps.begin(), old_ldps.end(), new_ldps.begin())) {
        out.push_back({"evaluation.ldps", "original LDPs kept and one appended"});
        break;
      }
      const auto& extra = new_ldps.back();
      const auto sentences = split_sentences(extra.text);
      if (extra.tag != Tag::kIncorrect || sentences.empty() || sentences.size() > 2) {
        out.push_back({"evaluation.ldps", "appended LDP is 1-2 sentences tagged Incorrect"});
      }
      if (ex.qa.answer.rfind(original_qa.answer, 0) != 0 ||
          ex.qa.answer.size() < extra.text.size() ||
          ex.qa.answer.compare(ex.qa.answer.size() - extra.text.size(), extra.text.size(),
                               extra.text) != 0) {
        out.push_back({"qa.answer", "answer is the original followed by the appended text"});
      }
      break;
    }
    case AugmentationKind::kContradictingInfo: {
      if (!original_qa.ground_truth) {
        out.push_back({"qa.ground_truth", "ground truth present"});
      }
      if (ex.added_assertions == 0 || new_ldps.size() != old_ldps.size() + ex.added_assertions) {
        out.push_back({"evaluation.ldps", "original LDPs kept and rewritten ones appended"});
        break;
      }
      for (std::size_t i = 0; i < old_ldps.size(); ++i) {
        LegalDataPoint expected = old_ldps[i];
        if (expected.tag == Tag::kCorrect) expected.tag = Tag::kMissing;
        if (new_ldps[i] != expected) {
          out.push_back({fmt::format("evaluation.ldps[{}]", i), "Correct LDPs kept as Missing"});
        }
      }
      for (std::size_t i = old_ldps.size(); i < new_ldps.size(); ++i) {
        if (new_ldps[i].tag != Tag::kIncorrect || !locate_span(ex.qa.answer, new_ldps[i].text)) {
          out.push_back({fmt::format("evaluation.ldps[{}]", i),
                         "rewritten assertions are Incorrect and appear in the answer"});
        }
      }
      break;
    }
  }
  return out;
}

Augmenter::Augmenter(std::shared_ptr<const ChatClient> client) : client_(std::move(client)) {}

std::string Augmenter::ask(RequestPurpose purpose, const QAPair& qa,
                           std::map<std::string, std::string> context, std::string prompt) const {
  if (!client_) throw Error(ErrorCode::kPrecondition, "this rewrite needs a chat client");
  ChatRequest request;
  request.prompt = std::move(prompt);
  request.qa_id = qa.id;
  request.purpose = purpose;
  request.context = std::move(context);
  return trim(client_->send(request).text);
}

AugmentedExample Augmenter::apply(AugmentationKind kind, const QAPair& qa,
                                  const Evaluation& evaluation, std::uint64_t seed) const {
  switch (kind) {
    case AugmentationKind::kRemoveInfo: return remove_info(qa, evaluation, seed);
    case AugmentationKind::kIncompleteInfo: return incomplete_info(qa, evaluation, seed);
    case AugmentationKind::kChangeValue: return change_value(qa, evaluation, seed);
    case AugmentationKind::kAddExtraInfo: return add_extra_info(qa, evaluation, seed);
    case AugmentationKind::kContradictingInfo: return contradicting_info(qa, evaluation, seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown augmentation kind");
}

AugmentedExample Augmenter::remove_info(const QAPair& qa, const Evaluation& evaluation,
                                        std::uint64_t seed) const {
  const auto eligible = eligible_correct(qa, evaluation);
  if (eligible.empty()) {
    throw Error(ErrorCode::kPrecondition, "no Correct LDP can be located in the answer",
                {{"qa_id", qa.id}});
  }
  const auto& target = pick(eligible, seed);
  auto ex = start(AugmentationKind::kRemoveInfo, qa, evaluation);
  ex.qa.answer = splice(qa.answer, target.span, "");
  ex.evaluation.ldps[target.ldp_index].tag = Tag::kMissing;
  ex.edit_log = fmt::format("removed ldps[{}] \"{}\"; tag correct -> missing", target.ldp_index,
                            evaluation.ldps[target.ldp_index].text);
  check_or_throw(ex, qa, evaluation);
  return ex;
}

AugmentedExample Augmenter::incomplete_info(const QAPair& qa, const Evaluation& evaluation,
                                            std::uint64_t seed) const {
  const auto eligible = eligible_correct(qa, evaluation);
  if (eligible.empty()) {
    throw Error(ErrorCode::kPrecondition, "no Correct LDP can be located in the answer",
                {{"qa_id", qa.id}});
  }
  const auto& target = pick(eligible, seed);
  const std::string span = qa.answer.substr(target.span.pos, target.span.len);
  const std::string rewrite = ask(
      RequestPurpose::kIncompleteInfo, qa, {{"span", span}, {"answer", qa.answer}},
      "Rewrite the following statement so that it leaves out one important detail. Keep it "
      "fluent and do not add new information. Reply with the rewritten statement only.\n\n"
      "STATEMENT\n" + span + "\n");
  if (rewrite.empty() || to_lower_ascii(rewrite) == to_lower_ascii(span)) {
    throw Error(ErrorCode::kProviderResponse, "incomplete_info rewrite left the span unchanged",
                {{"qa_id", qa.id}, {"span", span}});
  }
  auto ex = start(AugmentationKind::kIncompleteInfo, qa, evaluation);
  ex.qa.answer = splice(qa.answer, target.span, rewrite);
  ex.evaluation.ldps[target.ldp_index].tag = Tag::kMissing;
  ex.edit_log = fmt::format("rewrote ldps[{}] \"{}\" as \"{}\"; tag correct -> missing",
                            target.ldp_index, span, rewrite);
  check_or_throw(ex, qa, evaluation);
  return ex;
}

AugmentedExample Augmenter::change_value(const QAPair& qa, const Evaluation& evaluation,
                                         std::uint64_t seed) const {
  struct Candidate {
    std::size_t ldp_index;
    Span ldp_span;
    Span value;
  };
  std::vector<Candidate> candidates;
  for (const auto& located : eligible_correct(qa, evaluation)) {
    for (const auto& value : value_candidates(qa.answer, located.span)) {
      candidates.push_back({located.ldp_index, located.span, value});
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kPrecondition, "no number or named entity to change",
                {{"qa_id", qa.id}});
  }
  const auto& target = pick(candidates, seed);
  const std::string old_value = qa.answer.substr(target.value.pos, target.value.len);
  const std::string replacement = ask(
      RequestPurpose::kChangeValue, qa,
      {{"value", old_value}, {"answer", qa.answer},
       {"span", qa.answer.substr(target.ldp_span.pos, target.ldp_span.len)}},
      "Replace the value below with a different plausible value of the same kind (a number "
      "for a number, a name for a name). Reply with the new value only.\n\nVALUE\n" +
          old_value + "\n");
  if (replacement.empty() || replacement == old_value ||
      replacement.find('\n') != std::string::npos) {
    throw Error(ErrorCode::kProviderResponse, "change_value returned no usable value",
                {{"qa_id", qa.id}, {"value", old_value}});
  }
  auto ex = start(AugmentationKind::kChangeValue, qa, evaluation);
  ex.qa.answer = splice(qa.answer, target.value, replacement);
  auto& ldp = ex.evaluation.ldps[target.ldp_index];
  const Span in_ldp{target.value.pos - target.ldp_span.pos, target.value.len};
  ldp.text = splice(trim(ldp.text), in_ldp, replacement);
  ldp.tag = Tag::kIncorrect;
  ex.edit_log = fmt::format("changed \"{}\" to \"{}\" in ldps[{}]; tag correct -> incorrect",
                            old_value, replacement, target.ldp_index);
  check_or_throw(ex, qa, evaluation);
  return ex;
}

AugmentedExample Augmenter::add_extra_info(const QAPair& qa, const Evaluation& evaluation,
                                           std::uint64_t) const {
  const std::string extra = ask(
      RequestPurpose::kAddExtraInfo, qa, {{"answer", qa.answer}, {"question", qa.question}},
      "Write one or two sentences of general legal knowledge that could plausibly follow the "
      "answer below but are not taken from the contract. Reply with the sentences only.\n\n"
      "QUESTION\n" + qa.question + "\n\nANSWER\n" + qa.answer + "\n");
  const auto sentences = split_sentences(extra);
  if (extra.empty() || sentences.empty() || sentences.size() > 2) {
    throw Error(ErrorCode::kProviderResponse, "add_extra_info needs one or two sentences",
                {{"qa_id", qa.id}, {"sentences", sentences.size()}});
  }
  auto ex = start(AugmentationKind::kAddExtraInfo, qa, evaluation);
  ex.qa.answer = trim(qa.answer).size() == qa.answer.size() ? qa.answer + " " + extra
                                                            : qa.answer + extra;
  ex.evaluation.ldps.push_back({extra, Tag::kIncorrect, evaluation.evaluator_kind, std::nullopt});
  ex.edit_log = fmt::format("appended \"{}\" as incorrect", extra);
  check_or_throw(ex, qa, evaluation);
  return ex;
}

AugmentedExample Augmenter::contradicting_info(const QAPair& qa, const Evaluation& evaluation,
                                               std::uint64_t) const {
  if (!qa.ground_truth || trim(*qa.ground_truth).empty()) {
    throw Error(ErrorCode::kPrecondition, "contradicting_info needs a ground truth answer",
                {{"qa_id", qa.id}});
  }
  const std::string reply = ask(
      RequestPurpose::kContradictingInfo, qa,
      {{"ground_truth", *qa.ground_truth}, {"answer", qa.answer}},
      "Rewrite the ground truth answer below so that every statement contradicts it. Put each "
      "rewritten statement on its own line and reply with those lines only.\n\nGROUND TRUTH\n" +
          *qa.ground_truth + "\n");
  std::vector<std::string> assertions;
  std::size_t start_pos = 0;
  while (start_pos <= reply.size()) {
    const auto stop = std::min(reply.find('\n', start_pos), reply.size());
    if (auto line = trim(std::string_view(reply).substr(start_pos, stop - start_pos));
        !line.empty()) {
      assertions.push_back(std::move(line));
    }
    start_pos = stop + 1;
  }
  if (assertions.empty()) {
    throw Error(ErrorCode::kProviderResponse, "contradicting_info rewrite was empty",
                {{"qa_id", qa.id}});
  }
  auto ex = start(AugmentationKind::kContradictingInfo, qa, evaluation);
  ex.qa.answer.clear();
  for (const auto& a : assertions) {
    if (!ex.qa.answer.empty()) ex.qa.answer += ' ';
    ex.qa.answer += a;
  }
  std::size_t retagged = 0;
  for (auto& ldp : ex.evaluation.ldps) {
    if (ldp.tag == Tag::kCorrect) {
      ldp.tag = Tag::kMissing;
      ++retagged;
    }
  }
  for (const auto& a : assertions) {
    ex.evaluation.ldps.push_back({a, Tag::kIncorrect, evaluation.evaluator_kind, std::nullopt});
  }
  ex.added_assertions = assertions.size();
  ex.edit_log = fmt::format("rewrote answer into {} contradicting assertion(s); {} correct -> missing",
                            assertions.size(), retagged);
  check_or_throw(ex, qa, evaluation);
  return ex;
}

std::string edit_log_csv(const std::vector<AugmentedExample>& examples) {
  std::string out = csv_row({"kind", "original_qa_id", "qa_id", "edit_log"});
  for (const auto& ex : examples) {
    out += csv_row({std::string(to_string(ex.kind)), ex.original_qa_id, ex.qa.id, ex.edit_log});
  }
  return out;
}

}  // namespace ldpjudge
