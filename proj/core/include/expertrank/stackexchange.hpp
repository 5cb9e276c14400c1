#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "expertrank/dataset.hpp"

namespace expertrank {

enum class PostType { question, answer };

struct StackExchangePost {
  std::int64_t post_id = 0;
  PostType type = PostType::question;
  int score = 0;
  std::optional<std::int64_t> parent_id;  // answers
  std::optional<std::int64_t> owner_id;
  std::vector<std::string> tags;  // questions
  std::string title;              // questions, may be empty
  std::string body;               // raw HTML
};

struct IngestParams {
  int min_question_score = 10;
  int min_answer_score = 10;
  int min_tag_count = 50;
  int expert_answer_score = 10;
  bool include_title = true;  // prepend the question title to its text
};

// Counters for records dropped during dataset construction.
struct IngestLog {
  std::size_t orphan_answers = 0;    // parent id absent from the stream
  std::size_t ownerless_answers = 0; // no OwnerUserId
};

// Tags removed (contents kept, <code> included), entities decoded,
// whitespace collapsed, trimmed. Best-effort on malformed HTML.
std::string strip_html(std::string_view body);

// Streams `<row .../>` elements of a Posts.xml dump; rows whose PostTypeId
// is neither 1 nor 2 are skipped. Memory use is independent of file size.
// Throws ParseError (with byte offset) on malformed XML.
void parse_posts(std::istream& xml,
                 const std::function<void(StackExchangePost)>& sink);

// Convenience wrapper materializing the stream.
std::vector<StackExchangePost> parse_posts(std::istream& xml);

/// Builds a dataset from a post stream:
/// keep questions with score >= min_question_score that have at least one
/// answer with score >= min_answer_score; documents are those questions plus
/// all their answers (ownerless answers dropped); A_dd links questions with
/// their answers; A_dc links answers with their owners; labels are question
/// tags occurring at least min_tag_count times among kept questions; an
/// answerer is annotated with a question's kept tags when her answer scored
/// at least expert_answer_score; queries are the questions with a kept tag.
Dataset build_stackexchange(std::vector<StackExchangePost> posts,
                            const IngestParams& params, IngestLog* log = nullptr);

}  // namespace expertrank
