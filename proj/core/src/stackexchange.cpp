#include "expertrank/stackexchange.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "expertrank/error.hpp"

namespace expertrank {

namespace {

void append_decoded_entity(std::string_view entity, std::string& out) {
  // entity excludes the '&' and ';' delimiters
  if (entity == "lt") out.push_back('<');
  else if (entity == "gt") out.push_back('>');
  else if (entity == "amp") out.push_back('&');
  else if (entity == "quot") out.push_back('"');
  else if (entity == "apos") out.push_back('\'');
  else if (entity == "nbsp") out.push_back(' ');
  else if (!entity.empty() && entity[0] == '#') {
    std::uint32_t code = 0;
    bool ok = false;
    if (entity.size() > 2 && (entity[1] == 'x' || entity[1] == 'X')) {
      auto r = std::from_chars(entity.data() + 2, entity.data() + entity.size(), code, 16);
      ok = r.ec == std::errc() && r.ptr == entity.data() + entity.size();
    } else if (entity.size() > 1) {
      auto r = std::from_chars(entity.data() + 1, entity.data() + entity.size(), code, 10);
      ok = r.ec == std::errc() && r.ptr == entity.data() + entity.size();
    }
    if (!ok) {
      out.push_back('&');
      out.append(entity);
      out.push_back(';');
      return;
    }
    // UTF-8 encode the code point.
    if (code < 0x80) {
      out.push_back(static_cast<char>(code));
    } else if (code < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (code >> 6)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else if (code < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (code >> 12)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (code >> 18)));
      out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
    }
  } else {
    // Unknown entity, keep it verbatim.
    out.push_back('&');
    out.append(entity);
    out.push_back(';');
  }
}

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '&') {
      auto end = text.find(';', i + 1);
      if (end != std::string_view::npos && end - i <= 12) {
        append_decoded_entity(text.substr(i + 1, end - i - 1), out);
        i = end;
        continue;
      }
    }
    out.push_back(text[i]);
  }
  return out;
}

}  // namespace

std::string strip_html(std::string_view body) {
  std::string no_tags;
  no_tags.reserve(body.size());
  bool in_tag = false;
  for (char ch : body) {
    if (ch == '<') {
      in_tag = true;
      // Tag boundaries separate words ("a<br>b" -> "a b").
      no_tags.push_back(' ');
    } else if (ch == '>') {
      in_tag = false;
    } else if (!in_tag) {
      no_tags.push_back(ch);
    }
  }

  std::string decoded = decode_entities(no_tags);

  std::string out;
  out.reserve(decoded.size());
  bool pending_space = false;
  for (unsigned char ch : decoded) {
    if (std::isspace(ch)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(static_cast<char>(ch));
    }
  }
  return out;
}

namespace {

// Pull-parser over an istream with a sliding buffer; byte offsets are
// absolute positions in the stream.
class RowScanner {
 public:
  explicit RowScanner(std::istream& in) : in_(in) {}

  // Returns false at end of input; otherwise fills `attrs` with the next
  // <row ...> element's attributes (values entity-decoded).
  std::size_t offset() const { return offset_; }

  bool next_row(std::vector<std::pair<std::string, std::string>>& attrs) {
    attrs.clear();
    if (!seek_row_start()) return false;

    // Parse attributes until "/>" or ">".
    for (;;) {
      skip_whitespace();
      int c = peek();
      if (c == EOF) throw ParseError("unterminated <row> element", offset_);
      if (c == '/') {
        advance();
        if (peek() != '>') throw ParseError("expected '>' after '/'", offset_);
        advance();
        return true;
      }
      if (c == '>') {
        advance();
        return true;
      }

      std::string name;
      while ((c = peek()) != EOF && (std::isalnum(c) || c == '_' || c == ':' || c == '-')) {
        name.push_back(static_cast<char>(c));
        advance();
      }
      if (name.empty()) throw ParseError("expected attribute name", offset_);
      skip_whitespace();
      if (peek() != '=') throw ParseError("expected '=' after attribute name", offset_);
      advance();
      skip_whitespace();
      int quote = peek();
      if (quote != '"' && quote != '\'') {
        throw ParseError("expected quoted attribute value", offset_);
      }
      advance();
      std::string value;
      while ((c = peek()) != EOF && c != quote) {
        value.push_back(static_cast<char>(c));
        advance();
      }
      if (c == EOF) throw ParseError("unterminated attribute value", offset_);
      advance();
      attrs.emplace_back(std::move(name), decode_entities(value));
    }
  }

 private:
  bool seek_row_start() {
    // Scan for "<row" followed by whitespace or tag end.
    for (;;) {
      int c = peek();
      if (c == EOF) return false;
      if (c != '<') {
        advance();
        continue;
      }
      if (!match_ahead("<row")) {
        advance();
        continue;
      }
      int after = peek_at(4);
      if (after == EOF || std::isspace(after) || after == '/' || after == '>') {
        for (int i = 0; i < 4; ++i) advance();
        return true;
      }
      advance();
    }
  }

  bool match_ahead(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (peek_at(i) != s[i]) return false;
    }
    return true;
  }

  void skip_whitespace() {
    int c;
    while ((c = peek()) != EOF && std::isspace(c)) advance();
  }

  int peek() { return peek_at(0); }

  int peek_at(std::size_t ahead) {
    while (buffer_.size() < pos_ + ahead + 1) {
      if (!fill()) return EOF;
    }
    return static_cast<unsigned char>(buffer_[pos_ + ahead]);
  }

  void advance() {
    if (peek() == EOF) return;
    ++pos_;
    ++offset_;
  }

  bool fill() {
    // Compact the consumed prefix once per refill, keeping a small lookback.
    if (pos_ > kKeep) {
      buffer_.erase(0, pos_ - kKeep);
      pos_ = kKeep;
    }
    char chunk[65536];
    in_.read(chunk, sizeof(chunk));
    std::streamsize got = in_.gcount();
    if (got <= 0) return false;
    buffer_.append(chunk, static_cast<std::size_t>(got));
    return true;
  }

  static constexpr std::size_t kKeep = 16;
  std::istream& in_;
  std::string buffer_;
  std::size_t pos_ = 0;
  std::size_t offset_ = 0;
};

std::vector<std::string> parse_tags(std::string_view raw) {
  std::vector<std::string> tags;
  if (raw.empty()) return tags;
  if (raw.front() == '<') {
    std::size_t i = 0;
    while (i < raw.size()) {
      if (raw[i] != '<') { ++i; continue; }
      auto end = raw.find('>', i + 1);
      if (end == std::string_view::npos) break;
      if (end > i + 1) tags.emplace_back(raw.substr(i + 1, end - i - 1));
      i = end + 1;
    }
  } else {
    // Newer dumps delimit with '|'.
    std::size_t start = 0;
    while (start <= raw.size()) {
      auto end = raw.find('|', start);
      if (end == std::string_view::npos) end = raw.size();
      if (end > start) tags.emplace_back(raw.substr(start, end - start));
      start = end + 1;
    }
  }
  return tags;
}

}  // namespace

void parse_posts(std::istream& xml,
                 const std::function<void(StackExchangePost)>& sink) {
  RowScanner scanner(xml);
  std::vector<std::pair<std::string, std::string>> attrs;
  while (scanner.next_row(attrs)) {
    int post_type = 0;
    StackExchangePost post;
    for (auto& [name, value] : attrs) {
      try {
        if (name == "Id") post.post_id = std::stoll(value);
        else if (name == "PostTypeId") post_type = std::stoi(value);
        else if (name == "Score") post.score = std::stoi(value);
        else if (name == "ParentId") post.parent_id = std::stoll(value);
        else if (name == "OwnerUserId") post.owner_id = std::stoll(value);
        else if (name == "Tags") post.tags = parse_tags(value);
        else if (name == "Title") post.title = value;
        else if (name == "Body") post.body = value;
      } catch (const std::logic_error&) {
        throw ParseError("attribute " + name + " is not numeric: \"" + value + "\"",
                         scanner.offset());
      }
    }
    if (post_type == 1) post.type = PostType::question;
    else if (post_type == 2) post.type = PostType::answer;
    else continue;
    sink(std::move(post));
  }
}

std::vector<StackExchangePost> parse_posts(std::istream& xml) {
  std::vector<StackExchangePost> posts;
  parse_posts(xml, [&posts](StackExchangePost post) { posts.push_back(std::move(post)); });
  return posts;
}

Dataset build_stackexchange(std::vector<StackExchangePost> posts,
                            const IngestParams& params, IngestLog* log) {
  if (params.min_question_score < 0 || params.min_answer_score < 0 ||
      params.min_tag_count < 0 || params.expert_answer_score < 0) {
    throw Error("ingest thresholds must be nonnegative");
  }
  IngestLog local_log;
  if (!log) log = &local_log;
  *log = IngestLog{};

  std::unordered_map<std::int64_t, const StackExchangePost*> questions;
  for (const StackExchangePost& p : posts) {
    if (p.type == PostType::question) questions.emplace(p.post_id, &p);
  }

  // Answers grouped under their question, keeping only resolvable parents.
  std::map<std::int64_t, std::vector<const StackExchangePost*>> answers_of;
  for (const StackExchangePost& p : posts) {
    if (p.type != PostType::answer) continue;
    if (!p.parent_id || !questions.contains(*p.parent_id)) {
      ++log->orphan_answers;
      continue;
    }
    answers_of[*p.parent_id].push_back(&p);
  }

  // Question retention: enough votes, and some answer with enough votes.
  std::map<std::int64_t, const StackExchangePost*> kept_questions;
  for (const auto& [qid, q] : questions) {
    if (q->score < params.min_question_score) continue;
    auto it = answers_of.find(qid);
    if (it == answers_of.end()) continue;
    bool has_good_answer = std::any_of(
        it->second.begin(), it->second.end(),
        [&](const StackExchangePost* a) { return a->score >= params.min_answer_score; });
    if (has_good_answer) kept_questions.emplace(qid, q);
  }

  // Tag counting happens after question filtering.
  std::map<std::string, int> tag_counts;
  for (const auto& [qid, q] : kept_questions) {
    for (const std::string& tag : q->tags) ++tag_counts[tag];
  }
  std::unordered_map<std::string, std::uint32_t> label_ids;
  Dataset ds;
  for (const auto& [tag, count] : tag_counts) {
    if (count >= params.min_tag_count) {
      label_ids.emplace(tag, static_cast<std::uint32_t>(ds.label_names.size()));
      ds.label_names.push_back(tag);
    }
  }

  // Owners of included (non-ownerless) answers become candidates.
  std::map<std::int64_t, std::size_t> candidate_of_owner;
  for (const auto& [qid, q] : kept_questions) {
    for (const StackExchangePost* a : answers_of.at(qid)) {
      if (!a->owner_id) continue;
      candidate_of_owner.emplace(*a->owner_id, 0);
    }
  }
  for (auto& [owner, index] : candidate_of_owner) {
    index = ds.candidates.size();
    ds.candidates.push_back("u" + std::to_string(owner));
  }

  ds.candidate_labels.assign(ds.candidates.size(), {});
  std::vector<Triplet> dd_entries;
  std::vector<Triplet> dc_entries;

  for (const auto& [qid, q] : kept_questions) {
    const std::size_t q_index = ds.documents.size();
    std::string text = strip_html(q->body);
    if (params.include_title && !q->title.empty()) {
      text = q->title + (text.empty() ? "" : " ") + text;
    }
    ds.documents.push_back({"q" + std::to_string(qid), std::move(text)});

    LabelSet q_labels;
    for (const std::string& tag : q->tags) {
      auto it = label_ids.find(tag);
      if (it != label_ids.end()) q_labels.push_back(it->second);
    }
    std::sort(q_labels.begin(), q_labels.end());
    ds.doc_labels.push_back(q_labels);
    if (!q_labels.empty()) ds.queries.push_back(q_index);

    std::vector<const StackExchangePost*> answers = answers_of.at(qid);
    std::sort(answers.begin(), answers.end(),
              [](const StackExchangePost* a, const StackExchangePost* b) {
                return a->post_id < b->post_id;
              });
    for (const StackExchangePost* a : answers) {
      if (!a->owner_id) {
        ++log->ownerless_answers;
        continue;
      }
      const std::size_t a_index = ds.documents.size();
      ds.documents.push_back({"a" + std::to_string(a->post_id), strip_html(a->body)});
      ds.doc_labels.push_back({});
      dd_entries.push_back({q_index, a_index, 1.0});
      dd_entries.push_back({a_index, q_index, 1.0});

      const std::size_t c = candidate_of_owner.at(*a->owner_id);
      dc_entries.push_back({a_index, c, 1.0});
      if (a->score >= params.expert_answer_score) {
        LabelSet& have = ds.candidate_labels[c];
        have.insert(have.end(), q_labels.begin(), q_labels.end());
      }
    }
  }

  for (LabelSet& set : ds.candidate_labels) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
  }

  const std::size_t n_d = ds.documents.size();
  ds.a_dd = SparseMatrix::from_triplets(n_d, n_d, std::move(dd_entries));
  ds.a_dc = SparseMatrix::from_triplets(n_d, ds.candidates.size(), std::move(dc_entries));
  return ds;
}

}  // namespace expertrank
