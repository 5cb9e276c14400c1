#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "expertrank/error.hpp"
#include "expertrank/dataset_io.hpp"
#include "expertrank/stackexchange.hpp"
#include "testutil.hpp"

using namespace expertrank;

namespace {

// Twelve-post miniature dump exercising every filtering rule: a retained
// question with a strong and a weak answer, a question killed by its own
// score, one killed by its answers, a second retained question, a wiki row,
// and an orphan answer.
const char* kMiniDump = R"(<?xml version="1.0" encoding="utf-8"?>
<posts>
  <row Id="1" PostTypeId="1" Score="15" OwnerUserId="100" Title="Likelihood pitfalls" Tags="&lt;alpha&gt;&lt;beta&gt;" Body="&lt;p&gt;How does maximum likelihood behave?&lt;/p&gt;" />
  <row Id="2" PostTypeId="2" ParentId="1" Score="12" OwnerUserId="101" Body="&lt;p&gt;Use the observed information.&lt;/p&gt;" />
  <row Id="3" PostTypeId="2" ParentId="1" Score="3" OwnerUserId="102" Body="&lt;p&gt;Plot the surface first.&lt;/p&gt;" />
  <row Id="4" PostTypeId="1" Score="9" OwnerUserId="103" Title="Low votes" Tags="&lt;alpha&gt;" Body="&lt;p&gt;Too few votes here.&lt;/p&gt;" />
  <row Id="5" PostTypeId="2" ParentId="4" Score="50" OwnerUserId="101" Body="&lt;p&gt;Great answer, doomed question.&lt;/p&gt;" />
  <row Id="6" PostTypeId="1" Score="20" OwnerUserId="104" Title="No good answers" Tags="&lt;alpha&gt;" Body="&lt;p&gt;All answers are weak.&lt;/p&gt;" />
  <row Id="7" PostTypeId="2" ParentId="6" Score="9" OwnerUserId="101" Body="&lt;p&gt;Close but not enough.&lt;/p&gt;" />
  <row Id="8" PostTypeId="2" ParentId="6" Score="2" OwnerUserId="105" Body="&lt;p&gt;Weak answer.&lt;/p&gt;" />
  <row Id="9" PostTypeId="1" Score="30" OwnerUserId="100" Title="Bayesian shrinkage" Tags="&lt;beta&gt;&lt;gamma&gt;" Body="&lt;p&gt;Why does shrinkage help?&lt;/p&gt;" />
  <row Id="10" PostTypeId="2" ParentId="9" Score="10" OwnerUserId="102" Body="&lt;p&gt;Bias variance tradeoff.&lt;/p&gt;" />
  <row Id="11" PostTypeId="4" Score="0" Body="tag wiki" />
  <row Id="12" PostTypeId="2" ParentId="999" Score="11" OwnerUserId="106" Body="&lt;p&gt;Orphan.&lt;/p&gt;" />
</posts>
)";

std::vector<StackExchangePost> mini_posts() {
  std::istringstream xml(kMiniDump);
  return parse_posts(xml);
}

IngestParams mini_params() {
  IngestParams params;
  params.min_tag_count = 1;
  return params;
}

// Random synthetic dumps for the monotonicity property.
std::vector<StackExchangePost> random_posts(std::mt19937_64& rng) {
  std::vector<StackExchangePost> posts;
  std::uniform_int_distribution<int> q_count(1, 8);
  std::uniform_int_distribution<int> a_count(0, 4);
  std::uniform_int_distribution<int> score(0, 20);
  std::uniform_int_distribution<int> owner(1, 6);
  std::uniform_int_distribution<int> tag(0, 3);
  std::int64_t next_id = 1;
  const int questions = q_count(rng);
  for (int q = 0; q < questions; ++q) {
    StackExchangePost question;
    question.post_id = next_id++;
    question.type = PostType::question;
    question.score = score(rng);
    question.owner_id = owner(rng);
    question.title = "title " + std::to_string(q);
    question.body = "question body " + std::to_string(q);
    const int tags = 1 + static_cast<int>(rng() % 2);
    for (int t = 0; t < tags; ++t) {
      question.tags.push_back("tag" + std::to_string(tag(rng)));
    }
    const std::int64_t qid = question.post_id;
    posts.push_back(std::move(question));
    const int answers = a_count(rng);
    for (int a = 0; a < answers; ++a) {
      StackExchangePost answer;
      answer.post_id = next_id++;
      answer.type = PostType::answer;
      answer.parent_id = qid;
      answer.score = score(rng);
      if (rng() % 10 != 0) answer.owner_id = owner(rng);
      answer.body = "answer body " + std::to_string(answer.post_id);
      posts.push_back(std::move(answer));
    }
  }
  return posts;
}

struct DatasetSize {
  std::size_t n_d, n_c, n_queries, n_labels, n_experts;
};

DatasetSize size_of(const Dataset& ds) {
  std::size_t experts = 0;
  for (const LabelSet& set : ds.candidate_labels) {
    if (!set.empty()) ++experts;
  }
  return {ds.n_docs(), ds.n_candidates(), ds.queries.size(), ds.label_names.size(),
          experts};
}

bool never_grows(const DatasetSize& base, const DatasetSize& stricter) {
  return stricter.n_d <= base.n_d && stricter.n_c <= base.n_c &&
         stricter.n_queries <= base.n_queries && stricter.n_labels <= base.n_labels &&
         stricter.n_experts <= base.n_experts;
}

}  // namespace

TEST_SUITE_BEGIN("stackexchange");

TEST_CASE("strip_html removes tags and decodes entities") {
  CHECK(strip_html("<p>hello <b>world</b></p>") == "hello world");
  CHECK(strip_html("a &amp; b") == "a & b");
  CHECK(strip_html("") == "");
  CHECK(strip_html("<pre><code>x &lt; y</code></pre>") == "x < y");
  CHECK(strip_html("a<br>b") == "a b");
  CHECK(strip_html("  lots   of\n space ") == "lots of space");
  CHECK(strip_html("&#65;&#x42;") == "AB");
  CHECK(strip_html("<unclosed attr=\"x\"") == "");
}

TEST_CASE("parse_posts decodes rows of both post types") {
  std::istringstream xml(
      "<posts>\n"
      "<row Id=\"5\" PostTypeId=\"1\" Score=\"12\" Tags=\"&lt;stats&gt;&lt;ml&gt;\" "
      "Body=\"b\" />\n"
      "<row Id=\"6\" PostTypeId=\"2\" ParentId=\"7\" Score=\"1\" Body=\"c\" />\n"
      "<row Id=\"8\" PostTypeId=\"4\" Score=\"0\" Body=\"w\" />\n"
      "</posts>\n");
  auto posts = parse_posts(xml);
  REQUIRE(posts.size() == 2);  // the wiki row is skipped
  CHECK(posts[0].type == PostType::question);
  CHECK(posts[0].score == 12);
  CHECK(posts[0].tags == std::vector<std::string>{"stats", "ml"});
  CHECK(posts[1].type == PostType::answer);
  REQUIRE(posts[1].parent_id.has_value());
  CHECK(*posts[1].parent_id == 7);
}

TEST_CASE("parse_posts streams without materializing and reports offsets") {
  std::istringstream xml("<posts><row Id=\"1\" PostTypeId=\"1\" Score=\"1\" Body=");
  CHECK_THROWS_AS(parse_posts(xml), ParseError);

  std::istringstream xml2("<posts><row Id=\"1\" PostTypeId=\"1\" Score !</posts>");
  try {
    parse_posts(xml2);
    CHECK(false);
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() > 0);
  }
}

TEST_CASE("parse_posts handles pipe-delimited tags") {
  std::istringstream xml(
      "<posts><row Id=\"1\" PostTypeId=\"1\" Score=\"1\" Tags=\"|a-tag|b-tag|\" "
      "Body=\"x\" /></posts>");
  auto posts = parse_posts(xml);
  REQUIRE(posts.size() == 1);
  CHECK(posts[0].tags == std::vector<std::string>{"a-tag", "b-tag"});
}

TEST_CASE("the miniature dump builds the hand-derived dataset") {
  IngestLog log;
  Dataset ds = build_stackexchange(mini_posts(), mini_params(), &log);

  // Questions 1 and 9 survive; 4 dies on its own score, 6 on its answers.
  REQUIRE(ds.n_docs() == 5);
  CHECK(ds.documents[0].id == "q1");
  CHECK(ds.documents[1].id == "a2");
  CHECK(ds.documents[2].id == "a3");
  CHECK(ds.documents[3].id == "q9");
  CHECK(ds.documents[4].id == "a10");

  // Texts: title prepended, HTML stripped.
  CHECK(ds.documents[0].text ==
        "Likelihood pitfalls How does maximum likelihood behave?");
  CHECK(ds.documents[1].text == "Use the observed information.");

  // Candidates: owners of included answers, ascending user id.
  CHECK(ds.candidates == std::vector<std::string>{"u101", "u102"});

  // Labels: tags of kept questions (min_tag_count 1), sorted.
  CHECK(ds.label_names == std::vector<std::string>{"alpha", "beta", "gamma"});

  // Authorship: a2 -> u101, a3 -> u102, a10 -> u102; questions unattributed.
  CHECK(ds.a_dc.at(1, 0) == 1.0);
  CHECK(ds.a_dc.at(2, 1) == 1.0);
  CHECK(ds.a_dc.at(4, 1) == 1.0);
  CHECK(ds.a_dc.at(0, 0) == 0.0);
  CHECK(ds.a_dc.nnz() == 3);

  // Question-answer links, symmetric.
  CHECK(ds.a_dd.at(0, 1) == 1.0);
  CHECK(ds.a_dd.at(1, 0) == 1.0);
  CHECK(ds.a_dd.at(0, 2) == 1.0);
  CHECK(ds.a_dd.at(3, 4) == 1.0);
  CHECK(ds.a_dd.nnz() == 6);

  // Expertise: u101's answer to q1 scored 12 -> alpha+beta; u102 earns q9's
  // tags through a10 (score 10) but nothing from a3 (score 3).
  CHECK(ds.candidate_labels[0] == LabelSet{0, 1});
  CHECK(ds.candidate_labels[1] == LabelSet{1, 2});

  CHECK(ds.doc_labels[0] == LabelSet{0, 1});
  CHECK(ds.doc_labels[3] == LabelSet{1, 2});
  CHECK(ds.queries == std::vector<std::size_t>{0, 3});

  CHECK(log.orphan_answers == 1);
  CHECK(log.ownerless_answers == 0);
  CHECK(validate(ds).empty());
}

TEST_CASE("summary counts of the miniature dump") {
  Dataset ds = build_stackexchange(mini_posts(), mini_params());
  std::size_t questions = 0, answers = 0;
  for (const Document& d : ds.documents) {
    (d.id[0] == 'q' ? questions : answers) += 1;
  }
  CHECK(questions == 2);
  CHECK(answers == 3);
  CHECK(ds.n_candidates() == 2);
}

TEST_CASE("the ingested miniature dataset round-trips through disk") {
  Dataset ds = build_stackexchange(mini_posts(), mini_params());
  auto dir = std::filesystem::temp_directory_path() / "expertrank_mini_roundtrip";
  std::filesystem::remove_all(dir);
  save_dataset(ds, dir);
  CHECK(load_dataset(dir) == ds);
  std::filesystem::remove_all(dir);
}

TEST_CASE("default tag threshold empties the label set") {
  IngestParams defaults;  // min_tag_count = 50
  Dataset ds = build_stackexchange(mini_posts(), defaults);
  CHECK(ds.label_names.empty());
  CHECK(ds.queries.empty());
  CHECK(ds.n_docs() == 5);  // documents unaffected by tag pruning
  CHECK(validate(ds).empty());
}

TEST_CASE("a strong answer cannot save a weak question") {
  auto posts = mini_posts();
  Dataset ds = build_stackexchange(posts, mini_params());
  for (const Document& d : ds.documents) {
    CHECK(d.id != "q4");
    CHECK(d.id != "a5");
  }
}

TEST_CASE("tag counting happens after question filtering") {
  // "alpha" appears on questions 1, 4, 6 but only question 1 survives, so a
  // threshold of 2 kills it.
  IngestParams params = mini_params();
  params.min_tag_count = 2;
  Dataset ds = build_stackexchange(mini_posts(), params);
  CHECK(ds.label_names == std::vector<std::string>{"beta"});
  // Both kept questions carry beta.
  CHECK(ds.queries.size() == 2);
}

TEST_CASE("title inclusion is optional") {
  IngestParams params = mini_params();
  params.include_title = false;
  Dataset ds = build_stackexchange(mini_posts(), params);
  CHECK(ds.documents[0].text == "How does maximum likelihood behave?");
}

TEST_CASE("ownerless answers are dropped but their question survives") {
  std::vector<StackExchangePost> posts;
  StackExchangePost q;
  q.post_id = 1;
  q.type = PostType::question;
  q.score = 10;
  q.tags = {"alpha"};
  q.body = "q";
  posts.push_back(q);
  StackExchangePost a;
  a.post_id = 2;
  a.type = PostType::answer;
  a.parent_id = 1;
  a.score = 99;
  a.body = "a";  // no owner
  posts.push_back(a);

  IngestLog log;
  Dataset ds = build_stackexchange(posts, mini_params(), &log);
  CHECK(ds.n_docs() == 1);  // the question alone
  CHECK(ds.n_candidates() == 0);
  CHECK(log.ownerless_answers == 1);
  CHECK(validate(ds).empty());
}

TEST_CASE("negative thresholds are rejected") {
  IngestParams params;
  params.min_question_score = -1;
  CHECK_THROWS_AS(build_stackexchange({}, params), Error);
}

TEST_CASE("every expert owns a qualifying answer") {
  std::mt19937_64 rng(61);
  for (int round = 0; round < 50; ++round) {
    auto posts = random_posts(rng);
    IngestParams params;
    params.min_question_score = 5;
    params.min_answer_score = 5;
    params.min_tag_count = 1;
    params.expert_answer_score = 8;
    Dataset ds = build_stackexchange(posts, params);
    REQUIRE(validate(ds).empty());

    for (std::size_t c = 0; c < ds.n_candidates(); ++c) {
      if (ds.candidate_labels[c].empty()) continue;
      bool qualified = false;
      for (const StackExchangePost& p : posts) {
        if (p.type != PostType::answer || !p.owner_id) continue;
        if ("u" + std::to_string(*p.owner_id) == ds.candidates[c] &&
            p.score >= params.expert_answer_score) {
          qualified = true;
          break;
        }
      }
      CHECK(qualified);
    }
  }
}

TEST_CASE("raising any threshold never grows the dataset") {
  std::mt19937_64 rng(67);
  for (int round = 0; round < 100; ++round) {
    auto posts = random_posts(rng);
    IngestParams base;
    base.min_question_score = 3;
    base.min_answer_score = 3;
    base.min_tag_count = 1;
    base.expert_answer_score = 5;
    DatasetSize base_size = size_of(build_stackexchange(posts, base));

    IngestParams harder = base;
    switch (round % 4) {
      case 0: harder.min_question_score += 1 + static_cast<int>(rng() % 5); break;
      case 1: harder.min_answer_score += 1 + static_cast<int>(rng() % 5); break;
      case 2: harder.min_tag_count += 1 + static_cast<int>(rng() % 3); break;
      case 3: harder.expert_answer_score += 1 + static_cast<int>(rng() % 5); break;
    }
    DatasetSize harder_size = size_of(build_stackexchange(posts, harder));
    CHECK(never_grows(base_size, harder_size));
  }
}

TEST_SUITE_END();
