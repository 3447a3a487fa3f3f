#include <doctest.h>

#include <random>

#include "text_analysis.hpp"

using namespace trs;

namespace {

Lexicon small_lexicon() {
  return parse_lexicon(
      "great\t0.8\nterrible\t-0.8\neasy\t0.5\n"
      "[negators]\nnot\n[aspects]\nscreen\nbattery\n");
}

}  // namespace

TEST_CASE("negated sentence flips polarity") {
  const auto lex = parse_lexicon("easy\t0.5\n[negators]\nnot\n");
  const auto r = sentiment_score("It is not easy to carry.", lex);
  REQUIRE(r.sentences.size() == 1);
  CHECK(r.sentences[0].polarity == doctest::Approx(-0.5));
  CHECK(r.overall == doctest::Approx(-0.5));
  CHECK(classify_feedback("It is not easy to carry.", default_lexicon()) ==
        FeedbackCategory::Negative);
}

TEST_CASE("empty text is rejected") {
  const auto lex = small_lexicon();
  CHECK_THROWS_AS(sentiment_score("", lex), Error);
  CHECK_THROWS_AS(sentiment_score("   \n", lex), Error);
  CHECK_THROWS_AS(sentiment_score("?!.;", lex), Error);
  CHECK_THROWS_AS(classify_feedback("", lex), Error);
}

TEST_CASE("two aspects, opposite polarities") {
  const auto lex = small_lexicon();
  const auto r = sentiment_score("great screen. terrible battery.", lex);
  REQUIRE(r.sentences.size() == 2);
  CHECK(r.sentences[0].polarity == doctest::Approx(0.8));
  CHECK(r.sentences[1].polarity == doctest::Approx(-0.8));
  CHECK(r.sentences[0].aspect_tokens == std::set<std::string>{"screen"});
  CHECK(r.sentences[1].aspect_tokens == std::set<std::string>{"battery"});
  CHECK(r.overall == doctest::Approx(0.0));
  CHECK(classify_feedback(r) == FeedbackCategory::Mitigated);
}

TEST_CASE("same aspect, opposite polarities is contradictory") {
  CHECK(classify_feedback("battery is great. battery is terrible.",
                          small_lexicon()) == FeedbackCategory::Contradictory);
  CHECK(classify_feedback("battery is great. battery is terrible.",
                          default_lexicon()) ==
        FeedbackCategory::Contradictory);
}

TEST_CASE("classification rules") {
  const auto& lex = default_lexicon();
  CHECK(classify_feedback("great screen. works well.", lex) ==
        FeedbackCategory::Positive);
  CHECK(classify_feedback("awful camera!", lex) == FeedbackCategory::Negative);
  // Inside the dead band: no polar claim.
  CHECK(classify_feedback("it is okay", lex) == FeedbackCategory::Mitigated);
  CHECK(classify_feedback("the box arrived", lex) ==
        FeedbackCategory::Mitigated);
}

TEST_CASE("negation window spans three tokens") {
  const auto lex = small_lexicon();
  CHECK(sentiment_score("not really very easy", lex).overall ==
        doctest::Approx(-0.5));
  CHECK(sentiment_score("not really very truly easy", lex).overall ==
        doctest::Approx(0.5));
  // Windows end at sentence breaks.
  CHECK(sentiment_score("not. easy", lex).overall == doctest::Approx(0.25));
}

TEST_CASE("sentence polarity is clamped") {
  const auto lex = small_lexicon();
  CHECK(sentiment_score("great great great", lex).overall ==
        doctest::Approx(1.0));
}

TEST_CASE("concordance examples") {
  const auto& lex = default_lexicon();
  CHECK(test_concordance(5.0, "great screen. works well.", lex));
  CHECK_FALSE(test_concordance(1.0, "great screen. works well.", lex));
  CHECK_FALSE(test_concordance(3.0, "battery is great. battery is terrible.",
                               lex));
  CHECK(test_concordance(1.0, "terrible battery", lex));
  CHECK(test_concordance(3.0, "great screen. terrible battery.", lex));
  CHECK_THROWS_AS(test_concordance(0.0, "great", lex), Error);
  CHECK_THROWS_AS(test_concordance(5.5, "great", lex), Error);
}

TEST_CASE("concordance thresholds") {
  CHECK(is_concordant(3.5, FeedbackCategory::Positive));
  CHECK_FALSE(is_concordant(3.49, FeedbackCategory::Positive));
  CHECK(is_concordant(2.5, FeedbackCategory::Negative));
  CHECK_FALSE(is_concordant(2.51, FeedbackCategory::Negative));
  CHECK(is_concordant(2.0, FeedbackCategory::Mitigated));
  CHECK(is_concordant(4.0, FeedbackCategory::Mitigated));
  CHECK_FALSE(is_concordant(4.01, FeedbackCategory::Mitigated));
  for (double a = 1.0; a <= 5.0; a += 0.25) {
    CHECK_FALSE(is_concordant(a, FeedbackCategory::Contradictory));
  }
}

TEST_CASE("negation flip is symmetric for every lexicon entry") {
  const auto& lex = default_lexicon();
  for (const auto& [token, weight] : lex.entries) {
    if (lex.negators.count(token) != 0 || weight == 0.0) {
      continue;
    }
    const auto plain = sentiment_score(token, lex).overall;
    const auto negated = sentiment_score("not " + token, lex).overall;
    CAPTURE(token);
    CHECK(plain == doctest::Approx(weight));
    CHECK(negated == doctest::Approx(-plain));
  }
}

TEST_CASE("property: contradictory only with a shared polar aspect") {
  const auto& lex = default_lexicon();
  std::vector<std::string> words;
  for (const auto& [t, w] : lex.entries) {
    words.push_back(t);
  }
  const std::vector<std::string> aspects(lex.aspect_terms.begin(),
                                         lex.aspect_terms.end());
  std::mt19937_64 rng(42);
  const auto pick = [&](const std::vector<std::string>& v) {
    return v[rng() % v.size()];
  };
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const int sentences = 1 + static_cast<int>(rng() % 4);
    for (int s = 0; s < sentences; ++s) {
      text += "the " + pick(aspects) + (rng() % 3 == 0 ? " is not " : " is ") +
              pick(words) + ". ";
    }
    const auto report = sentiment_score(text, lex);
    // Determinism.
    REQUIRE(report == sentiment_score(text, lex));

    std::set<std::string> pos, neg;
    for (const auto& s : report.sentences) {
      if (s.polarity > kPolarityDeadBand) {
        pos.insert(s.aspect_tokens.begin(), s.aspect_tokens.end());
      } else if (s.polarity < -kPolarityDeadBand) {
        neg.insert(s.aspect_tokens.begin(), s.aspect_tokens.end());
      }
    }
    bool shared = false;
    for (const auto& a : pos) {
      shared = shared || neg.count(a) != 0;
    }
    CAPTURE(text);
    CHECK((classify_feedback(report) == FeedbackCategory::Contradictory) ==
          shared);

    if (classify_feedback(report) == FeedbackCategory::Positive &&
        is_concordant(5.0, FeedbackCategory::Positive)) {
      for (double a = 3.5; a <= 5.0; a += 0.05) {
        CHECK(test_concordance(a, text, lex));
      }
    }
  }
}

TEST_CASE("lexicon parsing") {
  SUBCASE("default lexicon is substantial") {
    const auto& lex = default_lexicon();
    CHECK(lex.entries.size() >= 50);
    CHECK(lex.negators.count("not") == 1);
    CHECK(lex.aspect_terms.count("battery") == 1);
  }
  SUBCASE("comments, blank lines and CRLF") {
    const auto lex = parse_lexicon("# c\r\n\r\nGood\t0.5\r\n[aspects]\r\nLens\r\n");
    CHECK(lex.entries.at("good") == 0.5);
    CHECK(lex.aspect_terms.count("lens") == 1);
  }
  SUBCASE("errors carry the line number") {
    try {
      parse_lexicon("good\t0.5\nbad\t-1.5\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_lexicon("good 0.5\n"), Error);
    CHECK_THROWS_AS(parse_lexicon("good\tabc\n"), Error);
    CHECK_THROWS_AS(parse_lexicon("[negators]\nnot\n"), Error);
    CHECK_THROWS_AS(parse_lexicon("good\t0.5\n[other]\n"), Error);
  }
  SUBCASE("negator role wins over an entry") {
    const auto lex = parse_lexicon("no\t-0.5\ngood\t0.5\n[negators]\nno\n");
    CHECK(sentiment_score("no", lex).overall == 0.0);
    CHECK(sentiment_score("no good", lex).overall == doctest::Approx(-0.5));
  }
}

TEST_CASE("tokenizer keeps UTF-8 words and lowercases ASCII") {
  CHECK(tokenize("Très BIEN, ok!") ==
        std::vector<std::string>{"très", "bien", "ok"});
  CHECK(tokenize("don't") == std::vector<std::string>{"don", "t"});
}
