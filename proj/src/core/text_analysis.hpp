// Lexicon-based feedback analysis: sentence polarity with a negation window,
// four-way categorisation, and the appreciation/text concordance test.

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "domain.hpp"

namespace trs {

/// Sentences whose |polarity| does not exceed this are neutral.
inline constexpr double kPolarityDeadBand = 0.1;
/// An entry token up to this many tokens after a negator is sign-flipped.
inline constexpr std::size_t kNegationWindow = 3;

struct Lexicon {
  std::map<std::string, double> entries;
  std::set<std::string> negators;
  std::set<std::string> aspect_terms;

  bool operator==(const Lexicon&) const = default;
};

/// Parses the tab-separated lexicon format. Errors name the offending line.
Lexicon parse_lexicon(std::string_view text);
Lexicon load_lexicon(const std::filesystem::path& path);

/// The lexicon shipped with the library (data/default_lexicon.tsv).
const Lexicon& default_lexicon();
std::string_view default_lexicon_text();

struct SentencePolarity {
  std::string sentence;
  double polarity = 0.0;
  std::set<std::string> aspect_tokens;

  bool operator==(const SentencePolarity&) const = default;
};

struct SentimentReport {
  std::vector<SentencePolarity> sentences;
  double overall = 0.0;

  bool operator==(const SentimentReport&) const = default;
};

/// Lowercased alphanumeric runs; bytes >= 0x80 count as word characters so
/// UTF-8 words survive intact.
std::vector<std::string> tokenize(std::string_view text);

/// Splits on . ! ? ; and scores each sentence that has at least one token.
/// Throws Error("empty_text") when nothing scorable remains.
SentimentReport sentiment_score(std::string_view text, const Lexicon& lexicon);

FeedbackCategory classify_feedback(const SentimentReport& report);
FeedbackCategory classify_feedback(std::string_view text,
                                   const Lexicon& lexicon);

/// Whether an appreciation on [1,5] agrees with a text category.
/// Contradictory is never concordant.
bool is_concordant(double appreciation, FeedbackCategory category);
bool test_concordance(double appreciation, std::string_view text,
                      const Lexicon& lexicon);

}  // namespace trs
