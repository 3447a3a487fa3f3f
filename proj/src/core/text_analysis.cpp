#include "text_analysis.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

namespace trs {

namespace {

[[noreturn]] void lexicon_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::InvalidArgument, "invalid_lexicon",
              "lexicon line " + std::to_string(line) + ": " + what);
}

bool is_word_byte(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_sentence_break(char c) {
  return c == '.' || c == '!' || c == '?' || c == ';';
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

SentencePolarity score_sentence(std::string_view sentence,
                                const std::vector<std::string>& tokens,
                                const Lexicon& lexicon) {
  SentencePolarity out;
  out.sentence = std::string(trim(sentence));

  double sum = 0.0;
  // Index one past the most recent negator, 0 when none seen yet.
  std::size_t negator_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (lexicon.aspect_terms.count(tok) != 0) {
      out.aspect_tokens.insert(tok);
    }
    if (lexicon.negators.count(tok) != 0) {
      negator_end = i + 1;
      continue;
    }
    const auto it = lexicon.entries.find(tok);
    if (it == lexicon.entries.end()) {
      continue;
    }
    const bool negated =
        negator_end != 0 && i + 1 - negator_end <= kNegationWindow;
    sum += negated ? -it->second : it->second;
  }
  out.polarity = std::clamp(sum, -1.0, 1.0);
  return out;
}

}  // namespace

Lexicon parse_lexicon(std::string_view text) {
  enum class Section { Entries, Negators, Aspects };
  Lexicon lex;
  Section section = Section::Entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                             : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    const auto trimmed = trim(line);
    if (trimmed.empty() || trimmed.front() == '#') {
      continue;
    }
    if (trimmed == "[negators]") {
      section = Section::Negators;
      continue;
    }
    if (trimmed == "[aspects]") {
      section = Section::Aspects;
      continue;
    }
    if (trimmed.front() == '[') {
      lexicon_error(line_no, "unknown section " + std::string(trimmed));
    }

    if (section != Section::Entries) {
      if (trimmed.find_first_of(" \t") != std::string_view::npos) {
        lexicon_error(line_no, "expected a single token");
      }
      auto& set = section == Section::Negators ? lex.negators : lex.aspect_terms;
      set.insert(lowercase(trimmed));
      continue;
    }

    const auto tab = trimmed.find('\t');
    if (tab == std::string_view::npos) {
      lexicon_error(line_no, "expected token<TAB>weight");
    }
    const auto token = trim(trimmed.substr(0, tab));
    const auto weight_text = trim(trimmed.substr(tab + 1));
    if (token.empty()) {
      lexicon_error(line_no, "empty token");
    }
    double weight = 0.0;
    const auto* first = weight_text.data();
    const auto* last = first + weight_text.size();
    const auto [ptr, ec] = std::from_chars(first, last, weight);
    if (ec != std::errc() || ptr != last) {
      lexicon_error(line_no, "weight is not a decimal number");
    }
    if (weight < -1.0 || weight > 1.0) {
      lexicon_error(line_no, "weight outside [-1,1]");
    }
    lex.entries[lowercase(token)] = weight;
  }
  if (lex.entries.empty()) {
    throw Error(ErrorKind::InvalidArgument, "invalid_lexicon",
                "lexicon has no weighted entries");
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "io_error",
                "cannot open lexicon '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_lexicon(buf.str());
}

const Lexicon& default_lexicon() {
  static const Lexicon lex = parse_lexicon(default_lexicon_text());
  return lex;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(text[i])) {
      ++i;
    }
    const auto start = i;
    while (i < text.size() && is_word_byte(text[i])) {
      ++i;
    }
    if (i > start) {
      tokens.push_back(lowercase(text.substr(start, i - start)));
    }
  }
  return tokens;
}

SentimentReport sentiment_score(std::string_view text, const Lexicon& lexicon) {
  if (trim(text).empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty_text",
                "feedback text must not be empty");
  }
  SentimentReport report;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i < text.size() && !is_sentence_break(text[i])) {
      continue;
    }
    const auto sentence = text.substr(start, i - start);
    start = i + 1;
    const auto tokens = tokenize(sentence);
    if (!tokens.empty()) {
      report.sentences.push_back(score_sentence(sentence, tokens, lexicon));
    }
  }
  if (report.sentences.empty()) {
    throw Error(ErrorKind::InvalidArgument, "empty_text",
                "feedback text contains no words");
  }
  const double total = std::accumulate(
      report.sentences.begin(), report.sentences.end(), 0.0,
      [](double acc, const SentencePolarity& s) { return acc + s.polarity; });
  report.overall = total / static_cast<double>(report.sentences.size());
  return report;
}

FeedbackCategory classify_feedback(const SentimentReport& report) {
  std::set<std::string> positive_aspects;
  std::set<std::string> negative_aspects;
  bool any_positive = false;
  bool any_negative = false;
  for (const auto& s : report.sentences) {
    if (s.polarity > kPolarityDeadBand) {
      any_positive = true;
      positive_aspects.insert(s.aspect_tokens.begin(), s.aspect_tokens.end());
    } else if (s.polarity < -kPolarityDeadBand) {
      any_negative = true;
      negative_aspects.insert(s.aspect_tokens.begin(), s.aspect_tokens.end());
    }
  }
  const bool shared_aspect = std::any_of(
      positive_aspects.begin(), positive_aspects.end(),
      [&](const std::string& a) { return negative_aspects.count(a) != 0; });
  if (shared_aspect) {
    return FeedbackCategory::Contradictory;
  }
  if (any_positive && any_negative) {
    return FeedbackCategory::Mitigated;
  }
  if (any_positive) {
    return FeedbackCategory::Positive;
  }
  if (any_negative) {
    return FeedbackCategory::Negative;
  }
  // Neutral text makes no polar claim.
  return FeedbackCategory::Mitigated;
}

FeedbackCategory classify_feedback(std::string_view text,
                                   const Lexicon& lexicon) {
  return classify_feedback(sentiment_score(text, lexicon));
}

bool is_concordant(double appreciation, FeedbackCategory category) {
  check_appreciation(appreciation);
  switch (category) {
    case FeedbackCategory::Positive:
      return appreciation >= 3.5;
    case FeedbackCategory::Negative:
      return appreciation <= 2.5;
    case FeedbackCategory::Mitigated:
      return appreciation >= 2.0 && appreciation <= 4.0;
    case FeedbackCategory::Contradictory:
      return false;
  }
  return false;
}

bool test_concordance(double appreciation, std::string_view text,
                      const Lexicon& lexicon) {
  check_appreciation(appreciation);
  return is_concordant(appreciation, classify_feedback(text, lexicon));
}

}  // namespace trs
