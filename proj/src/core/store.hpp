// The knowledge base: users, feedbacks grouped by product and category,
// product aggregates, review sessions and the blacklist.
//
// Every mutation is a batch of change records that is first validated against
// the current state, then appended to the journal, then applied. Loading a
// journal applies the same records, so a reloaded store equals the live one.
//
// Not synchronised: callers serialise writers (see Engine).

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "domain.hpp"
#include "journal.hpp"

namespace trs {

struct Selection {
  std::vector<FeedbackRecord> feedbacks;
  /// Fewer feedbacks were available than requested.
  bool thin = false;
};

class Store {
 public:
  /// Empty store whose journal is kept in memory (see journal_text()).
  Store();

  Store(Store&&) noexcept;
  Store& operator=(Store&&) noexcept;
  ~Store();

  /// Replays `path` (absent means empty) and appends future changes to it.
  static Store open(const std::filesystem::path& path);
  /// Replays journal text into an in-memory store. The replayed lines become
  /// the new store's in-memory journal.
  static Store replay(std::string_view journal);

  // -- registration -------------------------------------------------------

  const UserRecord& create_user(const std::string& user_id, Timestamp now);
  /// Persists a feedback; the product is created implicitly.
  std::string store_feedback(const FeedbackRecord& record);

  // -- blacklist ----------------------------------------------------------

  UserRecord blacklist_user(const std::string& user_id, Timestamp now,
                            std::int64_t ttl_seconds);
  /// Half-open window: true iff now < blacklist_until.
  bool is_blacklisted(const std::string& user_id, Timestamp now) const;

  // -- selection ----------------------------------------------------------

  /// Round-robin over Positive, Negative, Mitigated, Contradictory; newest
  /// first within a category, ties by feedback id. `requester`'s own
  /// feedbacks are never served.
  Selection select_prefabricated(const std::string& product_id, int k,
                                 std::string_view requester = {}) const;

  // -- lookups ------------------------------------------------------------

  const UserRecord* find_user(std::string_view user_id) const;
  const FeedbackRecord* find_feedback(std::string_view feedback_id) const;
  const ReviewSession* find_session(std::string_view session_id) const;
  const UserRecord& user(std::string_view user_id) const;
  const FeedbackRecord& feedback(std::string_view feedback_id) const;
  const ReviewSession& session(std::string_view session_id) const;
  /// Empty (unrated) aggregate for unknown products.
  ProductAggregate aggregate(std::string_view product_id) const;

  /// Newest first; all categories when `category` is empty.
  std::vector<FeedbackRecord> feedbacks_for(
      std::string_view product_id,
      std::optional<FeedbackCategory> category = std::nullopt) const;
  std::vector<FeedbackRecord> feedbacks_by_author(
      std::string_view author_id) const;

  const std::map<std::string, UserRecord, std::less<>>& users() const {
    return users_;
  }
  const std::map<std::string, FeedbackRecord, std::less<>>& feedbacks() const {
    return feedbacks_;
  }
  const std::map<std::string, ProductAggregate, std::less<>>& aggregates()
      const {
    return aggregates_;
  }
  const std::map<std::string, ReviewSession, std::less<>>& sessions() const {
    return sessions_;
  }

  // -- mutation -----------------------------------------------------------

  /// Validates, journals and applies `changes`. With a `txn`, the last change
  /// must be the session record named by it; replay then treats the batch as
  /// all-or-nothing.
  void commit(std::vector<Change> changes,
              std::optional<std::string> txn = std::nullopt);

  /// In-memory journal contents; empty for file-backed stores.
  const std::string& journal_text() const { return memory_journal_; }
  std::size_t journal_lines() const { return journal_lines_; }

  /// Compares the domain maps only; journals are ignored.
  bool operator==(const Store& other) const;

 private:
  struct IndexKey {
    Timestamp created_at;
    std::string feedback_id;
    bool operator<(const IndexKey& o) const {
      if (created_at != o.created_at) {
        return created_at > o.created_at;
      }
      return feedback_id < o.feedback_id;
    }
  };
  using CategoryIndex = std::array<std::set<IndexKey>, 4>;

  void precheck(const Change& change) const;
  void apply(const Change& change);
  void apply_record(const ChangeRecord& record);
  void write_line(const std::string& line);
  void index_feedback(const FeedbackRecord& record);
  void unindex_feedback(const FeedbackRecord& record);

  std::map<std::string, UserRecord, std::less<>> users_;
  std::map<std::string, FeedbackRecord, std::less<>> feedbacks_;
  std::map<std::string, ProductAggregate, std::less<>> aggregates_;
  std::map<std::string, ReviewSession, std::less<>> sessions_;

  std::map<std::string, CategoryIndex, std::less<>> by_product_;
  std::map<std::string, std::set<std::string>, std::less<>> by_author_;

  std::unique_ptr<std::ofstream> file_;
  std::string memory_journal_;
  std::size_t journal_lines_ = 0;
};

}  // namespace trs
