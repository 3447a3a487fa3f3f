// Change records and their one-line JSON encoding.
//
// The journal is the store's only mutation path: live operations build change
// records, append them, then apply them; loading replays the same records.
// Records that belong to a multi-record transaction carry a `txn` field naming
// the session whose `session` record closes the transaction. Replay holds
// transaction records back until that closing record arrives.

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "domain.hpp"

namespace trs {

struct UserChange {
  UserRecord user;
  bool operator==(const UserChange&) const = default;
};

struct FeedbackChange {
  FeedbackRecord feedback;
  bool operator==(const FeedbackChange&) const = default;
};

struct VoteChange {
  std::string session_id;
  Vote vote;
  double trust_after = 0.0;
  bool operator==(const VoteChange&) const = default;
};

struct AggregateChange {
  ProductAggregate aggregate;
  bool operator==(const AggregateChange&) const = default;
};

struct SessionChange {
  ReviewSession session;
  bool operator==(const SessionChange&) const = default;
};

struct BlacklistChange {
  std::string user_id;
  Timestamp blacklist_until = 0;
  bool operator==(const BlacklistChange&) const = default;
};

using Change = std::variant<UserChange, FeedbackChange, VoteChange,
                            AggregateChange, SessionChange, BlacklistChange>;

struct ChangeRecord {
  Change change;
  std::optional<std::string> txn;

  /// True for the `session` record that closes its own transaction.
  bool closes_transaction() const;

  bool operator==(const ChangeRecord&) const = default;
};

std::string_view kind_of(const Change& change);

/// Compact JSON with sorted keys, no trailing newline.
std::string encode(const ChangeRecord& record);
/// Throws Error(CorruptJournal) on malformed input.
ChangeRecord decode(std::string_view line);

nlohmann::json to_json(const UserRecord& user);
nlohmann::json to_json(const FeedbackRecord& feedback);
nlohmann::json to_json(const ProductAggregate& aggregate);
nlohmann::json to_json(const Vote& vote);
nlohmann::json to_json(const ReviewSession& session);

UserRecord user_from_json(const nlohmann::json& j);
FeedbackRecord feedback_from_json(const nlohmann::json& j);
ProductAggregate aggregate_from_json(const nlohmann::json& j);
Vote vote_from_json(const nlohmann::json& j);
ReviewSession session_from_json(const nlohmann::json& j);

}  // namespace trs
