#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace endemic {

enum class Label { kFake, kGenuine, kUnlabelled };

std::string label_name(Label l);
Label label_from_name(const std::string& name);

using FeatureVector = std::vector<double>;

// Ordered feature names with a per-feature time-variance flag.
struct FeatureSchema {
  std::vector<std::string> names;
  std::vector<bool> time_variant;

  std::size_t size() const { return names.size(); }
  bool well_formed() const;
};

// Shipped defaults: exactly the features named for tweets and users.
FeatureSchema default_tweet_schema();
FeatureSchema default_user_schema();

struct Tweet {
  std::string id;
  std::string text;
  std::string user_id;
  std::int64_t created_at = 0;  // UTC seconds
  std::optional<std::string> retweet_of;
  FeatureVector tweet_features;
  Label label = Label::kUnlabelled;
};

struct UserProfile {
  std::string id;
  std::int64_t followers = 0;
  std::int64_t followees = 0;
  bool verified = false;
  std::int64_t tweet_count = 0;
  FeatureVector user_features;
};

enum class SplitKind { kTrain, kGeneralTest, kEarlyTest };

std::string split_kind_name(SplitKind k);
SplitKind split_kind_from_name(const std::string& name);

struct DatasetSplit {
  SplitKind kind = SplitKind::kTrain;
  std::vector<std::string> tweet_ids;
  std::vector<std::string> labelled_ids;  // subset of tweet_ids
};

struct ValidationIssue {
  enum class Kind {
    kDanglingUser,
    kDanglingRetweet,
    kSchemaMismatch,
    kEmptyId,
    kDuplicateId,
    kBadTimestamp,
    kSelfRetweet,
  };
  Kind kind;
  std::string id;       // offending tweet/user id
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool valid() const { return issues.empty(); }
};

std::string issue_kind_name(ValidationIssue::Kind k);

// Scans every reference and schema constraint; empty report means the corpus
// is usable by the downstream modules.
ValidationReport validate_corpus(const std::vector<Tweet>& tweets,
                                 const std::vector<UserProfile>& users,
                                 const FeatureSchema& tweet_schema,
                                 const FeatureSchema& user_schema);

// JSONL serialization. Loaders throw std::runtime_error carrying the 1-based
// line number on malformed input.
std::string tweet_to_json(const Tweet& t);
Tweet tweet_from_json(const std::string& line);
std::string user_to_json(const UserProfile& u);
UserProfile user_from_json(const std::string& line);

std::vector<Tweet> load_tweets_jsonl(const std::string& path);
std::vector<UserProfile> load_users_jsonl(const std::string& path);
void save_tweets_jsonl(const std::vector<Tweet>& tweets,
                       const std::string& path);

// splits.json: split kind -> {tweet_ids, labelled_ids}.
void save_splits_json(const std::vector<DatasetSplit>& splits,
                      const std::string& path);
std::vector<DatasetSplit> load_splits_json(const std::string& path);

// Optional schema override file:
//   {"tweet": {"names": [...], "time_variant": [...]}, "user": {...}}
struct SchemaPair {
  FeatureSchema tweet;
  FeatureSchema user;
};
SchemaPair load_schemas_json(const std::string& path);
void save_schemas_json(const SchemaPair& schemas, const std::string& path);

}  // namespace endemic
