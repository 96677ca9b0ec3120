#include "endemic/datamodel.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace endemic {

using nlohmann::json;

std::string label_name(Label l) {
  switch (l) {
    case Label::kFake: return "fake";
    case Label::kGenuine: return "genuine";
    case Label::kUnlabelled: return "unlabelled";
  }
  return "unlabelled";
}

Label label_from_name(const std::string& name) {
  if (name == "fake") return Label::kFake;
  if (name == "genuine") return Label::kGenuine;
  if (name == "unlabelled") return Label::kUnlabelled;
  throw std::runtime_error("unknown label: " + name);
}

bool FeatureSchema::well_formed() const {
  if (names.size() != time_variant.size()) return false;
  std::set<std::string> seen(names.begin(), names.end());
  return seen.size() == names.size();
}

FeatureSchema default_tweet_schema() {
  return FeatureSchema{
      {"favourites_count", "retweet_count", "domain_pagerank",
       "harmonic_sentiment"},
      {true, true, false, false}};
}

FeatureSchema default_user_schema() {
  return FeatureSchema{{"followers", "followees", "verified", "tweet_count"},
                       {true, true, false, true}};
}

std::string split_kind_name(SplitKind k) {
  switch (k) {
    case SplitKind::kTrain: return "train";
    case SplitKind::kGeneralTest: return "general_test";
    case SplitKind::kEarlyTest: return "early_test";
  }
  return "train";
}

SplitKind split_kind_from_name(const std::string& name) {
  if (name == "train") return SplitKind::kTrain;
  if (name == "general_test") return SplitKind::kGeneralTest;
  if (name == "early_test") return SplitKind::kEarlyTest;
  throw std::runtime_error("unknown split kind: " + name);
}

std::string issue_kind_name(ValidationIssue::Kind k) {
  using K = ValidationIssue::Kind;
  switch (k) {
    case K::kDanglingUser: return "dangling_user";
    case K::kDanglingRetweet: return "dangling_retweet";
    case K::kSchemaMismatch: return "schema_mismatch";
    case K::kEmptyId: return "empty_id";
    case K::kDuplicateId: return "duplicate_id";
    case K::kBadTimestamp: return "bad_timestamp";
    case K::kSelfRetweet: return "self_retweet";
  }
  return "unknown";
}

ValidationReport validate_corpus(const std::vector<Tweet>& tweets,
                                 const std::vector<UserProfile>& users,
                                 const FeatureSchema& tweet_schema,
                                 const FeatureSchema& user_schema) {
  ValidationReport report;
  auto add = [&](ValidationIssue::Kind k, const std::string& id,
                 const std::string& detail) {
    report.issues.push_back({k, id, detail});
  };

  std::unordered_set<std::string> user_ids, tweet_ids;
  for (const auto& u : users) {
    if (u.id.empty()) add(ValidationIssue::Kind::kEmptyId, u.id, "user id empty");
    if (!user_ids.insert(u.id).second)
      add(ValidationIssue::Kind::kDuplicateId, u.id, "duplicate user id");
    if (u.followers < 0 || u.followees < 0 || u.tweet_count < 0)
      add(ValidationIssue::Kind::kSchemaMismatch, u.id, "negative count");
    if (u.user_features.size() != user_schema.size())
      add(ValidationIssue::Kind::kSchemaMismatch, u.id,
          "user_features length " + std::to_string(u.user_features.size()) +
              " != schema " + std::to_string(user_schema.size()));
  }
  for (const auto& t : tweets) {
    if (t.id.empty()) add(ValidationIssue::Kind::kEmptyId, t.id, "tweet id empty");
    if (!tweet_ids.insert(t.id).second)
      add(ValidationIssue::Kind::kDuplicateId, t.id, "duplicate tweet id");
  }
  for (const auto& t : tweets) {
    if (t.created_at <= 0)
      add(ValidationIssue::Kind::kBadTimestamp, t.id,
          "created_at must be > 0");
    if (!user_ids.count(t.user_id))
      add(ValidationIssue::Kind::kDanglingUser, t.id,
          "unknown user_id " + t.user_id);
    if (t.retweet_of) {
      if (*t.retweet_of == t.id)
        add(ValidationIssue::Kind::kSelfRetweet, t.id, "retweet of itself");
      else if (!tweet_ids.count(*t.retweet_of))
        add(ValidationIssue::Kind::kDanglingRetweet, t.id,
            "unknown retweet_of " + *t.retweet_of);
    }
    if (t.tweet_features.size() != tweet_schema.size())
      add(ValidationIssue::Kind::kSchemaMismatch, t.id,
          "tweet_features length " + std::to_string(t.tweet_features.size()) +
              " != schema " + std::to_string(tweet_schema.size()));
  }
  return report;
}

std::string tweet_to_json(const Tweet& t) {
  json j;
  j["id"] = t.id;
  j["text"] = t.text;
  j["user_id"] = t.user_id;
  j["created_at"] = t.created_at;
  if (t.retweet_of) j["retweet_of"] = *t.retweet_of;
  j["tweet_features"] = t.tweet_features;
  j["label"] = label_name(t.label);
  return j.dump();
}

Tweet tweet_from_json(const std::string& line) {
  json j = json::parse(line);
  Tweet t;
  t.id = j.at("id").get<std::string>();
  t.text = j.at("text").get<std::string>();
  t.user_id = j.at("user_id").get<std::string>();
  t.created_at = j.at("created_at").get<std::int64_t>();
  if (j.contains("retweet_of") && !j["retweet_of"].is_null())
    t.retweet_of = j["retweet_of"].get<std::string>();
  if (j.contains("tweet_features"))
    t.tweet_features = j["tweet_features"].get<FeatureVector>();
  if (j.contains("label") && !j["label"].is_null())
    t.label = label_from_name(j["label"].get<std::string>());
  return t;
}

std::string user_to_json(const UserProfile& u) {
  json j;
  j["id"] = u.id;
  j["followers"] = u.followers;
  j["followees"] = u.followees;
  j["verified"] = u.verified;
  j["tweet_count"] = u.tweet_count;
  j["user_features"] = u.user_features;
  return j.dump();
}

UserProfile user_from_json(const std::string& line) {
  json j = json::parse(line);
  UserProfile u;
  u.id = j.at("id").get<std::string>();
  u.followers = j.at("followers").get<std::int64_t>();
  u.followees = j.at("followees").get<std::int64_t>();
  u.verified = j.at("verified").get<bool>();
  u.tweet_count = j.at("tweet_count").get<std::int64_t>();
  if (j.contains("user_features"))
    u.user_features = j["user_features"].get<FeatureVector>();
  return u;
}

namespace {

template <typename T, typename Fn>
std::vector<T> load_jsonl(const std::string& path, Fn parse) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": ingest error: " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<Tweet> load_tweets_jsonl(const std::string& path) {
  return load_jsonl<Tweet>(path, tweet_from_json);
}

std::vector<UserProfile> load_users_jsonl(const std::string& path) {
  return load_jsonl<UserProfile>(path, user_from_json);
}

void save_tweets_jsonl(const std::vector<Tweet>& tweets,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& t : tweets) out << tweet_to_json(t) << "\n";
}

void save_splits_json(const std::vector<DatasetSplit>& splits,
                      const std::string& path) {
  json j = json::object();
  for (const auto& s : splits) {
    json entry;
    entry["tweet_ids"] = s.tweet_ids;
    entry["labelled_ids"] = s.labelled_ids;
    j[split_kind_name(s.kind)] = entry;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

namespace {

json schema_to_json(const FeatureSchema& s) {
  json j;
  j["names"] = s.names;
  j["time_variant"] = s.time_variant;
  return j;
}

FeatureSchema schema_from_json(const json& j) {
  FeatureSchema s;
  s.names = j.at("names").get<std::vector<std::string>>();
  s.time_variant = j.at("time_variant").get<std::vector<bool>>();
  if (!s.well_formed())
    throw std::runtime_error(
        "feature schema malformed (duplicate names or length mismatch)");
  return s;
}

}  // namespace

SchemaPair load_schemas_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return {schema_from_json(j.at("tweet")), schema_from_json(j.at("user"))};
}

void save_schemas_json(const SchemaPair& schemas, const std::string& path) {
  json j;
  j["tweet"] = schema_to_json(schemas.tweet);
  j["user"] = schema_to_json(schemas.user);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

std::vector<DatasetSplit> load_splits_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  std::vector<DatasetSplit> splits;
  for (const auto& [key, entry] : j.items()) {
    DatasetSplit s;
    s.kind = split_kind_from_name(key);
    s.tweet_ids = entry.at("tweet_ids").get<std::vector<std::string>>();
    s.labelled_ids = entry.at("labelled_ids").get<std::vector<std::string>>();
    splits.push_back(std::move(s));
  }
  return splits;
}

}  // namespace endemic
