#include "endemic/config.hpp"

#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "endemic/pipeline.hpp"

using namespace endemic;

TEST_CASE("config file parsing with comments and overrides") {
  const std::string path = "cfg_test.cfg";
  {
    std::ofstream out(path);
    out << "# experiment\n"
        << "dims.K = 16\n"
        << "knowledge.epsilon = 0.75  # inline comment\n"
        << "paths.tweets = data/tweets.jsonl\n";
  }
  auto cfg = ExperimentConfig::load(path);
  CHECK(cfg.get_int("dims.K") == 16);
  CHECK(cfg.get_double("knowledge.epsilon") == doctest::Approx(0.75));
  CHECK(cfg.get_str("paths.tweets") == "data/tweets.jsonl");
  // defaults still visible
  CHECK(cfg.get_double("graph.teleport") == doctest::Approx(0.3));

  cfg.set_override("knowledge.epsilon", "0.9");
  CHECK(cfg.get_double("knowledge.epsilon") == doctest::Approx(0.9));
  REQUIRE(cfg.overrides().size() == 1);
  CHECK(cfg.overrides()[0].first == "knowledge.epsilon");
  std::filesystem::remove(path);
}

TEST_CASE("defaults carry the published dimensions and thresholds") {
  const auto cfg = ExperimentConfig::from_defaults();
  CHECK(cfg.get_int("dims.K") == 512);
  CHECK(cfg.get_int("dims.G") == 768);
  CHECK(cfg.get_int("dims.C") == 128);
  CHECK(cfg.get_int("dims.k") == 256);
  CHECK(cfg.get_int("dims.N") == 64);
  CHECK(cfg.get_int("dims.E") == 300);
  CHECK(cfg.get_double("knowledge.epsilon") == doctest::Approx(0.8));
  CHECK(cfg.get_double("graph.teleport") == doctest::Approx(0.3));
  CHECK(cfg.get_double("fusion.p_drop") == doctest::Approx(0.2));
  CHECK(cfg.get_double("splits.tau_label") == doctest::Approx(0.8));
  cfg.validate();
}

TEST_CASE("config hash is stable and override-sensitive") {
  auto a = ExperimentConfig::from_defaults();
  auto b = ExperimentConfig::from_defaults();
  CHECK(a.hash() == b.hash());
  b.set_override("dims.K", "64");
  CHECK(a.hash() != b.hash());
}

TEST_CASE("validation rejects out-of-range values as usage errors") {
  auto cfg = ExperimentConfig::from_defaults();
  cfg.set_override("dims.K", "7");  // odd
  CHECK_THROWS_AS(cfg.validate(), UsageError);

  auto cfg2 = ExperimentConfig::from_defaults();
  cfg2.set_override("knowledge.epsilon", "1.5");
  CHECK_THROWS_AS(cfg2.validate(), UsageError);

  auto cfg3 = ExperimentConfig::from_defaults();
  cfg3.set_override("fusion.p_drop", "1.0");
  CHECK_THROWS_AS(cfg3.validate(), UsageError);
}

TEST_CASE("missing input path surfaces as a usage error, exit code 2") {
  auto cfg = ExperimentConfig::from_defaults();
  cfg.set_override("paths.tweets", "definitely/not/here.jsonl");
  cfg.set_override("paths.users", "also/not/here.jsonl");
  cfg.set_override("paths.out_dir", "cfg_usage_out");
  const auto result = run_command("ingest", cfg);
  CHECK(result.exit_code == kExitUsage);
  CHECK(!std::filesystem::exists("cfg_usage_out/validation_report.json"));
  std::filesystem::remove_all("cfg_usage_out");
}

TEST_CASE("unknown command is a usage error") {
  const auto cfg = ExperimentConfig::from_defaults();
  const auto result = run_command("frobnicate", cfg);
  CHECK(result.exit_code == kExitUsage);
  CHECK(result.message.find("unknown command") != std::string::npos);
}

TEST_CASE("ENDEMIC_DATA_ROOT resolves relative paths") {
  namespace fs = std::filesystem;
  fs::create_directories("cfg_root_test/nested");
  {
    std::ofstream f("cfg_root_test/nested/file.jsonl");
    f << "{}\n";
  }
  auto cfg = ExperimentConfig::from_defaults();
  cfg.set_override("paths.tweets", "nested/file.jsonl");
  setenv("ENDEMIC_DATA_ROOT", "cfg_root_test", 1);
  CHECK(cfg.require_input_path("paths.tweets") ==
        "cfg_root_test/nested/file.jsonl");
  // absolute paths pass through untouched
  cfg.set_override("paths.tweets", "/etc/hostname");
  CHECK(cfg.get_path("paths.tweets") == "/etc/hostname");
  unsetenv("ENDEMIC_DATA_ROOT");
  CHECK(cfg.get_path("paths.tweets") == "/etc/hostname");
  cfg.set_override("paths.tweets", "nested/file.jsonl");
  CHECK(cfg.get_path("paths.tweets") == "nested/file.jsonl");
  fs::remove_all("cfg_root_test");
}

TEST_CASE("a failing command removes its partial artifacts") {
  namespace fs = std::filesystem;
  const std::string dir = "cfg_partial_data";
  const std::string out = "cfg_partial_out";
  fs::remove_all(dir);
  fs::remove_all(out);
  fs::create_directories(dir);
  {
    std::ofstream tw(dir + "/tweets.jsonl");
    tw << R"({"id":"t1","text":"hello covid","user_id":"u1","created_at":100,)"
       << R"("tweet_features":[1,2,0.5,0.1],"label":"fake"})" << "\n";
    std::ofstream us(dir + "/users.jsonl");
    us << R"({"id":"u1","followers":5,"followees":3,"verified":false,)"
       << R"("tweet_count":7,"user_features":[5,3,0,7]})" << "\n";
    std::ofstream sp(dir + "/splits.json");
    sp << R"({"train":{"tweet_ids":["t1"],"labelled_ids":["t1"]}})" << "\n";
  }
  auto cfg = ExperimentConfig::from_defaults();
  cfg.set_override("paths.tweets", dir + "/tweets.jsonl");
  cfg.set_override("paths.users", dir + "/users.jsonl");
  cfg.set_override("paths.splits", dir + "/splits.json");
  cfg.set_override("paths.out_dir", out);
  // no graph embeddings exist: train writes vocab.txt first, then fails
  const auto result = run_command("train", cfg);
  CHECK(result.exit_code == kExitUsage);
  CHECK_FALSE(fs::exists(out + "/vocab.txt"));
  CHECK_FALSE(fs::exists(out + "/train.manifest.json"));
  fs::remove_all(dir);
  fs::remove_all(out);
}
