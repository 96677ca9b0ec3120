// Exercises the full pipeline through the extern-C surface, the way an
// embedding application (or the CLI) drives it.
#include "endemic.h"

#include <cassert>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "endemic/pipeline.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;

static int failures = 0;

#define EXPECT(cond)                                                     \
  do {                                                                   \
    if (!(cond)) {                                                       \
      std::fprintf(stderr, "FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                        \
    }                                                                    \
  } while (0)

static void set_small_dims(endemic_session* s) {
  endemic_set(s, "dims.K", "12");
  endemic_set(s, "dims.G", "6");
  endemic_set(s, "dims.C", "4");
  endemic_set(s, "dims.k", "4");
  endemic_set(s, "dims.N", "10");
  endemic_set(s, "dims.E", "6");
  endemic_set(s, "graph.epochs", "3");
  endemic_set(s, "graph.walks_per_node", "3");
  endemic_set(s, "train.epochs", "2");
  endemic_set(s, "train.batch_size", "8");
}

int main() {
  const std::string dir = "capi_test_data";
  const std::string out = "capi_test_out";
  fs::remove_all(dir);
  fs::remove_all(out);

  endemic::testing::SyntheticSpec spec;
  spec.n_tweets = 36;
  spec.n_users = 10;
  spec.n_topics = 4;
  spec.n_small_clusters = 2;
  spec.seed = 7;
  endemic::testing::make_synthetic(spec).write(dir);

  EXPECT(std::strcmp(endemic_version(), "") != 0);

  endemic_session* s = endemic_session_create();
  EXPECT(s != nullptr);
  set_small_dims(s);
  endemic_set(s, "paths.tweets", (dir + "/tweets.jsonl").c_str());
  endemic_set(s, "paths.users", (dir + "/users.jsonl").c_str());
  endemic_set(s, "paths.follow_edges", (dir + "/follow_edges.tsv").c_str());
  endemic_set(s, "paths.evidence_store",
              (dir + "/evidence_store.jsonl").c_str());
  endemic_set(s, "paths.claims", (dir + "/claims.jsonl").c_str());
  endemic_set(s, "paths.out_dir", out.c_str());
  endemic_set(s, "paths.splits", (out + "/splits.json").c_str());

  // config value readback
  const char* k = endemic_get(s, "dims.K");
  EXPECT(k && std::strcmp(k, "12") == 0);
  EXPECT(endemic_get(s, "no.such.key") == nullptr);

  // unknown command -> usage error
  EXPECT(endemic_run(s, "explode") == ENDEMIC_ERR_USAGE);

  // full pipeline
  EXPECT(endemic_run(s, "ingest") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/validation_report.json"));
  EXPECT(fs::exists(out + "/ingest.manifest.json"));

  EXPECT(endemic_run(s, "weak-label") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/labels.jsonl"));

  EXPECT(endemic_run(s, "make-splits") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/splits.json"));

  EXPECT(endemic_run(s, "build-graph") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/edges.tsv"));

  EXPECT(endemic_run(s, "embed-graph") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/embeddings.bin"));
  EXPECT(fs::exists(out + "/embeddings.ids"));
  EXPECT(fs::exists(out + "/sage.bin"));

  EXPECT(endemic_run(s, "fetch-evidence") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/evidence_sets.jsonl"));

  EXPECT(endemic_run(s, "train") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/vocab.txt"));
  EXPECT(fs::exists(out + "/training_log.csv"));
  EXPECT(fs::exists(out + "/checkpoints/final.ckpt"));
  EXPECT(fs::exists(out + "/train.manifest.json"));

  EXPECT(endemic_run(s, "eval") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/metrics_general_test_plain.json"));

  endemic_set(s, "eval.split", "early_test");
  endemic_set(s, "eval.mask_detect", "true");
  EXPECT(endemic_run(s, "eval") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/metrics_early_test_mask_detect.json"));

  EXPECT(endemic_run(s, "report") == ENDEMIC_OK);
  EXPECT(fs::exists(out + "/report.csv"));
  EXPECT(fs::exists(out + "/report.txt"));

  // overrides are recorded in the manifest and win over file config
  {
    std::ifstream in(out + "/train.manifest.json");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    EXPECT(text.find("\"dims.K\"") != std::string::npos);
    EXPECT(text.find("config_hash") != std::string::npos);
    EXPECT(text.find("artifacts") != std::string::npos);
  }

  // raising the evidence threshold shrinks (or keeps) the selected sets and
  // the override lands in the manifest
  {
    auto selected_count = [](const std::string& path) {
      std::ifstream in(path);
      std::string line;
      std::size_t count = 0;
      while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        count += j.at("selected").size();
      }
      return count;
    };
    const std::size_t base_count =
        selected_count(out + "/evidence_sets.jsonl");

    endemic_session* strict = endemic_session_create();
    set_small_dims(strict);
    endemic_set(strict, "paths.tweets", (dir + "/tweets.jsonl").c_str());
    endemic_set(strict, "paths.users", (dir + "/users.jsonl").c_str());
    endemic_set(strict, "paths.evidence_store",
                (dir + "/evidence_store.jsonl").c_str());
    endemic_set(strict, "paths.out_dir", "capi_test_out_eps");
    endemic_set(strict, "knowledge.epsilon", "0.9");
    EXPECT(endemic_run(strict, "fetch-evidence") == ENDEMIC_OK);
    const std::size_t strict_count =
        selected_count("capi_test_out_eps/evidence_sets.jsonl");
    EXPECT(strict_count <= base_count);

    std::ifstream mf("capi_test_out_eps/fetch-evidence.manifest.json");
    const std::string mtext((std::istreambuf_iterator<char>(mf)),
                            std::istreambuf_iterator<char>());
    EXPECT(mtext.find("knowledge.epsilon") != std::string::npos);
    EXPECT(mtext.find("0.9") != std::string::npos);
    endemic_session_destroy(strict);
    fs::remove_all("capi_test_out_eps");
  }

  // runtime failure path: evidence store points at a file that is not there
  endemic_session* bad = endemic_session_create();
  set_small_dims(bad);
  endemic_set(bad, "paths.tweets", (dir + "/tweets.jsonl").c_str());
  endemic_set(bad, "paths.users", (dir + "/users.jsonl").c_str());
  endemic_set(bad, "paths.evidence_store", "missing_store.jsonl");
  endemic_set(bad, "paths.out_dir", "capi_test_out_bad");
  EXPECT(endemic_run(bad, "fetch-evidence") == ENDEMIC_ERR_USAGE);
  EXPECT(std::strlen(endemic_last_message(bad)) > 0);
  EXPECT(!fs::exists("capi_test_out_bad/evidence_sets.jsonl"));
  endemic_session_destroy(bad);

  endemic_session_destroy(s);
  fs::remove_all(dir);
  fs::remove_all(out);
  fs::remove_all("capi_test_out_bad");

  if (failures == 0) std::printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
