// Command-line front end; talks to the core library through the C API only.
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "endemic.h"

namespace {

void print_usage(const char* prog) {
  std::fprintf(stderr,
               "Usage: %s <command> [options]\n"
               "\n"
               "Commands:\n"
               "  ingest          validate tweets.jsonl / users.jsonl\n"
               "  weak-label      label tweets against verified claims\n"
               "  make-splits     build train / general-test / early-test\n"
               "  build-graph     construct the user-tweet graph\n"
               "  embed-graph     train unsupervised node embeddings\n"
               "  fetch-evidence  select external-knowledge sentences\n"
               "  train           train the classifier\n"
               "  eval            evaluate a checkpoint on a split\n"
               "  report          render metric tables and plots\n"
               "\n"
               "Options:\n"
               "  --config PATH          config file (flat dotted keys)\n"
               "  --set KEY=VALUE        override a config key (repeatable)\n"
               "  --out DIR              output directory (paths.out_dir)\n"
               "  --claims PATH          verified claims (weak-label)\n"
               "  --tau X                weak-label threshold\n"
               "  --max-cluster-size N   early-test cluster cap (make-splits)\n"
               "  --max-age SECONDS      early-test age cap (make-splits)\n"
               "  --store PATH           evidence store (fetch-evidence)\n"
               "  --mode M               train_time | test_time\n"
               "  --epsilon X            evidence similarity threshold\n"
               "  --layers N             graph embedding layers\n"
               "  --teleport X           walk teleport probability\n"
               "  --split NAME           eval split (train|general_test|early_test)\n"
               "  --mask-detect          mask time-variant features at eval\n"
               "  --compare A B          compare two metrics files (report)\n"
               "  --version              print version\n",
               prog);
}

struct FlagMapping {
  const char* flag;
  const char* key;
  bool has_value;
};

constexpr FlagMapping kFlags[] = {
    {"--out", "paths.out_dir", true},
    {"--claims", "paths.claims", true},
    {"--tau", "splits.tau_label", true},
    {"--max-cluster-size", "splits.max_cluster_size", true},
    {"--max-age", "splits.max_age_seconds", true},
    {"--store", "paths.evidence_store", true},
    {"--mode", "knowledge.mode", true},
    {"--epsilon", "knowledge.epsilon", true},
    {"--layers", "graph.layers", true},
    {"--teleport", "graph.teleport", true},
    {"--split", "eval.split", true},
    {"--mask-detect", "eval.mask_detect", false},
};

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(argv[0]);
    return 2;
  }
  if (std::strcmp(argv[1], "--version") == 0) {
    std::printf("endemic %s\n", endemic_version());
    return 0;
  }
  if (std::strcmp(argv[1], "--help") == 0 ||
      std::strcmp(argv[1], "-h") == 0) {
    print_usage(argv[0]);
    return 0;
  }
  const std::string command = argv[1];

  endemic_session* session = endemic_session_create();
  if (!session) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }

  int rc = 0;
  for (int i = 2; i < argc && rc == 0; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config") {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: --config needs a path\n");
        rc = 2;
        break;
      }
      if (endemic_load_config(session, argv[++i]) != ENDEMIC_OK) {
        std::fprintf(stderr, "error: %s\n", endemic_last_message(session));
        rc = 2;
      }
    } else if (arg == "--set") {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: --set needs KEY=VALUE\n");
        rc = 2;
        break;
      }
      const std::string kv = argv[++i];
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::fprintf(stderr, "error: --set needs KEY=VALUE, got '%s'\n",
                     kv.c_str());
        rc = 2;
        break;
      }
      endemic_set(session, kv.substr(0, eq).c_str(),
                  kv.substr(eq + 1).c_str());
    } else if (arg == "--compare") {
      if (i + 2 >= argc) {
        std::fprintf(stderr, "error: --compare needs two metrics files\n");
        rc = 2;
        break;
      }
      endemic_set(session, "report.compare_a", argv[++i]);
      endemic_set(session, "report.compare_b", argv[++i]);
    } else {
      bool matched = false;
      for (const auto& f : kFlags) {
        if (arg != f.flag) continue;
        matched = true;
        if (f.has_value) {
          if (i + 1 >= argc) {
            std::fprintf(stderr, "error: %s needs a value\n", f.flag);
            rc = 2;
          } else {
            endemic_set(session, f.key, argv[++i]);
          }
        } else {
          endemic_set(session, f.key, "true");
        }
        break;
      }
      if (!matched) {
        std::fprintf(stderr, "error: unknown option '%s'\n", arg.c_str());
        print_usage(argv[0]);
        rc = 2;
      }
    }
  }

  if (rc == 0) {
    const endemic_status status = endemic_run(session, command.c_str());
    const char* msg = endemic_last_message(session);
    if (status == ENDEMIC_OK) {
      std::printf("%s\n", msg);
      const char* manifest = endemic_last_manifest(session);
      if (manifest && *manifest) std::printf("manifest: %s\n", manifest);
    } else {
      std::fprintf(stderr, "error: %s\n", msg);
    }
    rc = static_cast<int>(status);
  }

  endemic_session_destroy(session);
  return rc;
}
