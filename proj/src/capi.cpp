#include "endemic.h"

#include <new>
#include <string>

#include "endemic/config.hpp"
#include "endemic/pipeline.hpp"

struct endemic_session {
  endemic::ExperimentConfig config;
  std::string last_message;
  std::string last_manifest;
  std::string scratch;  // endemic_get return storage
};

extern "C" {

endemic_session* endemic_session_create(void) {
  return new (std::nothrow) endemic_session();
}

void endemic_session_destroy(endemic_session* s) { delete s; }

endemic_status endemic_load_config(endemic_session* s, const char* path) {
  if (!s || !path) return ENDEMIC_ERR_USAGE;
  try {
    s->config = endemic::ExperimentConfig::load(path);
    return ENDEMIC_OK;
  } catch (const endemic::UsageError& e) {
    s->last_message = e.what();
    return ENDEMIC_ERR_USAGE;
  } catch (const std::exception& e) {
    s->last_message = e.what();
    return ENDEMIC_ERR_RUNTIME;
  }
}

endemic_status endemic_set(endemic_session* s, const char* key,
                           const char* value) {
  if (!s || !key || !value) return ENDEMIC_ERR_USAGE;
  s->config.set_override(key, value);
  return ENDEMIC_OK;
}

const char* endemic_get(endemic_session* s, const char* key) {
  if (!s || !key || !s->config.has(key)) return nullptr;
  s->scratch = s->config.get_str(key);
  return s->scratch.c_str();
}

endemic_status endemic_run(endemic_session* s, const char* command) {
  if (!s || !command) return ENDEMIC_ERR_USAGE;
  const auto result = endemic::run_command(command, s->config);
  s->last_message = result.message;
  s->last_manifest = result.manifest_path;
  switch (result.exit_code) {
    case endemic::kExitOk: return ENDEMIC_OK;
    case endemic::kExitUsage: return ENDEMIC_ERR_USAGE;
    default: return ENDEMIC_ERR_RUNTIME;
  }
}

const char* endemic_last_message(const endemic_session* s) {
  return s ? s->last_message.c_str() : "";
}

const char* endemic_last_manifest(const endemic_session* s) {
  return s ? s->last_manifest.c_str() : "";
}

const char* endemic_version(void) { return "0.1.0"; }

}  // extern "C"
