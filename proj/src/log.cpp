#include "log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>
#include <string_view>

namespace pq::detail {

namespace {

spdlog::level::level_enum level_from_env() {
  const char* env = std::getenv("PQ_LOG");
  if (env == nullptr) return spdlog::level::warn;
  const std::string_view v(env);
  if (v == "error") return spdlog::level::err;
  if (v == "warn") return spdlog::level::warn;
  if (v == "info") return spdlog::level::info;
  if (v == "debug") return spdlog::level::debug;
  return spdlog::level::warn;
}

}  // namespace

spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_sink_mt>();
    auto l = std::make_shared<spdlog::logger>("pq", sink);
    l->set_level(level_from_env());
    l->set_pattern("[pq %l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace pq::detail
