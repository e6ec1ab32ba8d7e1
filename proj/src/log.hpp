#pragma once

#include <spdlog/logger.h>

namespace pq::detail {

/// Library logger writing to standard error. Level comes from PQ_LOG
/// (error, warn, info, debug); default is warn.
spdlog::logger& log();

}  // namespace pq::detail
