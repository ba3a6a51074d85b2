#pragma once

<thread>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "radjudge/corrections.hpp"
#include "radjudge/csv.hpp"
#include "radjudge/dataset.hpp"
#include "radjudge/gateway.hpp"
#include "radjudge/metrics.hpp"
#include "radjudge/parser.hpp"
#include "radjudge/prompting.hpp"
#include "radjudge/report.hpp"
#include "radjudge/rng.hpp"
#include "radjudge/stats.hpp"

namespace radjudge {

struct RunOptions {
  MessageMode message_mode = MessageMode::SingleUser;
  std::uint64_t seed = 0;
  int parallelism = 0;  // 0 picks the hardware concurrency
};

}  // namespace radjudge
