/*
 * Copyright 2026 The oxmc Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "oxmc/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace oxmc::log {

namespace {

Level parse_level(const char* env) {
    if (env == nullptr) {
        return Level::warn;
    }
    const std::string_view v(env);
    if (v == "debug") return Level::debug;
    if (v == "info") return Level::info;
    if (v == "error") return Level::error;
    if (v == "off") return Level::off;
    return Level::warn;
}

std::atomic<int>& current() {
    static std::atomic<int> level{static_cast<int>(parse_level(std::getenv("OXMC_LOG")))};
    return level;
}

const char* tag(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warning";
        case Level::error: return "error";
        default: return "";
    }
}

}  // namespace

Level threshold() { return static_cast<Level>(current().load()); }

void set_threshold(Level level) { current().store(static_cast<int>(level)); }

void write(Level level, const std::string& message) {
    if (static_cast<int>(level) < current().load()) {
        return;
    }
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[oxmc " << tag(level) << "] " << message << '\n';
}

}  // namespace oxmc::log
