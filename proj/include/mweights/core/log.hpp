#pragma once

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string_view>

namespace mweights::log {

// Diagnostics go to stderr only when MWEIGHTS_LOG is set to a non-empty value.
inline bool enabled()
{
    static const bool on = [] {
        const char* v = std::getenv("MWEIGHTS_LOG");
        return v != nullptr && *v != '\0' && std::string_view(v) != "0";
    }();
    return on;
}

inline void info(std::string_view msg)
{
    if (!enabled())
        return;
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::clog << "[mweights] " << msg << '\n';
}

} // namespace mweights::log
