#include "gsamp/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace gsamp {
namespace {

std::mutex g_sink_mutex;
std::function<void(const std::string&)> g_sink;

} // namespace

void log_warning(const std::string& msg) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    if (g_sink) {
        g_sink(msg);
    } else {
        std::cerr << "[warning] " << msg << "\n";
    }
}

void set_warning_sink(std::function<void(const std::string&)> sink) {
    std::lock_guard<std::mutex> lock(g_sink_mutex);
    g_sink = std::move(sink);
}

} // namespace gsamp
