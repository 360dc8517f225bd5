#include "mnardre/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace mnardre {
namespace {

std::atomic<std::uint64_t> g_warnings{0};
std::atomic<std::uint64_t> g_phi_clamps{0};

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h = [](std::string_view msg) {
    std::cerr << "mnardre: warning: " << msg << '\n';
  };
  return h;
}

}  // namespace

void warn(std::string_view message) {
  g_warnings.fetch_add(1, std::memory_order_relaxed);
  std::lock_guard lock(handler_mutex());
  if (handler()) handler()(message);
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  WarningHandler old = std::move(handler());
  handler() = std::move(h);
  return old;
}

std::uint64_t warning_count() { return g_warnings.load(std::memory_order_relaxed); }

std::uint64_t phi_clamp_count() { return g_phi_clamps.load(std::memory_order_relaxed); }

void note_phi_clamp() { g_phi_clamps.fetch_add(1, std::memory_order_relaxed); }

}  // namespace mnardre
