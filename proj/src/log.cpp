#include "censmax/log.hpp"

#include <iostream>
#include <mutex>

namespace censmax {
namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

thread_local WarningSink* thread_sink = nullptr;

}  // namespace

ThreadWarningSink::ThreadWarningSink(WarningSink s) : sink_(std::move(s)), previous_(thread_sink) {
    thread_sink = &sink_;
}

ThreadWarningSink::~ThreadWarningSink() {
    thread_sink = previous_;
}

WarningSink set_warning_sink(WarningSink s) {
    std::lock_guard lock(sink_mutex());
    WarningSink old = std::move(sink());
    sink() = std::move(s);
    return old;
}

void warn(std::string_view message) {
    if (thread_sink) {
        if (*thread_sink) (*thread_sink)(message);
        return;
    }
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

}  // namespace censmax
