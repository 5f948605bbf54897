#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace censmax {

// Non-fatal notices (dropped ties, skipped thresholds, boundary estimates).
// The default sink writes "warning: ..." to stderr.
using WarningSink = std::function<void(std::string_view)>;

// Installs a new sink and returns the previous one.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

// Restores the previous sink on scope exit.
class ScopedWarningSink {
public:
    explicit ScopedWarningSink(WarningSink sink) : previous_(set_warning_sink(std::move(sink))) {}
    ~ScopedWarningSink() { set_warning_sink(std::move(previous_)); }
    ScopedWarningSink(const ScopedWarningSink&) = delete;
    ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

private:
    WarningSink previous_;
};

// Routes warnings raised on the calling thread to `sink` (nullptr: drop them)
// for the lifetime of the object. Other threads are unaffected.
class ThreadWarningSink {
public:
    explicit ThreadWarningSink(WarningSink sink);
    ~ThreadWarningSink();
    ThreadWarningSink(const ThreadWarningSink&) = delete;
    ThreadWarningSink& operator=(const ThreadWarningSink&) = delete;

private:
    WarningSink sink_;
    WarningSink* previous_;
};

}  // namespace censmax
