#pragma once

#include "coapcc/time.hpp"

#include <cstdint>
#include <functional>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace coapcc {

enum class EventKind : std::uint8_t { AppSend, MacAttempt, TxEnd, RtoExpiry, WarmupEnd, SimEnd };

std::string_view to_string(EventKind kind);

using EventId = std::uint64_t;

struct EventRecord {
    SimTime time = 0;
    EventId sequence = 0;
    EventKind kind = EventKind::SimEnd;
    NodeId node = 0;
    std::uint64_t subject = 0;
};

/// Discrete-event kernel. Events run in (time, sequence) order; sequence is
/// the scheduling order, so same-time events run first-scheduled-first.
class EventQueue {
public:
    using Action = std::function<void()>;
    using Observer = std::function<void(const EventRecord&)>;

    /// Throws std::logic_error if `at` lies in the past.
    EventId schedule(SimTime at, EventKind kind, NodeId node, std::uint64_t subject, Action action);
    EventId schedule_in(SimTime delay, EventKind kind, NodeId node, std::uint64_t subject,
                        Action action) {
        return schedule(now_ + delay, kind, node, subject, std::move(action));
    }

    /// Cancelling an already-executed or unknown id is a no-op.
    void cancel(EventId id);

    /// Runs the next live event. Returns false when nothing is left.
    bool step();

    /// Runs events with time <= end, or until stop() is called. Without a
    /// stop the clock ends at `end`.
    void run_until(SimTime end);
    void stop() { stopped_ = true; }

    SimTime now() const { return now_; }
    std::size_t pending() const { return live_.size(); }
    std::uint64_t executed() const { return executed_; }

    void set_observer(Observer observer) { observer_ = std::move(observer); }

private:
    struct Entry {
        EventRecord record;
        Action action;
    };
    static bool later(const Entry& a, const Entry& b) {
        if (a.record.time != b.record.time) return a.record.time > b.record.time;
        return a.record.sequence > b.record.sequence;
    }

    void drop_cancelled_front();

    std::vector<Entry> heap_;
    std::unordered_set<EventId> live_;
    std::unordered_set<EventId> cancelled_;
    SimTime now_ = 0;
    EventId next_sequence_ = 1;
    std::uint64_t executed_ = 0;
    bool stopped_ = false;
    Observer observer_;
};

} // namespace coapcc
