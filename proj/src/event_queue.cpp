#include "coapcc/event_queue.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace coapcc {

std::string_view to_string(EventKind kind) {
    switch (kind) {
    case EventKind::AppSend: return "app_send";
    case EventKind::MacAttempt: return "mac_attempt";
    case EventKind::TxEnd: return "tx_end";
    case EventKind::RtoExpiry: return "rto_expiry";
    case EventKind::WarmupEnd: return "warmup_end";
    case EventKind::SimEnd: return "sim_end";
    }
    return "?";
}

EventId EventQueue::schedule(SimTime at, EventKind kind, NodeId node, std::uint64_t subject,
                             Action action) {
    if (at < now_) {
        throw std::logic_error("event '" + std::string(to_string(kind)) + "' scheduled at " +
                               std::to_string(at) + " ns, before current time " +
                               std::to_string(now_) + " ns");
    }
    const EventId id = next_sequence_++;
    live_.insert(id);
    heap_.push_back(Entry{EventRecord{at, id, kind, node, subject}, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), later);
    return id;
}

void EventQueue::cancel(EventId id) {
    if (live_.erase(id) > 0) cancelled_.insert(id);
}

void EventQueue::drop_cancelled_front() {
    while (!heap_.empty()) {
        auto it = cancelled_.find(heap_.front().record.sequence);
        if (it == cancelled_.end()) return;
        cancelled_.erase(it);
        std::pop_heap(heap_.begin(), heap_.end(), later);
        heap_.pop_back();
    }
}

bool EventQueue::step() {
    drop_cancelled_front();
    if (!heap_.empty()) {
        std::pop_heap(heap_.begin(), heap_.end(), later);
        Entry entry = std::move(heap_.back());
        heap_.pop_back();
        live_.erase(entry.record.sequence);
        if (entry.record.time < now_) throw std::logic_error("event queue clock ran backwards");
        now_ = entry.record.time;
        ++executed_;
        if (observer_) observer_(entry.record);
        if (entry.action) entry.action();
        return true;
    }
    return false;
}

void EventQueue::run_until(SimTime end) {
    stopped_ = false;
    while (!stopped_) {
        drop_cancelled_front();
        if (heap_.empty() || heap_.front().record.time > end) {
            now_ = std::max(now_, end);
            break;
        }
        step();
    }
}

} // namespace coapcc
