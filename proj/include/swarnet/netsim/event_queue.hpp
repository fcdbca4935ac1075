#pragma once

#include <cstdint>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace swarnet::sim {

using SimTime = std::int64_t;  // microseconds

class PastEventError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Min-queue ordered by (time, insertion order).
template <typename Payload>
class EventQueue {
 public:
  struct Entry {
    SimTime time;
    std::uint64_t seq;
    Payload payload;
  };

  [[nodiscard]] SimTime now() const { return now_; }
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  [[nodiscard]] SimTime next_time() const { return heap_.top().time; }

  void schedule(SimTime at, Payload payload) {
    if (at < now_) throw PastEventError("event scheduled in the past");
    heap_.push(Entry{at, next_seq_++, std::move(payload)});
  }

  // Pops the earliest event and advances the clock to it.
  Entry pop() {
    Entry e = std::move(const_cast<Entry&>(heap_.top()));
    heap_.pop();
    now_ = e.time;
    return e;
  }

  void advance_to(SimTime t) {
    if (t < now_) throw PastEventError("clock cannot move backwards");
    now_ = t;
  }

 private:
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  SimTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
};

}  // namespace swarnet::sim
