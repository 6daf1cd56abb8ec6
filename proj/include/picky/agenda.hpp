#ifndef PICKY_AGENDA_HPP
#define PICKY_AGENDA_HPP

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace picky {

struct AgendaItem {
  int edge_id;
  double priority;
  uint64_t seq;
};

// Best-first queue with deterministic FIFO tie-breaking and lazy deletion:
// items whose edge was superseded by an Improved chart entry are discarded on
// pop via the caller-supplied staleness predicate. Priority policy lives in
// the engine.
class Agenda {
 public:
  void push(int edge_id, double priority) {
    heap_.push(AgendaItem{edge_id, priority, next_seq_++});
  }

  template <class Stale>
  std::optional<AgendaItem> pop_best(Stale&& stale) {
    skip_stale(stale);
    if (heap_.empty()) return std::nullopt;
    AgendaItem item = heap_.top();
    heap_.pop();
    return item;
  }

  template <class Stale>
  std::optional<double> peek_max_priority(Stale&& stale) {
    skip_stale(stale);
    if (heap_.empty()) return std::nullopt;
    return heap_.top().priority;
  }

  bool empty() const { return heap_.empty(); }
  size_t size() const { return heap_.size(); }

 private:
  struct Lower {
    bool operator()(const AgendaItem& a, const AgendaItem& b) const {
      if (a.priority != b.priority) return a.priority < b.priority;
      return a.seq > b.seq;  // FIFO among equal priorities
    }
  };

  template <class Stale>
  void skip_stale(Stale&& stale) {
    while (!heap_.empty() && stale(heap_.top().edge_id)) heap_.pop();
  }

  std::priority_queue<AgendaItem, std::vector<AgendaItem>, Lower> heap_;
  uint64_t next_seq_ = 0;
};

}  // namespace picky

#endif
