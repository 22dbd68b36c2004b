#pragma once

#include "values.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace df {

// Fixed reference time for one dialogue.
struct Clock {
  DateTime now;

  static Clock standard();  // 2023-01-01T08:00
};

// In-memory stand-in for the external calendar service.
class EventStore {
public:
  // JSON array of {id, subject, start, end, location}; ISO-8601 timestamps.
  static EventStore from_json(std::string_view text);
  static EventStore from_file(const std::string& path);
  std::string to_json() const;

  // Ordered by id.
  EventList find(const ConstraintSpec& spec) const;
  EventList all() const;
  const EventRecord* get(std::int64_t id) const;
  std::size_t size() const { return events_.size(); }
  std::int64_t next_id() const { return next_id_; }

  // Assigns the next id and returns the stored record.
  EventRecord insert(EventRecord event);
  // Throws EventVanished when the id is not in the store.
  void update(const EventRecord& event);
  EventRecord remove(std::int64_t id);

  // Count of insert/update/remove calls that changed the store.
  std::size_t mutation_count() const { return mutations_; }

  bool operator==(const EventStore& other) const { return events_ == other.events_; }

private:
  void add_fixture(EventRecord event);

  std::map<std::int64_t, EventRecord> events_;
  std::int64_t next_id_ = 1;
  std::size_t mutations_ = 0;
};

}  // namespace df
