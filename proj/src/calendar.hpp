#pragma once

#include "store.hpp"
#include "values.hpp"

#include <optional>
#include <string_view>

namespace df {

class FunctionRegistry;

enum class Meridiem { None, AM, PM, H24 };

// A date/time with any component possibly missing.
struct PartialDateTime {
  std::optional<Date> date;
  std::optional<int> hour;
  std::optional<int> minute;
  Meridiem meridiem = Meridiem::None;

  bool operator==(const PartialDateTime&) const = default;
};

// Missing date -> clock date; missing time -> 00:00. An hour without
// meridiem reads 8-11 as AM, 1-7 as PM, 12 as noon; 0 and 13-23 as given.
// Throws EmptySpec when nothing is present, DomainError on bad ranges.
DateTime fill_defaults(const PartialDateTime& partial, const Clock& clock);
PartialDateTime to_partial(const DateTime& dt);

// 12-hour clock readings; hour in 1-12, minute in 0-59, else DomainError.
Time am_time(std::int64_t hour, std::int64_t minute = 0);
Time pm_time(std::int64_t hour, std::int64_t minute = 0);

// First date strictly after `from` falling on the named weekday.
Date next_weekday(const Date& from, std::string_view day_name);

// Next occurrence of `time` strictly after `dt`.
DateTime time_after(const DateTime& dt, const Time& time);

// Event with the constraint's changes applied. Changing start without end
// keeps the duration. Throws InvalidUpdate.
EventRecord apply_update(const EventRecord& event, const ConstraintSpec& changes);

// Proposed event for a creation request; end defaults to start + 30 minutes.
EventRecord event_from_spec(const ConstraintSpec& spec, const Clock& clock);

void register_core(FunctionRegistry& registry);
void register_calendar(FunctionRegistry& registry);

}  // namespace df
