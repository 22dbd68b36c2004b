#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace df {

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  auto operator<=>(const Date&) const = default;

  static std::optional<Date> make(int y, unsigned m, unsigned d);
  Date plus_days(int n) const;
  // 0 = Sunday ... 6 = Saturday
  unsigned weekday() const;
};

// Minute-resolution time of day, 00:00 through 23:59.
struct Time {
  int minutes = 0;

  auto operator<=>(const Time&) const = default;

  static std::optional<Time> make(int hour, int minute);
  int hour() const { return minutes / 60; }
  int minute() const { return minutes % 60; }
};

struct DateTime {
  Date date;
  Time time;

  auto operator<=>(const DateTime&) const = default;

  DateTime plus_minutes(int n) const;
};

struct EventRecord {
  std::int64_t id = 0;
  std::string subject;
  DateTime start;
  DateTime end;
  std::optional<std::string> location;

  bool operator==(const EventRecord&) const = default;
};

using EventList = std::vector<EventRecord>;

struct ConstraintSpec;

// Shared immutable constraint, compared by contents.
struct SpecRef {
  std::shared_ptr<const ConstraintSpec> ptr;

  const ConstraintSpec& operator*() const { return *ptr; }
  const ConstraintSpec* operator->() const { return ptr.get(); }
  bool operator==(const SpecRef& other) const;
};

using Value = std::variant<std::int64_t, double, std::string, bool, Date, Time, DateTime,
                           EventRecord, EventList, SpecRef>;

struct ConstraintSpec {
  std::string type_name;
  std::optional<std::string> type_param;
  std::vector<std::pair<std::string, Value>> fields;  // names unique

  bool operator==(const ConstraintSpec&) const = default;

  // The type of node the constraint selects: the parameter of Constraint[T], else the name.
  const std::string& target_type() const { return type_param ? *type_param : type_name; }
  const Value* field(std::string_view name) const;
  void set_field(std::string name, Value v);
};

SpecRef make_spec(ConstraintSpec spec);

std::string type_name(const Value& v);
std::string render(const Value& v);
std::string render_event(const EventRecord& e);
std::string render_spec(const ConstraintSpec& spec);

std::string format_date(const Date& d);
std::string format_time(const Time& t);
std::string format_iso(const DateTime& dt);  // 2023-01-02T10:00
std::optional<Date> parse_iso_date(std::string_view s);
// Accepts YYYY-MM-DDTHH:MM with optional :SS (seconds dropped) or a space separator.
std::optional<DateTime> parse_iso_datetime(std::string_view s);

bool is_temporal(const Value& v);

// Temporal values combined as partial date/time patterns: Date + Time -> DateTime.
// Returns nullopt when both carry the same component with different values.
std::optional<Value> merge_temporal(const Value& a, const Value& b);

// Pattern matching of one field value. Date and Time patterns match the
// corresponding component of a DateTime; nested specs match events.
bool value_matches(const Value& pattern, const Value& actual);

// Event constraint semantics: start/end temporal, subject case-insensitive
// substring, location case-insensitive equality, id equality.
bool event_matches(const ConstraintSpec& spec, const EventRecord& event);

// Conjunction of two constraints of the same target type.
// Throws Error(Domain) on conflicting fields.
ConstraintSpec conjoin(const ConstraintSpec& a, const ConstraintSpec& b);

std::string lower(std::string_view s);

}  // namespace df
