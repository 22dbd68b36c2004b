#include "calendar.hpp"

#include "engine.hpp"

#include <array>

namespace df {

DateTime fill_defaults(const PartialDateTime& p, const Clock& clock) {
  if (!p.date && !p.hour && !p.minute) throw Error(ErrorCode::EmptySpec, "empty date/time");
  const Date date = p.date.value_or(clock.now.date);
  int hour = p.hour.value_or(0);
  const int minute = p.minute.value_or(0);
  if (p.hour) {
    switch (p.meridiem) {
      case Meridiem::AM:
        if (hour < 1 || hour > 12) throw Error(ErrorCode::Domain, "hour out of range");
        if (hour == 12) hour = 0;
        break;
      case Meridiem::PM:
        if (hour < 1 || hour > 12) throw Error(ErrorCode::Domain, "hour out of range");
        if (hour < 12) hour += 12;
        break;
      case Meridiem::None:
        if (hour >= 1 && hour <= 7) hour += 12;
        break;
      case Meridiem::H24: break;
    }
  }
  auto t = Time::make(hour, minute);
  if (!t) throw Error(ErrorCode::Domain, "time out of range");
  return DateTime{date, *t};
}

PartialDateTime to_partial(const DateTime& dt) {
  return PartialDateTime{dt.date, dt.time.hour(), dt.time.minute(), Meridiem::H24};
}

namespace {

Time twelve_hour(std::int64_t hour, std::int64_t minute, bool pm) {
  if (hour < 1 || hour > 12) throw Error(ErrorCode::Domain, "hour must be 1-12");
  if (minute < 0 || minute > 59) throw Error(ErrorCode::Domain, "minute must be 0-59");
  int h = int(hour) % 12;
  if (pm) h += 12;
  return Time{h * 60 + int(minute)};
}

}  // namespace

Time am_time(std::int64_t hour, std::int64_t minute) { return twelve_hour(hour, minute, false); }
Time pm_time(std::int64_t hour, std::int64_t minute) { return twelve_hour(hour, minute, true); }

Date next_weekday(const Date& from, std::string_view day_name) {
  static const std::array<const char*, 7> names = {"sunday",   "monday", "tuesday", "wednesday",
                                                   "thursday", "friday", "saturday"};
  const std::string key = lower(day_name);
  for (unsigned i = 0; i < names.size(); ++i) {
    if (key != names[i]) continue;
    int delta = int((i + 7 - from.weekday()) % 7);
    if (delta == 0) delta = 7;
    return from.plus_days(delta);
  }
  throw Error(ErrorCode::Domain, "unknown day name '" + std::string(day_name) + "'");
}

DateTime time_after(const DateTime& dt, const Time& time) {
  if (time > dt.time) return DateTime{dt.date, time};
  return DateTime{dt.date.plus_days(1), time};
}

namespace {

const std::string* str_field(const ConstraintSpec& spec, std::string_view name) {
  const Value* v = spec.field(name);
  if (!v) return nullptr;
  const auto* s = std::get_if<std::string>(v);
  if (!s) throw Error(ErrorCode::Type, "field '" + std::string(name) + "' must be Str");
  return s;
}

DateTime change_moment(const DateTime& base, const Value& v, std::string_view field) {
  if (const auto* d = std::get_if<Date>(&v)) return DateTime{*d, base.time};
  if (const auto* t = std::get_if<Time>(&v)) return DateTime{base.date, *t};
  if (const auto* dt = std::get_if<DateTime>(&v)) return *dt;
  throw Error(ErrorCode::Type, "field '" + std::string(field) + "' must be a date or time");
}

int minutes_between(const DateTime& a, const DateTime& b) {
  int days = 0;
  Date d = a.date;
  while (d < b.date) {
    d = d.plus_days(1);
    ++days;
  }
  return days * 1440 + b.time.minutes - a.time.minutes;
}

}  // namespace

EventRecord apply_update(const EventRecord& event, const ConstraintSpec& changes) {
  if (changes.fields.empty()) throw Error(ErrorCode::InvalidUpdate, "no changes requested");
  EventRecord out = event;
  for (const auto& [name, value] : changes.fields) {
    if (name == "subject") {
      out.subject = *str_field(changes, name);
    } else if (name == "location") {
      out.location = *str_field(changes, name);
    } else if (name == "start") {
      out.start = change_moment(event.start, value, name);
    } else if (name == "end") {
      out.end = change_moment(event.end, value, name);
    } else {
      throw Error(ErrorCode::InvalidUpdate, "cannot change '" + name + "'");
    }
  }
  if (changes.field("start") && !changes.field("end"))
    out.end = out.start.plus_minutes(minutes_between(event.start, event.end));
  if (!(out.start < out.end)) throw Error(ErrorCode::InvalidUpdate, "event would end before it starts");
  return out;
}

EventRecord event_from_spec(const ConstraintSpec& spec, const Clock& clock) {
  const std::string* subject = str_field(spec, "subject");
  const Value* start = spec.field("start");
  if (!subject && !start) throw Error(ErrorCode::InvalidUpdate, "a new event needs a subject or a start");
  for (const auto& [name, v] : spec.fields)
    if (name != "subject" && name != "start" && name != "end" && name != "location")
      throw Error(ErrorCode::InvalidUpdate, "cannot set '" + name + "' on a new event");
  EventRecord ev;
  if (subject) ev.subject = *subject;
  if (const std::string* loc = str_field(spec, "location")) ev.location = *loc;
  ev.start = clock.now;
  if (start) {
    if (const auto* dt = std::get_if<DateTime>(start)) {
      ev.start = *dt;
    } else if (const auto* d = std::get_if<Date>(start)) {
      ev.start = fill_defaults(PartialDateTime{*d, std::nullopt, std::nullopt, Meridiem::H24}, clock);
    } else if (const auto* t = std::get_if<Time>(start)) {
      ev.start = fill_defaults(PartialDateTime{std::nullopt, t->hour(), t->minute(), Meridiem::H24}, clock);
    } else {
      throw Error(ErrorCode::Type, "field 'start' must be a date or time");
    }
  }
  if (const Value* end = spec.field("end")) ev.end = change_moment(ev.start, *end, "end");
  else ev.end = ev.start.plus_minutes(30);
  if (!(ev.start < ev.end)) throw Error(ErrorCode::InvalidUpdate, "event would end before it starts");
  return ev;
}

namespace {

const std::map<std::string, std::string> kEventCoercions = {
    {"List[Event]", "singleton"}, {"Constraint[Event]", "FindEvents"}, {"Int", "EventById"}};

ConstraintSpec event_spec(std::string field, Value v) {
  ConstraintSpec s;
  s.type_name = "Constraint";
  s.type_param = "Event";
  s.fields.emplace_back(std::move(field), std::move(v));
  return s;
}

ConstraintSpec empty_event_spec() {
  ConstraintSpec s;
  s.type_name = "Constraint";
  s.type_param = "Event";
  return s;
}

ConstraintSpec event_arg(Invocation& inv, std::string_view param) {
  ConstraintSpec s = inv.spec_arg(param);
  if (s.target_type() != "Event")
    throw Error(ErrorCode::Type, inv.def().name + ": expected an event constraint, got " +
                                     render_spec(s));
  return s;
}

const Value& temporal_arg(Invocation& inv, std::string_view param) {
  const Value& v = inv.value(param);
  if (!is_temporal(v))
    throw Error(ErrorCode::Type, inv.def().name + ": expected a date or time, got " + type_name(v));
  return v;
}

std::string create_summary(const EventRecord& e) {
  std::string out = e.subject.empty() ? "event" : e.subject;
  out += " on " + format_date(e.start.date) + " " + format_time(e.start.time) + "-" +
         format_time(e.end.time);
  if (e.location) out += " at " + *e.location;
  return out;
}

struct Registrar {
  FunctionRegistry& reg;

  FunctionDef& add(std::string name, std::vector<ParamDef> params, std::string out, std::string doc,
                   std::function<void(Invocation&)> exec) {
    pending_.name = std::move(name);
    pending_.params = std::move(params);
    pending_.out_type = std::move(out);
    pending_.doc = std::move(doc);
    pending_.exec = std::move(exec);
    return pending_;
  }
  void commit() {
    reg.add(std::move(pending_));
    pending_ = FunctionDef{};
  }

  FunctionDef pending_;
};

// Builder taking one field value plus an optional constraint to extend.
void field_builder(Registrar& r, const std::string& name, const std::string& param,
                   const std::string& type, const std::string& field) {
  r.add(name, {{param, type, true}, {"event", "Constraint[Event]", false}}, "Constraint[Event]",
        "event constraint on " + field,
        [param, field](Invocation& inv) {
          const Value& v = inv.value(param);
          if ((field == "start" || field == "end") && !is_temporal(v))
            throw Error(ErrorCode::Type, inv.def().name + ": expected a date or time, got " + type_name(v));
          ConstraintSpec s = event_spec(field, v);
          if (inv.has("event")) s = conjoin(event_arg(inv, "event"), s);
          inv.set_result(make_spec(std::move(s)));
        });
  r.commit();
}

}  // namespace

void register_calendar(FunctionRegistry& reg) {
  Registrar r{reg, {}};

  // Search
  r.add("FindEvents", {{"pos1", "Constraint[Event]", true}}, "List[Event]",
        "events matching a constraint, by id",
        [](Invocation& inv) { inv.set_result(inv.store().find(event_arg(inv, "pos1"))); });
  r.commit();
  r.add("FindEventWrapperWithDefaults", {{"constraint", "Constraint[Event]", true}}, "List[Event]",
        "events matching a constraint, by id",
        [](Invocation& inv) { inv.set_result(inv.store().find(event_arg(inv, "constraint"))); });
  r.commit();
  r.add("EventById", {{"pos1", "Int", true}}, "Event", "the stored event with an id",
        [](Invocation& inv) {
          const auto id = inv.get<std::int64_t>("pos1");
          const EventRecord* ev = inv.store().get(id);
          if (!ev) throw Error(ErrorCode::NoMatch, "no event #" + std::to_string(id));
          inv.set_result(*ev);
        });
  r.commit();

  // Getters
  r.add(":results", {{"pos1", "List[Event]", true}}, "List[Event]", "search results",
        [](Invocation& inv) { inv.set_result(inv.value("pos1")); });
  r.pending_.coercions = {{"Constraint[Event]", "FindEvents"}};
  r.commit();
  auto event_getter = [&](const std::string& name, const std::string& out,
                          std::function<Value(const EventRecord&)> get) {
    r.add(name, {{"pos1", "Event", true}}, out, "event field",
          [get](Invocation& inv) { inv.set_result(get(inv.get<EventRecord>("pos1"))); });
    r.pending_.coercions = kEventCoercions;
    r.commit();
  };
  event_getter(":id", "Int", [](const EventRecord& e) { return Value{e.id}; });
  event_getter(":start", "DateTime", [](const EventRecord& e) { return Value{e.start}; });
  event_getter(":end", "DateTime", [](const EventRecord& e) { return Value{e.end}; });
  event_getter(":subject", "Str", [](const EventRecord& e) { return Value{e.subject}; });
  r.add(":location", {{"pos1", "Event", true}}, "Str", "event field", [](Invocation& inv) {
    const auto& e = inv.get<EventRecord>("pos1");
    if (!e.location) throw Error(ErrorCode::NoMatch, "event #" + std::to_string(e.id) + " has no location");
    inv.set_result(*e.location);
  });
  r.pending_.coercions = kEventCoercions;
  r.commit();
  r.add(":date", {{"pos1", "DateTime", true}}, "Date", "date part",
        [](Invocation& inv) { inv.set_result(inv.get<DateTime>("pos1").date); });
  r.commit();
  r.add(":time", {{"pos1", "DateTime", true}}, "Time", "time part",
        [](Invocation& inv) { inv.set_result(inv.get<DateTime>("pos1").time); });
  r.commit();

  // Delete
  r.add("DeletePreflightEventWrapper", {{"id", "Event", true}}, "Event", "event about to be deleted",
        [](Invocation& inv) { inv.set_result(inv.get<EventRecord>("id")); });
  r.pending_.coercions = kEventCoercions;
  r.commit();
  r.add("DeleteCommitEventWrapper", {{"event", "Event", true}, {"confirmed", "Bool", false}}, "Event",
        "deletes an event once confirmed", [](Invocation& inv) {
          const auto& ev = inv.get<EventRecord>("event");
          if (!inv.has("confirmed"))
            inv.raise(ExceptionKind::Confirmation, "confirmed", "delete " + render_event(ev) + "?", "Bool");
          if (!inv.get<bool>("confirmed")) {
            inv.set_result(ev);
            inv.note("cancelled");
            return;
          }
          EventRecord removed = inv.store().remove(ev.id);
          inv.set_result(removed);
          inv.note("deleted " + render_event(removed));
        });
  r.pending_.coercions = kEventCoercions;
  r.commit();

  // Update
  r.add("UpdatePreflightEventWrapper", {{"id", "Event", true}, {"update", "Constraint[Event]", true}},
        "Event", "the event with changes applied", [](Invocation& inv) {
          inv.set_result(apply_update(inv.get<EventRecord>("id"), event_arg(inv, "update")));
        });
  r.pending_.coercions = kEventCoercions;
  r.commit();
  r.add("UpdateCommitEventWrapper", {{"event", "Event", true}, {"confirmed", "Bool", false}}, "Event",
        "stores an updated event once confirmed", [](Invocation& inv) {
          const auto& ev = inv.get<EventRecord>("event");
          const EventRecord* old = inv.store().get(ev.id);
          if (!old)
            throw Error(ErrorCode::EventVanished, "event " + std::to_string(ev.id) + " no longer exists");
          if (!inv.has("confirmed"))
            inv.raise(ExceptionKind::Confirmation, "confirmed",
                      "change " + render_event(*old) + " to " + render_event(ev) + "?", "Bool");
          if (!inv.get<bool>("confirmed")) {
            inv.set_result(*old);
            inv.note("cancelled");
            return;
          }
          inv.store().update(ev);
          inv.set_result(ev);
          inv.note("updated " + render_event(ev));
        });
  r.pending_.coercions = kEventCoercions;
  r.commit();

  // Create
  r.add("CreatePreflightEventWrapper", {{"constraint", "Constraint[Event]", true}}, "Event",
        "the event a creation request describes", [](Invocation& inv) {
          inv.set_result(event_from_spec(event_arg(inv, "constraint"), inv.clock()));
        });
  r.commit();
  r.add("CreateCommitEventWrapper", {{"event", "Event", true}, {"confirmed", "Bool", false}}, "Event",
        "stores a new event once confirmed", [](Invocation& inv) {
          const auto& ev = inv.get<EventRecord>("event");
          if (!inv.has("confirmed"))
            inv.raise(ExceptionKind::Confirmation, "confirmed", "create " + create_summary(ev) + "?", "Bool");
          if (!inv.get<bool>("confirmed")) {
            inv.set_result(ev);
            inv.note("cancelled");
            return;
          }
          EventRecord stored = inv.store().insert(ev);
          inv.set_result(stored);
          inv.note("created " + render_event(stored));
        });
  r.commit();

  // Simplified constraint builders
  for (const std::string field : {"start", "end"}) {
    const std::string name = field == "start" ? "starts_at" : "ends_at";
    r.add(name, {{"pos1", "Any", true}, {"pos2", "Any", false}}, "Constraint[Event]",
          "events whose " + field + " matches a date, a time or both", [field](Invocation& inv) {
            Value v = temporal_arg(inv, "pos1");
            if (inv.has("pos2")) {
              auto merged = merge_temporal(v, temporal_arg(inv, "pos2"));
              if (!merged) throw Error(ErrorCode::Domain, inv.def().name + ": conflicting date/time");
              v = *merged;
            }
            inv.set_result(make_spec(event_spec(field, v)));
          });
    r.commit();
  }
  r.add("at_location", {{"pos1", "Str", true}}, "Constraint[Event]", "events at a location",
        [](Invocation& inv) { inv.set_result(make_spec(event_spec("location", inv.value("pos1")))); });
  r.commit();
  r.add("has_subject", {{"pos1", "Str", true}}, "Constraint[Event]", "events whose subject contains text",
        [](Invocation& inv) { inv.set_result(make_spec(event_spec("subject", inv.value("pos1")))); });
  r.commit();
  r.add("AND", {{"pos1", "Constraint[Event]", true}}, "Constraint[Event]", "conjunction of constraints",
        [](Invocation& inv) {
          ConstraintSpec acc = empty_event_spec();
          for (const auto& p : inv.positional_names()) acc = conjoin(acc, event_arg(inv, p));
          inv.set_result(make_spec(std::move(acc)));
        });
  r.pending_.variadic = true;
  r.commit();

  // Original constraint builders
  field_builder(r, "EventOnDateTime", "dateTime", "DateTime", "start");
  field_builder(r, "EventOnDate", "date", "Date", "start");
  field_builder(r, "EventAtTime", "time", "Time", "start");
  field_builder(r, "EventEndsAt", "dateTime", "Any", "end");
  field_builder(r, "EventAtLocation", "location", "Str", "location");
  field_builder(r, "EventWithSubject", "subject", "Str", "subject");
  r.add("andConstraint", {{"pos1", "Constraint[Event]", true}, {"pos2", "Constraint[Event]", true}},
        "Constraint[Event]", "conjunction of two constraints", [](Invocation& inv) {
          inv.set_result(make_spec(conjoin(event_arg(inv, "pos1"), event_arg(inv, "pos2"))));
        });
  r.commit();
  r.add("DateAtTimeWithDefaults", {{"date", "Date", false}, {"time", "Time", false}}, "DateTime",
        "date and time with missing parts filled in", [](Invocation& inv) {
          PartialDateTime p;
          if (inv.has("date")) p.date = inv.get<Date>("date");
          if (inv.has("time")) {
            const auto& t = inv.get<Time>("time");
            p.hour = t.hour();
            p.minute = t.minute();
            p.meridiem = Meridiem::H24;
          }
          inv.set_result(fill_defaults(p, inv.clock()));
        });
  r.commit();
  r.add("TimeAfterDateTime", {{"dateTime", "DateTime", true}, {"time", "Time", true}}, "DateTime",
        "next occurrence of a time after a moment", [](Invocation& inv) {
          inv.set_result(time_after(inv.get<DateTime>("dateTime"), inv.get<Time>("time")));
        });
  r.commit();

  // Dates and times
  r.add("today", {}, "Date", "the clock's date",
        [](Invocation& inv) { inv.set_result(inv.clock().now.date); });
  r.commit();
  r.add("tomorrow", {}, "Date", "the day after the clock's date",
        [](Invocation& inv) { inv.set_result(inv.clock().now.date.plus_days(1)); });
  r.commit();
  r.add("nextDOW", {{"pos1", "Str", true}}, "Date", "next date with the named weekday",
        [](Invocation& inv) {
          inv.set_result(next_weekday(inv.clock().now.date, inv.get<std::string>("pos1")));
        });
  r.commit();
  r.add("NumberAM", {{"pos1", "Int", true}}, "Time", "hour before noon",
        [](Invocation& inv) { inv.set_result(am_time(inv.get<std::int64_t>("pos1"))); });
  r.commit();
  r.add("NumberPM", {{"pos1", "Int", true}}, "Time", "hour after noon",
        [](Invocation& inv) { inv.set_result(pm_time(inv.get<std::int64_t>("pos1"))); });
  r.commit();
  r.add("HourMinuteAM", {{"pos1", "Int", true}, {"pos2", "Int", true}}, "Time", "hour and minute before noon",
        [](Invocation& inv) {
          inv.set_result(am_time(inv.get<std::int64_t>("pos1"), inv.get<std::int64_t>("pos2")));
        });
  r.commit();
  r.add("HourMinutePM", {{"pos1", "Int", true}, {"pos2", "Int", true}}, "Time", "hour and minute after noon",
        [](Invocation& inv) {
          inv.set_result(pm_time(inv.get<std::int64_t>("pos1"), inv.get<std::int64_t>("pos2")));
        });
  r.commit();
  r.add("Hour", {{"pos1", "Int", true}}, "Time", "hour with the meridiem guessed", [](Invocation& inv) {
    const auto h = inv.get<std::int64_t>("pos1");
    if (h < 0 || h > 23) throw Error(ErrorCode::Domain, "hour must be 0-23");
    PartialDateTime p;
    p.hour = int(h);
    inv.set_result(fill_defaults(p, inv.clock()).time);
  });
  r.commit();
}

}  // namespace df
