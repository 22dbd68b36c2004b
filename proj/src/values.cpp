#include "values.hpp"

#include "error.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

namespace df {

namespace chr = std::chrono;

namespace {

chr::sys_days to_sys(const Date& d) {
  return chr::sys_days{chr::year{d.year} / chr::month{d.month} / chr::day{d.day}};
}

Date from_sys(chr::sys_days s) {
  const chr::year_month_day ymd{s};
  return Date{int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::optional<Date> Date::make(int y, unsigned m, unsigned d) {
  const chr::year_month_day ymd{chr::year{y}, chr::month{m}, chr::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return Date{y, m, d};
}

Date Date::plus_days(int n) const { return from_sys(to_sys(*this) + chr::days{n}); }

unsigned Date::weekday() const { return chr::weekday{to_sys(*this)}.c_encoding(); }

std::optional<Time> Time::make(int hour, int minute) {
  if (hour < 0 || hour > 23 || minute < 0 || minute > 59) return std::nullopt;
  return Time{hour * 60 + minute};
}

DateTime DateTime::plus_minutes(int n) const {
  int total = time.minutes + n;
  int day_shift = total / 1440;
  total %= 1440;
  if (total < 0) {
    total += 1440;
    --day_shift;
  }
  return DateTime{date.plus_days(day_shift), Time{total}};
}

bool SpecRef::operator==(const SpecRef& other) const {
  if (ptr == other.ptr) return true;
  if (!ptr || !other.ptr) return false;
  return *ptr == *other.ptr;
}

SpecRef make_spec(ConstraintSpec spec) {
  return SpecRef{std::make_shared<const ConstraintSpec>(std::move(spec))};
}

const Value* ConstraintSpec::field(std::string_view name) const {
  for (const auto& [k, v] : fields)
    if (k == name) return &v;
  return nullptr;
}

void ConstraintSpec::set_field(std::string name, Value v) {
  for (auto& [k, old] : fields) {
    if (k == name) {
      old = std::move(v);
      return;
    }
  }
  fields.emplace_back(std::move(name), std::move(v));
}

std::string type_name(const Value& v) {
  return std::visit(overloaded{
                        [](std::int64_t) -> std::string { return "Int"; },
                        [](double) -> std::string { return "Float"; },
                        [](const std::string&) -> std::string { return "Str"; },
                        [](bool) -> std::string { return "Bool"; },
                        [](const Date&) -> std::string { return "Date"; },
                        [](const Time&) -> std::string { return "Time"; },
                        [](const DateTime&) -> std::string { return "DateTime"; },
                        [](const EventRecord&) -> std::string { return "Event"; },
                        [](const EventList&) -> std::string { return "List[Event]"; },
                        [](const SpecRef& s) -> std::string {
                          return "Constraint[" + s->target_type() + "]";
                        },
                    },
                    v);
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", d.year, d.month, d.day);
  return buf;
}

std::string format_time(const Time& t) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%02d:%02d", t.hour(), t.minute());
  return buf;
}

std::string format_iso(const DateTime& dt) {
  return format_date(dt.date) + "T" + format_time(dt.time);
}

std::optional<Date> parse_iso_date(std::string_view s) {
  int y = 0;
  unsigned m = 0, d = 0;
  int consumed = 0;
  const std::string str(s);
  if (std::sscanf(str.c_str(), "%4d-%2u-%2u%n", &y, &m, &d, &consumed) != 3) return std::nullopt;
  if (consumed != int(str.size())) return std::nullopt;
  return Date::make(y, m, d);
}

std::optional<DateTime> parse_iso_datetime(std::string_view s) {
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  auto date = parse_iso_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  std::string rest(s.substr(11));
  int h = 0, mi = 0, sec = 0, consumed = 0;
  if (std::sscanf(rest.c_str(), "%2d:%2d%n", &h, &mi, &consumed) != 2 || consumed != 5)
    return std::nullopt;
  if (rest.size() > 5) {
    int more = 0;
    if (std::sscanf(rest.c_str() + 5, ":%2d%n", &sec, &more) != 1 || 5 + more != int(rest.size()))
      return std::nullopt;
    if (sec < 0 || sec > 59) return std::nullopt;
  }
  auto time = Time::make(h, mi);
  if (!time) return std::nullopt;
  return DateTime{*date, *time};
}

std::string render_event(const EventRecord& e) {
  std::string out = "#" + std::to_string(e.id) + " " + e.subject + " on " +
                    format_date(e.start.date) + " " + format_time(e.start.time) + "-";
  if (e.end.date != e.start.date) out += format_date(e.end.date) + " ";
  out += format_time(e.end.time);
  if (e.location) out += " at " + *e.location;
  return out;
}

namespace {

std::string render_field_value(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  return render(v);
}

}  // namespace

std::string render_spec(const ConstraintSpec& spec) {
  std::string out = spec.type_name;
  if (spec.type_param) out += "[" + *spec.type_param + "]";
  out += "?(";
  bool first = true;
  for (const auto& [k, v] : spec.fields) {
    if (!first) out += ",";
    first = false;
    out += k + "=" + render_field_value(v);
  }
  return out + ")";
}

std::string render(const Value& v) {
  return std::visit(
      overloaded{
          [](std::int64_t i) { return std::to_string(i); },
          [](double d) {
            std::ostringstream os;
            os << d;
            return os.str();
          },
          [](const std::string& s) { return s; },
          [](bool b) { return std::string(b ? "true" : "false"); },
          [](const Date& d) { return format_date(d); },
          [](const Time& t) { return format_time(t); },
          [](const DateTime& dt) { return format_date(dt.date) + " " + format_time(dt.time); },
          [](const EventRecord& e) { return render_event(e); },
          [](const EventList& list) {
            if (list.empty()) return std::string("no events");
            std::string out;
            for (std::size_t i = 0; i < list.size(); ++i) {
              if (i) out += "; ";
              out += std::to_string(i + 1) + ") " + render_event(list[i]);
            }
            return out;
          },
          [](const SpecRef& s) { return render_spec(*s); },
      },
      v);
}

bool is_temporal(const Value& v) {
  return std::holds_alternative<Date>(v) || std::holds_alternative<Time>(v) ||
         std::holds_alternative<DateTime>(v);
}

std::optional<Value> merge_temporal(const Value& a, const Value& b) {
  if (a == b) return a;
  const auto* ad = std::get_if<Date>(&a);
  const auto* at = std::get_if<Time>(&a);
  const auto* adt = std::get_if<DateTime>(&a);
  const auto* bd = std::get_if<Date>(&b);
  const auto* bt = std::get_if<Time>(&b);
  const auto* bdt = std::get_if<DateTime>(&b);
  if (ad && bt) return Value{DateTime{*ad, *bt}};
  if (at && bd) return Value{DateTime{*bd, *at}};
  if (adt && bd && adt->date == *bd) return a;
  if (adt && bt && adt->time == *bt) return a;
  if (bdt && ad && bdt->date == *ad) return b;
  if (bdt && at && bdt->time == *at) return b;
  return std::nullopt;
}

bool value_matches(const Value& pattern, const Value& actual) {
  if (const auto* pd = std::get_if<Date>(&pattern)) {
    if (const auto* dt = std::get_if<DateTime>(&actual)) return dt->date == *pd;
  }
  if (const auto* pt = std::get_if<Time>(&pattern)) {
    if (const auto* dt = std::get_if<DateTime>(&actual)) return dt->time == *pt;
  }
  if (const auto* ps = std::get_if<SpecRef>(&pattern)) {
    if (const auto* ev = std::get_if<EventRecord>(&actual)) {
      return (*ps)->target_type() == "Event" && event_matches(**ps, *ev);
    }
    const Value* inner = (*ps)->field("value");
    if ((*ps)->target_type() != type_name(actual)) return false;
    if ((*ps)->fields.empty()) return true;
    return inner && (*ps)->fields.size() == 1 && value_matches(*inner, actual);
  }
  return pattern == actual;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool event_matches(const ConstraintSpec& spec, const EventRecord& event) {
  for (const auto& [name, pattern] : spec.fields) {
    if (name == "id") {
      if (pattern != Value{event.id}) return false;
    } else if (name == "subject") {
      const auto* s = std::get_if<std::string>(&pattern);
      if (!s || lower(event.subject).find(lower(*s)) == std::string::npos) return false;
    } else if (name == "location") {
      const auto* s = std::get_if<std::string>(&pattern);
      if (!s || !event.location || lower(*event.location) != lower(*s)) return false;
    } else if (name == "start") {
      if (!value_matches(pattern, Value{event.start})) return false;
    } else if (name == "end") {
      if (!value_matches(pattern, Value{event.end})) return false;
    } else {
      return false;
    }
  }
  return true;
}

ConstraintSpec conjoin(const ConstraintSpec& a, const ConstraintSpec& b) {
  if (a.target_type() != b.target_type())
    throw Error(ErrorCode::Type, "cannot combine constraints on " + a.target_type() + " and " +
                                     b.target_type());
  ConstraintSpec out = a;
  for (const auto& [name, value] : b.fields) {
    const Value* existing = out.field(name);
    if (!existing) {
      out.fields.emplace_back(name, value);
      continue;
    }
    if (*existing == value) continue;
    if (is_temporal(*existing) && is_temporal(value)) {
      if (auto merged = merge_temporal(*existing, value)) {
        out.set_field(name, *merged);
        continue;
      }
    }
    throw Error(ErrorCode::Domain, "conflicting constraints on '" + name + "'");
  }
  return out;
}

}  // namespace df
