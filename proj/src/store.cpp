#include "store.hpp"

#include "error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace df {

using nlohmann::json;

Clock Clock::standard() { return Clock{DateTime{Date{2023, 1, 1}, Time{8 * 60}}}; }

namespace {

DateTime require_datetime(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw Error(ErrorCode::InvalidArgument, std::string("event field '") + key + "' missing");
  auto dt = parse_iso_datetime(j[key].get<std::string>());
  if (!dt) throw Error(ErrorCode::InvalidArgument, std::string("bad timestamp in '") + key + "'");
  return *dt;
}

}  // namespace

EventStore EventStore::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("events fixture: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::InvalidArgument, "events fixture must be an array");
  EventStore store;
  for (const auto& item : doc) {
    EventRecord ev;
    if (!item.contains("id") || !item["id"].is_number_integer())
      throw Error(ErrorCode::InvalidArgument, "event field 'id' missing");
    ev.id = item["id"].get<std::int64_t>();
    ev.subject = item.value("subject", "");
    ev.start = require_datetime(item, "start");
    ev.end = require_datetime(item, "end");
    if (item.contains("location") && item["location"].is_string())
      ev.location = item["location"].get<std::string>();
    if (!(ev.start < ev.end))
      throw Error(ErrorCode::InvalidArgument, "event " + std::to_string(ev.id) + " ends before it starts");
    if (store.events_.count(ev.id))
      throw Error(ErrorCode::InvalidArgument, "duplicate event id " + std::to_string(ev.id));
    store.add_fixture(std::move(ev));
  }
  return store;
}

EventStore EventStore::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::string EventStore::to_json() const {
  json arr = json::array();
  for (const auto& [id, ev] : events_) {
    json j{{"id", ev.id}, {"subject", ev.subject}, {"start", format_iso(ev.start)},
           {"end", format_iso(ev.end)}};
    j["location"] = ev.location ? json(*ev.location) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

void EventStore::add_fixture(EventRecord event) {
  next_id_ = std::max(next_id_, event.id + 1);
  events_.emplace(event.id, std::move(event));
}

EventList EventStore::find(const ConstraintSpec& spec) const {
  EventList out;
  for (const auto& [id, ev] : events_)
    if (event_matches(spec, ev)) out.push_back(ev);
  return out;
}

EventList EventStore::all() const {
  EventList out;
  for (const auto& [id, ev] : events_) out.push_back(ev);
  return out;
}

const EventRecord* EventStore::get(std::int64_t id) const {
  auto it = events_.find(id);
  return it == events_.end() ? nullptr : &it->second;
}

EventRecord EventStore::insert(EventRecord event) {
  event.id = next_id_++;
  events_.emplace(event.id, event);
  ++mutations_;
  return event;
}

void EventStore::update(const EventRecord& event) {
  auto it = events_.find(event.id);
  if (it == events_.end())
    throw Error(ErrorCode::EventVanished, "event " + std::to_string(event.id) + " no longer exists");
  it->second = event;
  ++mutations_;
}

EventRecord EventStore::remove(std::int64_t id) {
  auto it = events_.find(id);
  if (it == events_.end())
    throw Error(ErrorCode::EventVanished, "event " + std::to_string(id) + " no longer exists");
  EventRecord ev = std::move(it->second);
  events_.erase(it);
  ++mutations_;
  return ev;
}

}  // namespace df
