#include "trustya/events.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "trustya/detail/fnv.hpp"

namespace trustya {
namespace {

nlohmann::json event_body(const Event& e) {
  return nlohmann::json{{"round", e.round},
                        {"phase", e.phase},
                        {"event_kind", e.kind},
                        {"payload", e.payload},
                        {"rng_draw_index", e.rng_draw_index}};
}

std::uint64_t advance_chain(std::uint64_t state, const Event& e) {
  return detail::fnv1a(event_body(e).dump(), state ^ detail::kFnvOffset);
}

[[noreturn]] void corrupt(std::size_t line_no, const std::string& what) {
  throw GameError(ErrorCode::CorruptLog, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

const Event& EventLog::append(int round, Phase phase, std::string_view kind, nlohmann::json payload,
                              std::uint64_t rng_draw_index) {
  Event e{round, phase, std::string(kind), std::move(payload), rng_draw_index, {}};
  chain_state_ = advance_chain(chain_state_, e);
  e.chain = detail::to_hex(chain_state_);
  events_.push_back(std::move(e));
  return events_.back();
}

std::string serialize_event(const Event& event) {
  auto j = event_body(event);
  j["chain"] = event.chain;
  return j.dump();
}

std::vector<std::string> EventLog::lines() const {
  std::vector<std::string> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(serialize_event(e));
  return out;
}

void EventLog::write(std::ostream& out) const {
  for (const auto& e : events_) out << serialize_event(e) << '\n';
}

std::string EventLog::to_jsonl() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

Event parse_event_line(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw GameError(ErrorCode::CorruptLog, "not a JSON object");
  if (j.size() != 6) throw GameError(ErrorCode::CorruptLog, "unexpected field set");
  try {
    Event e;
    e.round = j.at("round").get<int>();
    e.phase = j.at("phase").get<Phase>();
    e.kind = j.at("event_kind").get<std::string>();
    e.payload = j.at("payload");
    e.rng_draw_index = j.at("rng_draw_index").get<std::uint64_t>();
    e.chain = j.at("chain").get<std::string>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw GameError(ErrorCode::CorruptLog, ex.what());
  } catch (const GameError& ex) {
    throw GameError(ErrorCode::CorruptLog, ex.what());
  }
}

ParsedLog parse_log(std::istream& in) {
  ParsedLog log;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t chain = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Event e;
    try {
      e = parse_event_line(line);
    } catch (const GameError& ex) {
      corrupt(line_no, ex.what());
    }
    chain = advance_chain(chain, e);
    if (!log.chain_break && detail::to_hex(chain) != e.chain) log.chain_break = line_no;
    log.events.push_back(std::move(e));
    log.lines.push_back(line);
  }
  return log;
}

ParsedLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GameError(ErrorCode::CorruptLog, "cannot open log '" + path + "'");
  return parse_log(in);
}

}  // namespace trustya
