#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "i2v/errors.hpp"
#include "i2v/types.hpp"

namespace i2v {

// Session log format: one session per line,
//   <session_id> \t <token_1> <token_2> ... <token_k>
// with each token in canonical "<item>|<interaction>" form.

struct ParsedSessions {
  std::vector<Session> sessions;
  std::size_t dropped = 0;  // sessions below min_session_len
};

// The bounce filter drops sessions shorter than this by default.
inline constexpr std::size_t kDefaultMinSessionLen = 4;

inline ParsedSessions parse_sessions(std::istream& in,
                                     std::size_t min_session_len) {
  ParsedSessions out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError("expected <session_id>\\t<tokens>", line_no);

    Session session;
    session.id = line.substr(0, tab);
    std::size_t pos = tab + 1;
    while (pos < line.size()) {
      std::size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      if (end > pos) {
        const std::string_view raw(line.data() + pos, end - pos);
        auto token = PairToken::parse(raw);
        if (!token)
          throw ParseError("invalid token '" + std::string(raw) + "'", line_no);
        session.events.push_back(std::move(*token));
      }
      pos = end + 1;
    }
    if (session.events.empty())
      throw ParseError("session has no events", line_no);

    if (session.events.size() < min_session_len)
      ++out.dropped;
    else
      out.sessions.push_back(std::move(session));
  }
  return out;
}

inline void serialize_sessions(std::span<const Session> sessions,
                               std::ostream& out) {
  for (const Session& s : sessions) {
    out << s.id << '\t';
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      if (i) out << ' ';
      out << s.events[i].canonical();
    }
    out << '\n';
  }
}

inline ParsedSessions load_sessions(const std::string& path,
                                    std::size_t min_session_len) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open session log: " + path);
  return parse_sessions(in, min_session_len);
}

inline void save_sessions(std::span<const Session> sessions,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write session log: " + path);
  serialize_sessions(sessions, out);
}

}  // namespace i2v
