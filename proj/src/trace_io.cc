#include "conch/trace_io.hh"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

#include "conch/errors.hh"

namespace conch {

namespace {

constexpr const char* kTraceHeader = "#consistency-trace";
constexpr const char* kCertHeader = "#order-certificate";

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_int64(const std::string& w, std::int64_t& out) {
  if (w.empty()) return false;
  std::size_t k = (w[0] == '-') ? 1 : 0;
  if (k == w.size()) return false;
  for (std::size_t p = k; p < w.size(); ++p) {
    if (!std::isdigit(static_cast<unsigned char>(w[p]))) return false;
  }
  try {
    out = std::stoll(w);
  } catch (const std::out_of_range&) {
    return false;
  }
  return true;
}

std::optional<Value> parse_value(const std::string& w) {
  if (w == "true") return Value{true};
  if (w == "false") return Value{false};
  std::int64_t n;
  if (parse_int64(w, n)) return Value{n};
  return std::nullopt;
}

struct HeaderFields {
  std::vector<std::string> threads;
  bool unique = false;
  std::string spec;
};

HeaderFields parse_header(const std::string& line, std::size_t line_no) {
  auto toks = split_ws(line);
  if (toks.size() < 2 || toks[0] != kTraceHeader || toks[1] != "v1") {
    throw ParseError(
        std::string("expected header '") + kTraceHeader + " v1 ...'", line_no);
  }
  HeaderFields h;
  bool saw_threads = false;
  bool saw_unique = false;
  for (std::size_t k = 2; k < toks.size(); ++k) {
    auto eq = toks[k].find('=');
    if (eq == std::string::npos) {
      throw ParseError("malformed header field '" + toks[k] + "'", line_no);
    }
    std::string key = toks[k].substr(0, eq);
    std::string val = toks[k].substr(eq + 1);
    if (key == "threads") {
      saw_threads = true;
      if (!val.empty()) h.threads = split_on(val, ',');
      for (const auto& t : h.threads) {
        if (t.empty()) {
          throw ParseError("empty thread name in header", line_no);
        }
        if (t == "env") {
          throw ParseError("'env' is reserved and cannot be a thread",
                           line_no);
        }
      }
    } else if (key == "unique") {
      saw_unique = true;
      if (val != "true" && val != "false") {
        throw ParseError("unique= takes true or false", line_no);
      }
      h.unique = val == "true";
    } else if (key == "spec") {
      if (val.empty()) throw ParseError("spec= needs a name", line_no);
      h.spec = val;
    } else {
      throw ParseError("unknown header field '" + key + "'", line_no);
    }
  }
  if (!saw_threads) {
    throw ParseError("header is missing threads=", line_no);
  }
  if (!saw_unique) {
    throw ParseError("header is missing unique=", line_no);
  }
  return h;
}

// One body line can expand to two events (call sugar).
std::vector<Event> parse_event_line(const std::vector<std::string>& toks,
                                    std::size_t line_no) {
  const std::string& agent = toks[0];
  const std::string& kind = toks[1];
  auto need = [&](std::size_t count, const char* what) {
    if (toks.size() != count) {
      throw ParseError(std::string("'") + kind + "' takes " + what, line_no);
    }
  };
  auto rev_at = [&](std::size_t k) {
    std::int64_t r;
    if (!parse_int64(toks[k], r)) {
      throw ParseError("'" + toks[k] + "' is not a revision id", line_no);
    }
    return RevisionId{r};
  };
  if (kind == "fwd") {
    need(5, "sender, receiver and revision");
    if (agent != "env") {
      throw ParseError("fwd requires the env agent", line_no);
    }
    return {events::forward(toks[2], toks[3], rev_at(4))};
  }
  if (agent == "env") {
    throw ParseError("env may only perform fwd", line_no);
  }
  if (kind == "qu") {
    need(5, "revision, variable and result");
    auto v = parse_value(toks[4]);
    if (!v) throw ParseError("'" + toks[4] + "' is not a value", line_no);
    return {events::query(agent, rev_at(2), toks[3], *v)};
  }
  if (kind == "up") {
    need(5, "revision, variable and integer value");
    std::int64_t n;
    if (!parse_int64(toks[4], n)) {
      throw ParseError("'" + toks[4] + "' is not an integer", line_no);
    }
    return {events::update(agent, rev_at(2), toks[3], n)};
  }
  if (kind == "com") {
    need(3, "a revision");
    return {events::commit(agent, rev_at(2))};
  }
  // Register shapes: method-inv, method-ret, or a combined call.
  std::optional<Value> value;
  if (toks.size() == 3) {
    value = parse_value(toks[2]);
    if (!value) {
      throw ParseError("'" + toks[2] + "' is not a value", line_no);
    }
  } else if (toks.size() != 2) {
    throw ParseError("too many fields for a register event", line_no);
  }
  auto ends_with = [&](const char* suffix) {
    std::string s(suffix);
    return kind.size() > s.size() &&
           kind.compare(kind.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with("-inv")) {
    return {events::inv(agent, kind.substr(0, kind.size() - 4), value)};
  }
  if (ends_with("-ret")) {
    return {events::ret(agent, kind.substr(0, kind.size() - 4), value)};
  }
  return {events::call(agent, kind, value)};
}

}  // namespace

TraceDocument parse_trace(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  std::optional<HeaderFields> header;
  std::vector<Event> body;
  std::vector<std::size_t> event_lines;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (!header) {
      if (toks[0] == kTraceHeader) {
        header = parse_header(line, line_no);
        continue;
      }
      if (toks[0][0] == '#') continue;
      throw ParseError(
          std::string("expected header '") + kTraceHeader + " v1 ...'",
          line_no);
    }
    if (toks[0][0] == '#') continue;
    if (toks.size() < 2) {
      throw ParseError("event lines are 'agent kind fields...'", line_no);
    }
    for (Event& ev : parse_event_line(toks, line_no)) {
      body.push_back(std::move(ev));
      event_lines.push_back(line_no);
    }
  }
  if (!header) {
    throw ParseError("missing header line", std::max<std::size_t>(line_no, 1));
  }

  TraceDocument doc;
  doc.trace = Trace(std::move(body));
  doc.declared_threads = header->threads;
  doc.unique_flag = header->unique;
  doc.spec_name = header->spec;

  std::set<std::string> declared(doc.declared_threads.begin(),
                                 doc.declared_threads.end());
  for (std::size_t i = 0; i < doc.trace.size(); ++i) {
    const Event& ev = doc.trace[i];
    if (ev.agent.is_thread() && !declared.count(ev.agent.name)) {
      throw ParseError("thread '" + ev.agent.name +
                           "' does not appear in the header threads= list",
                       event_lines[i]);
    }
    if (is_forward(ev)) {
      const auto& fw = std::get<ForwardAction>(ev.action);
      if (!declared.count(fw.from) || !declared.count(fw.to)) {
        throw ParseError("fwd names an undeclared thread", event_lines[i]);
      }
    }
  }
  if (auto err = validate_shapes(doc.trace)) {
    throw ParseError(*err, 1);
  }
  if (doc.unique_flag) {
    if (auto dup = find_duplicate_event(doc.trace)) {
      std::size_t last = 0;
      for (std::size_t k = 0; k < doc.trace.size(); ++k) {
        if (doc.trace[k] == *dup) last = event_lines[k];
      }
      throw ParseError(
          "unique=true but event repeats: " + event_line(*dup), last);
    }
  }
  if (auto v = find_revision_discipline_violation(doc.trace)) {
    throw ParseError(v->message, event_lines[v->event_index]);
  }
  return doc;
}

std::string print_trace(const Trace& t, const std::string& spec_name) {
  std::ostringstream os;
  os << kTraceHeader << " v1 threads=";
  auto threads = threads_of(t);
  for (std::size_t k = 0; k < threads.size(); ++k) {
    if (k) os << ',';
    os << threads[k].name;
  }
  os << " unique=" << (find_duplicate_event(t) ? "false" : "true");
  if (!spec_name.empty()) os << " spec=" << spec_name;
  os << '\n';
  for (const Event& ev : t) os << event_line(ev) << '\n';
  return os.str();
}

std::string print_certificate(const OrderCertificate& c, std::size_t events) {
  std::ostringstream os;
  os << kCertHeader << " v1 events=" << events << '\n';
  for (const auto& [a, b] : c.visibility) os << "vis " << a << ' ' << b << '\n';
  for (const auto& [a, b] : c.arbitration) {
    os << "arb " << a << ' ' << b << '\n';
  }
  return os.str();
}

CertificateDocument parse_certificate(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  CertificateDocument doc;
  bool saw_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (!saw_header) {
      if (toks.size() != 3 || toks[0] != kCertHeader || toks[1] != "v1" ||
          toks[2].rfind("events=", 0) != 0) {
        throw ParseError(
            std::string("expected header '") + kCertHeader + " v1 events=N'",
            line_no);
      }
      std::int64_t n;
      if (!parse_int64(toks[2].substr(7), n) || n < 0) {
        throw ParseError("events= needs a non-negative integer", line_no);
      }
      doc.events = static_cast<std::size_t>(n);
      saw_header = true;
      continue;
    }
    if (toks[0][0] == '#') continue;
    if (toks.size() != 3 || (toks[0] != "vis" && toks[0] != "arb")) {
      throw ParseError("certificate lines are 'vis A B' or 'arb A B'",
                       line_no);
    }
    std::int64_t a, b;
    if (!parse_int64(toks[1], a) || !parse_int64(toks[2], b) || a < 1 ||
        b < 1) {
      throw ParseError("positions are 1-based integers", line_no);
    }
    if (static_cast<std::size_t>(a) > doc.events ||
        static_cast<std::size_t>(b) > doc.events) {
      throw ParseError("position exceeds the declared event count", line_no);
    }
    auto& list =
        toks[0] == "vis" ? doc.certificate.visibility : doc.certificate.arbitration;
    list.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b)});
  }
  if (!saw_header) {
    throw ParseError("missing certificate header",
                     std::max<std::size_t>(line_no, 1));
  }
  return doc;
}

bool looks_like_certificate(const std::string& text) {
  std::size_t p = text.find_first_not_of(" \t\r\n");
  if (p == std::string::npos) return false;
  return text.compare(p, std::string(kCertHeader).size(), kCertHeader) == 0;
}

}  // namespace conch
