#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mapfma/engine.hpp"
#include "mapfma/hardness.hpp"
#include "mapfma/model.hpp"

namespace mapfma {

/// Malformed text input; `line` is 1-based (0 when not line-bound).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  [[nodiscard]] int line() const { return line_; }

 private:
  int line_;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline int parse_int(std::string_view tok, int line, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line, "expected an integer " + std::string(what) + ", got '" + std::string(tok) + "'");
  return value;
}

/// Lines with comments stripped, paired with their 1-based numbers.
inline std::vector<std::pair<int, std::string>> content_lines(std::string_view text) {
  std::vector<std::pair<int, std::string>> out;
  int number = 0;
  for (const auto& raw : split(text, '\n')) {
    ++number;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.emplace_back(number, line);
  }
  return out;
}

}  // namespace detail

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------- instance

/// Canonical form: `graph <n>`, one `vertex` line per id, edges sorted,
/// agents by id, then `makespan`.
inline std::string write_instance(const Instance& inst) {
  std::ostringstream out;
  const auto& g = inst.graph;
  out << "graph " << g.num_vertices() << "\n";
  for (VertexId v = 0; v < static_cast<VertexId>(g.num_vertices()); ++v) out << "vertex " << g.label(v) << "\n";
  for (auto [u, v] : g.edges()) out << "edge " << g.label(u) << " " << g.label(v) << "\n";
  for (const auto& a : inst.agents)
    out << "agent " << a.label << " " << g.label(a.source) << " " << g.label(a.target) << "\n";
  out << "makespan " << inst.makespan << "\n";
  return out.str();
}

/// Vertices may be declared with `vertex` or implicitly on first use; the
/// total must match the `graph` header.
inline Instance parse_instance(std::string_view text) {
  Instance inst;
  int declared = -1;
  bool have_makespan = false;
  int last_line = 0;
  auto vertex = [&](const std::string& label, int line) -> VertexId {
    if (auto v = inst.graph.find(label)) return *v;
    if (declared >= 0 && static_cast<int>(inst.graph.num_vertices()) >= declared)
      throw ParseError(line, "vertex '" + label + "' exceeds the declared count " + std::to_string(declared));
    return inst.graph.add_vertex(label);
  };
  for (const auto& [line, content] : detail::content_lines(text)) {
    last_line = line;
    auto tok = detail::split_ws(content);
    const std::string& kw = tok[0];
    auto arity = [&](std::size_t k) {
      if (tok.size() != k + 1)
        throw ParseError(line, "'" + kw + "' takes " + std::to_string(k) + " argument(s)");
    };
    if (kw == "graph") {
      arity(1);
      if (declared >= 0) throw ParseError(line, "duplicate 'graph' header");
      declared = detail::parse_int(tok[1], line, "vertex count");
      if (declared < 0) throw ParseError(line, "vertex count must be nonnegative");
      continue;
    }
    if (declared < 0) throw ParseError(line, "'graph <n>' must come first");
    if (kw == "vertex") {
      arity(1);
      if (inst.graph.find(tok[1])) throw ParseError(line, "duplicate vertex '" + tok[1] + "'");
      vertex(tok[1], line);
    } else if (kw == "edge") {
      arity(2);
      const VertexId u = vertex(tok[1], line);
      const VertexId v = vertex(tok[2], line);
      if (u == v) throw ParseError(line, "self-loop on '" + tok[1] + "'");
      if (inst.graph.has_edge(u, v)) throw ParseError(line, "duplicate edge " + tok[1] + " " + tok[2]);
      inst.graph.add_edge(u, v);
    } else if (kw == "agent") {
      arity(3);
      if (inst.find_agent(tok[1])) throw ParseError(line, "duplicate agent id '" + tok[1] + "'");
      if (tok[1].find_first_of(":,") != std::string::npos)
        throw ParseError(line, "agent id '" + tok[1] + "' may not contain ':' or ','");
      const auto id = static_cast<AgentId>(inst.agents.size());
      inst.agents.push_back({id, vertex(tok[2], line), vertex(tok[3], line), tok[1]});
    } else if (kw == "makespan") {
      arity(1);
      if (have_makespan) throw ParseError(line, "duplicate 'makespan'");
      inst.makespan = detail::parse_int(tok[1], line, "makespan");
      have_makespan = true;
    } else {
      throw ParseError(line, "unknown declaration '" + kw + "'");
    }
  }
  if (declared < 0) throw ParseError(0, "missing 'graph <n>' header");
  if (static_cast<int>(inst.graph.num_vertices()) != declared)
    throw ParseError(last_line, "graph declares " + std::to_string(declared) + " vertices but " +
                                    std::to_string(inst.graph.num_vertices()) + " were named");
  if (!have_makespan) throw ParseError(last_line, "missing 'makespan'");
  for (const auto& v : validate_instance(inst)) throw ParseError(0, v.rule + ": " + v.detail);
  return inst;
}

// ---------------------------------------------------------------- schedule

inline std::string write_schedule(const Instance& inst, const Schedule& s) {
  std::ostringstream out;
  out << "schedule " << s.length() << "\n";
  for (AgentId a = 0; a < static_cast<AgentId>(s.num_agents()); ++a) {
    out << inst.agent_label(a);
    for (VertexId v : s.row(a)) out << " " << inst.graph.label(v);
    out << "\n";
  }
  return out.str();
}

/// Rows may come in any order but every agent needs exactly one. Turn-wise
/// feasibility is not checked here.
inline Schedule parse_schedule(std::string_view text, const Instance& inst) {
  int mu = -1;
  std::vector<std::vector<VertexId>> rows(inst.num_agents());
  std::vector<char> seen(inst.num_agents(), 0);
  int last_line = 0;
  for (const auto& [line, content] : detail::content_lines(text)) {
    last_line = line;
    auto tok = detail::split_ws(content);
    if (mu < 0) {
      if (tok[0] != "schedule" || tok.size() != 2) throw ParseError(line, "expected 'schedule <mu>'");
      mu = detail::parse_int(tok[1], line, "schedule length");
      if (mu < 0) throw ParseError(line, "schedule length must be nonnegative");
      continue;
    }
    auto a = inst.find_agent(tok[0]);
    if (!a) throw ParseError(line, "unknown agent '" + tok[0] + "'");
    if (seen[*a]) throw ParseError(line, "second row for agent '" + tok[0] + "'");
    seen[*a] = 1;
    if (static_cast<int>(tok.size()) != mu + 2)
      throw ParseError(line, "agent '" + tok[0] + "' lists " + std::to_string(tok.size() - 1) +
                                 " positions, expected " + std::to_string(mu + 1));
    for (std::size_t i = 1; i < tok.size(); ++i) {
      auto v = inst.graph.find(tok[i]);
      if (!v) throw ParseError(line, "unknown vertex '" + tok[i] + "'");
      rows[*a].push_back(*v);
    }
  }
  if (mu < 0) throw ParseError(0, "missing 'schedule <mu>' header");
  for (std::size_t a = 0; a < seen.size(); ++a)
    if (!seen[a]) throw ParseError(last_line, "no row for agent '" + inst.agents[a].label + "'");
  return Schedule(std::move(rows));
}

// ---------------------------------------------------------- plans, choices

/// `turn:agent[,turn:agent...]`; empty text gives the empty plan.
inline MalfunctionPlan parse_plan(std::string_view text, const Instance& inst) {
  std::vector<MalfunctionEvent> events;
  if (text.empty() || text == "-") return {};
  for (const auto& item : detail::split(text, ',')) {
    auto parts = detail::split(item, ':');
    if (parts.size() != 2) throw ParseError(0, "plan entry '" + item + "' is not turn:agent");
    const int turn = detail::parse_int(parts[0], 0, "plan turn");
    auto a = inst.find_agent(parts[1]);
    if (!a) throw ParseError(0, "plan names unknown agent '" + parts[1] + "'");
    events.push_back({turn, *a});
  }
  try {
    return scripted_plan(inst, std::move(events));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

inline std::string format_plan(const MalfunctionPlan& plan, const Instance& inst) {
  if (plan.empty()) return "-";
  std::string out;
  for (const auto& ev : plan.events) {
    if (!out.empty()) out += ",";
    out += std::to_string(ev.turn) + ":" + inst.agent_label(ev.agent);
  }
  return out;
}

/// `turn:vertex:agent[,...]`.
inline std::vector<PriorityChoice> parse_priorities(std::string_view text, const Instance& inst) {
  std::vector<PriorityChoice> out;
  if (text.empty() || text == "-") return out;
  for (const auto& item : detail::split(text, ',')) {
    auto parts = detail::split(item, ':');
    if (parts.size() != 3) throw ParseError(0, "priority entry '" + item + "' is not turn:vertex:agent");
    const int turn = detail::parse_int(parts[0], 0, "priority turn");
    auto v = inst.graph.find(parts[1]);
    if (!v) throw ParseError(0, "priority names unknown vertex '" + parts[1] + "'");
    auto a = inst.find_agent(parts[2]);
    if (!a) throw ParseError(0, "priority names unknown agent '" + parts[2] + "'");
    out.push_back({turn, *v, *a});
  }
  return out;
}

inline std::string format_priorities(const std::vector<PriorityChoice>& ps, const Instance& inst) {
  if (ps.empty()) return "-";
  std::string out;
  for (const auto& p : ps) {
    if (!out.empty()) out += ",";
    out += std::to_string(p.turn) + ":" + inst.graph.label(p.vertex) + ":" + inst.agent_label(p.winner);
  }
  return out;
}

// ------------------------------------------------------------------ traces

struct TraceHeader {
  std::string instance_hash;
  std::string schedule_hash;
  Protocol protocol = Protocol::Cbm;
  TieBreakPolicy policy;
  std::string plan = "-";
  std::string priorities = "-";
  int budget = 0;
};

inline std::string write_trace(const Instance& inst, const Schedule& sched, const MalfunctionPlan& plan,
                               Protocol protocol, const TieBreakPolicy& policy, const RunOptions& opt,
                               const RunResult& res) {
  std::ostringstream out;
  out << "trace 1\n";
  out << "instance " << hex64(fnv1a64(write_instance(inst))) << "\n";
  out << "schedule " << hex64(fnv1a64(write_schedule(inst, sched))) << "\n";
  out << "protocol " << to_string(protocol) << "\n";
  out << "policy " << to_string(policy.kind) << "\n";
  out << "seed " << policy.seed << "\n";
  out << "plan " << format_plan(plan, inst) << "\n";
  out << "priorities " << format_priorities(opt.priorities, inst) << "\n";
  out << "budget " << res.budget << "\n";
  const auto& g = inst.graph;
  for (const auto& rec : res.trace) {
    const std::string t = "T" + std::to_string(rec.turn);
    for (const auto& d : rec.decisions) {
      out << t << " D " << inst.agent_label(d.agent) << " ";
      switch (d.intent) {
        case Intent::Stay: out << "stay " << g.label(d.from); break;
        case Intent::Move: out << "move " << g.label(d.from) << " " << g.label(d.to); break;
        case Intent::Malfunction: out << "malfunction " << g.label(d.from); break;
      }
      out << "\n";
    }
    for (const auto& m : rec.modifications) {
      out << t << " M " << inst.agent_label(m.agent) << " " << to_string(m.reason);
      if (m.vertex != kNoVertex) out << " " << g.label(m.vertex);
      if (m.winner != kNoAgent) out << " " << inst.agent_label(m.winner);
      out << "\n";
    }
    for (const auto& a : rec.actions)
      out << t << " A " << inst.agent_label(a.agent) << " " << g.label(a.from) << " " << g.label(a.to) << "\n";
  }
  out << "outcome " << to_string(res.outcome) << " " << res.outcome_turn << "\n";
  out << "makespan " << res.makespan << "\n";
  return out.str();
}

inline TraceHeader parse_trace_header(std::string_view text, const Instance& inst) {
  TraceHeader h;
  std::map<std::string, std::string> fields;
  int number = 0;
  for (const auto& line : detail::split(text, '\n')) {
    ++number;
    if (line.empty() || line[0] == 'T' || line.rfind("outcome", 0) == 0) break;
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw ParseError(number, "malformed trace header line");
    fields[line.substr(0, sp)] = line.substr(sp + 1);
  }
  for (const char* key : {"trace", "instance", "schedule", "protocol", "policy", "seed", "plan", "priorities", "budget"})
    if (!fields.count(key)) throw ParseError(0, std::string("trace header lacks '") + key + "'");
  if (fields["trace"] != "1") throw ParseError(1, "unsupported trace version '" + fields["trace"] + "'");
  h.instance_hash = fields["instance"];
  h.schedule_hash = fields["schedule"];
  try {
    h.protocol = parse_protocol(fields["protocol"]);
    h.policy.kind = parse_policy_kind(fields["policy"]);
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
  {
    const auto& seed = fields["seed"];
    auto [ptr, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), h.policy.seed);
    if (ec != std::errc() || ptr != seed.data() + seed.size())
      throw ParseError(0, "trace seed '" + seed + "' is not an unsigned integer");
  }
  h.plan = fields["plan"];
  h.priorities = fields["priorities"];
  h.budget = detail::parse_int(fields["budget"], 0, "budget");
  (void)inst;
  return h;
}

/// Space-time table: one row per agent, one column per executed turn.
/// `!` marks a forced malfunction, `*` a protocol-inserted delay.
inline std::string emit_spacetime(const Instance& inst, const RunResult& res) {
  const auto& s = res.final_schedule;
  const int width_turns = s.length();
  std::vector<std::vector<char>> mark(s.num_agents(), std::vector<char>(static_cast<std::size_t>(width_turns) + 1, ' '));
  for (const auto& rec : res.trace)
    for (const auto& m : rec.modifications)
      if (rec.turn <= width_turns) mark[m.agent][rec.turn] = m.reason == DelayReason::Malfunction ? '!' : '*';
  std::size_t cell = 1, name = 5;
  for (const auto& row : s.rows())
    for (VertexId v : row) cell = std::max(cell, inst.graph.label(v).size() + 1);
  for (const auto& a : inst.agents) name = std::max(name, a.label.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name)) << "agent";
  for (int t = 0; t <= width_turns; ++t) out << " " << std::setw(static_cast<int>(cell)) << std::to_string(t);
  out << "\n";
  for (AgentId a = 0; a < static_cast<AgentId>(s.num_agents()); ++a) {
    out << std::setw(static_cast<int>(name)) << inst.agent_label(a);
    for (int t = 0; t <= width_turns; ++t) {
      std::string c = inst.graph.label(s.at(a, t));
      if (mark[a][t] != ' ') c += mark[a][t];
      out << " " << std::setw(static_cast<int>(cell)) << c;
    }
    out << "\n";
  }
  std::string text = out.str();
  // Drop trailing padding on every line.
  std::string trimmed;
  for (const auto& line : detail::split(text, '\n')) {
    auto end = line.find_last_not_of(' ');
    trimmed += end == std::string::npos ? "" : line.substr(0, end + 1);
    trimmed += "\n";
  }
  trimmed.pop_back();
  return trimmed;
}

// ------------------------------------------------------------------ DIMACS

/// `c` comments, one `p cnf <n> <m>` header, clauses of exactly three
/// nonzero literals terminated by 0 (clauses may span lines).
inline CnfFormula parse_dimacs(std::string_view text) {
  CnfFormula f;
  int declared_m = -1;
  std::vector<Literal> current;
  int number = 0;
  int last = 0;
  for (const auto& raw : detail::split(text, '\n')) {
    ++number;
    auto tok = detail::split_ws(raw);
    if (tok.empty() || tok[0] == "c") continue;
    if (tok[0] == "%") break;
    last = number;
    if (tok[0] == "p") {
      if (declared_m >= 0) throw ParseError(number, "duplicate problem line");
      if (tok.size() != 4 || tok[1] != "cnf") throw ParseError(number, "expected 'p cnf <n> <m>'");
      f.n = detail::parse_int(tok[2], number, "variable count");
      declared_m = detail::parse_int(tok[3], number, "clause count");
      if (f.n < 1 || declared_m < 1) throw ParseError(number, "variable and clause counts must be positive");
      continue;
    }
    if (declared_m < 0) throw ParseError(number, "clause before the 'p cnf' line");
    for (const auto& t : tok) {
      const int lit = detail::parse_int(t, number, "literal");
      if (lit == 0) {
        if (current.size() != 3)
          throw ParseError(number, "clause " + std::to_string(f.clauses.size() + 1) + " has " +
                                       std::to_string(current.size()) + " literals, expected 3");
        f.clauses.push_back(current);
        current.clear();
        continue;
      }
      const int var = lit < 0 ? -lit : lit;
      if (var > f.n) throw ParseError(number, "literal " + t + " exceeds n = " + std::to_string(f.n));
      current.push_back({var, lit > 0});
    }
  }
  if (declared_m < 0) throw ParseError(0, "missing 'p cnf' line");
  if (!current.empty()) throw ParseError(last, "last clause is not terminated by 0");
  if (f.m() != declared_m)
    throw ParseError(last, "header declares " + std::to_string(declared_m) + " clauses, found " +
                               std::to_string(f.m()));
  return f;
}

inline std::string write_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  out << "p cnf " << f.n << " " << f.m() << "\n";
  for (const auto& c : f.clauses) {
    for (const auto& l : c) out << (l.positive ? l.var : -l.var) << " ";
    out << "0\n";
  }
  return out.str();
}

/// `1,-2,3`: each variable once, sign gives the value.
inline std::vector<bool> parse_assignment(std::string_view text, int n) {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  std::vector<bool> out(static_cast<std::size_t>(n), false);
  for (const auto& item : detail::split(text, ',')) {
    const int lit = detail::parse_int(item, 0, "assignment literal");
    const int var = lit < 0 ? -lit : lit;
    if (var < 1 || var > n) throw ParseError(0, "assignment names variable " + std::to_string(var));
    if (seen[var - 1]++) throw ParseError(0, "assignment repeats variable " + std::to_string(var));
    out[var - 1] = lit > 0;
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw ParseError(0, "assignment misses variable " + std::to_string(i + 1));
  return out;
}

inline std::string format_assignment(const std::vector<bool>& a) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ",";
    out += (a[i] ? "" : "-") + std::to_string(i + 1);
  }
  return out;
}

}  // namespace mapfma
