#include "deltapath/io.hpp"
#include "deltapath/error.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace deltapath {

namespace {

std::string
number(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

[[noreturn]] void
fail(std::size_t line, const std::string& what)
{
  throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string>
tokenize(const std::string& line)
{
  std::vector<std::string> out;
  std::istringstream ss(line.substr(0, line.find('#')));
  std::string tok;
  while (ss >> tok)
    out.push_back(tok);
  return out;
}

template <class T>
T
parse_num(const std::string& tok, std::size_t line)
{
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    fail(line, "bad number '" + tok + "'");
  return value;
}

struct KeyValues
{
  std::map<std::string, double> values;

  std::optional<double>
  get(const std::string& key) const
  {
    auto it = values.find(key);
    if (it == values.end())
      return std::nullopt;
    return it->second;
  }
};

KeyValues
parse_kv(const std::vector<std::string>& toks, std::size_t from, std::size_t line,
         std::initializer_list<std::string_view> allowed)
{
  KeyValues kv;
  for (std::size_t i = from; i < toks.size(); ++i) {
    auto eq = toks[i].find('=');
    if (eq == std::string::npos)
      fail(line, "expected key=value, got '" + toks[i] + "'");
    auto key = toks[i].substr(0, eq);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      fail(line, "unknown key '" + key + "'");
    kv.values[key] = parse_num<double>(toks[i].substr(eq + 1), line);
  }
  return kv;
}

LinkProperties
link_props(const KeyValues& kv)
{
  LinkProperties p;
  p.capacity = kv.get("capacity").value_or(p.capacity);
  p.utilization = kv.get("utilization").value_or(p.utilization);
  p.delay = kv.get("delay").value_or(p.delay);
  return p;
}

std::string
props_text(const LinkProperties& p)
{
  return "capacity=" + number(p.capacity) + " utilization=" + number(p.utilization) +
         " delay=" + number(p.delay);
}

void
need(const std::vector<std::string>& toks, std::size_t min, std::size_t line)
{
  if (toks.size() < min)
    fail(line, "'" + toks.front() + "' needs " + std::to_string(min - 1) + " arguments");
}

} // namespace

GraphStore
to_graph(const Topology& topo, const LinkCostFn& link_cost)
{
  GraphStore g;
  for (const auto& n : topo.nodes)
    g.add_node(n);
  std::vector<EdgeRecord> records;
  for (const auto& l : topo.links) {
    if (!g.has_node(l.a) || !g.has_node(l.b))
      throw Error(Errc::UnknownNode, "link endpoint missing");
    if (l.a == l.b)
      throw Error(Errc::InvalidLink, "self loop on node " + std::to_string(l.a));
    l.props.validate();
    double w = link_cost(l.props);
    records.push_back({l.a, l.b, w, l.props, +1});
    records.push_back({l.b, l.a, w, l.props, +1});
  }
  g.apply_deltas(records);
  return g;
}

Topology
read_topology(std::istream& in)
{
  Topology topo;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty())
      continue;
    if (toks[0] == "node") {
      need(toks, 2, lineno);
      NodeRecord rec;
      rec.id = parse_num<NodeId>(toks[1], lineno);
      if (toks.size() > 2) {
        try {
          rec.label = parse_node_label(toks[2]);
        }
        catch (const Error& e) {
          fail(lineno, e.what());
        }
      }
      for (std::size_t i = 3; i < toks.size(); ++i) {
        auto eq = toks[i].find('=');
        if (eq == std::string::npos)
          fail(lineno, "expected key=value, got '" + toks[i] + "'");
        rec.properties[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
      }
      topo.nodes.push_back(std::move(rec));
    }
    else if (toks[0] == "link") {
      need(toks, 3, lineno);
      Link l;
      l.a = parse_num<NodeId>(toks[1], lineno);
      l.b = parse_num<NodeId>(toks[2], lineno);
      l.props = link_props(parse_kv(toks, 3, lineno, {"capacity", "utilization", "delay"}));
      topo.links.push_back(l);
    }
    else if (toks[0] == "hosts") {
      need(toks, 3, lineno);
      topo.hosts[parse_num<NodeId>(toks[1], lineno)] = parse_num<std::uint32_t>(toks[2], lineno);
    }
    else {
      fail(lineno, "unknown directive '" + toks[0] + "'");
    }
  }
  return topo;
}

Topology
read_topology_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::ParseError, "cannot open " + path);
  return read_topology(in);
}

void
write_topology(std::ostream& out, const Topology& topo)
{
  for (const auto& n : topo.nodes) {
    out << "node " << n.id << ' ' << to_string(n.label);
    for (const auto& [k, v] : n.properties)
      out << ' ' << k << '=' << v;
    out << '\n';
  }
  for (const auto& [id, count] : topo.hosts)
    out << "hosts " << id << ' ' << count << '\n';
  for (const auto& l : topo.links)
    out << "link " << l.a << ' ' << l.b << ' ' << props_text(l.props) << '\n';
}

EventScript
read_events(std::istream& in)
{
  EventScript script;
  bool pending_reset = false;
  auto current = [&](std::size_t lineno) -> ScriptEpoch& {
    (void)lineno;
    if (script.epochs.empty()) {
      script.epochs.push_back({});
      script.epochs.back().epoch = 1;
      script.epochs.back().reset_before = pending_reset;
      pending_reset = false;
    }
    return script.epochs.back();
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = tokenize(line);
    if (toks.empty())
      continue;
    const auto& op = toks[0];
    if (op == "epoch") {
      need(toks, 2, lineno);
      auto n = parse_num<std::uint64_t>(toks[1], lineno);
      if (!script.epochs.empty() && n <= script.epochs.back().epoch)
        fail(lineno, "epochs must increase");
      script.epochs.push_back({});
      script.epochs.back().epoch = n;
      script.epochs.back().reset_before = pending_reset;
      pending_reset = false;
    }
    else if (op == "reset") {
      pending_reset = true;
    }
    else if (op == "+link") {
      need(toks, 3, lineno);
      AddLink ev{parse_num<NodeId>(toks[1], lineno), parse_num<NodeId>(toks[2], lineno),
                 link_props(parse_kv(toks, 3, lineno, {"capacity", "utilization", "delay"}))};
      auto& e = current(lineno);
      e.events.push_back(ev);
      e.event_lines.push_back(lineno);
    }
    else if (op == "-link") {
      need(toks, 3, lineno);
      auto kv = parse_kv(toks, 3, lineno, {"w"});
      RemoveLink ev{parse_num<NodeId>(toks[1], lineno), parse_num<NodeId>(toks[2], lineno),
                    kv.get("w")};
      auto& e = current(lineno);
      e.events.push_back(ev);
      e.event_lines.push_back(lineno);
    }
    else if (op == "+node") {
      need(toks, 2, lineno);
      AddNode ev{parse_num<NodeId>(toks[1], lineno), NodeLabel::Switch};
      if (toks.size() > 2) {
        try {
          ev.label = parse_node_label(toks[2]);
        }
        catch (const Error& err) {
          fail(lineno, err.what());
        }
      }
      auto& e = current(lineno);
      e.events.push_back(ev);
      e.event_lines.push_back(lineno);
    }
    else if (op == "-node") {
      need(toks, 2, lineno);
      auto& e = current(lineno);
      e.events.push_back(RemoveNode{parse_num<NodeId>(toks[1], lineno)});
      e.event_lines.push_back(lineno);
    }
    else if (op == "weight") {
      need(toks, 4, lineno);
      auto kv = parse_kv(toks, 3, lineno, {"w", "capacity", "utilization", "delay"});
      UpdateWeight ev{parse_num<NodeId>(toks[1], lineno), parse_num<NodeId>(toks[2], lineno),
                      kv.get("w"), kv.get("capacity"), kv.get("utilization"), kv.get("delay")};
      auto& e = current(lineno);
      e.events.push_back(ev);
      e.event_lines.push_back(lineno);
    }
    else if (op == "req") {
      need(toks, 4, lineno);
      current(lineno).requests.push_back({parse_num<std::uint64_t>(toks[1], lineno),
                                          parse_num<NodeId>(toks[2], lineno),
                                          parse_num<NodeId>(toks[3], lineno)});
    }
    else if (op == "+policy") {
      need(toks, 3, lineno);
      auto start = line.find(toks[1], line.find(op) + op.size()) + toks[1].size();
      auto text = line.substr(start, line.find('#') == std::string::npos
                                       ? std::string::npos
                                       : line.find('#') - start);
      text.erase(0, text.find_first_not_of(" \t"));
      text.erase(text.find_last_not_of(" \t\r") + 1);
      current(lineno).policies.push_back({true, toks[1], text});
    }
    else if (op == "-policy") {
      need(toks, 2, lineno);
      current(lineno).policies.push_back({false, toks[1], {}});
    }
    else {
      fail(lineno, "unknown directive '" + op + "'");
    }
  }
  return script;
}

EventScript
read_events_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(Errc::ParseError, "cannot open " + path);
  return read_events(in);
}

std::string
format_event(const TopologyEvent& ev)
{
  return std::visit(
    [](const auto& e) -> std::string {
      using T = std::decay_t<decltype(e)>;
      if constexpr (std::is_same_v<T, AddLink>)
        return "+link " + std::to_string(e.a) + ' ' + std::to_string(e.b) + ' ' + props_text(e.props);
      else if constexpr (std::is_same_v<T, RemoveLink>)
        return "-link " + std::to_string(e.a) + ' ' + std::to_string(e.b) +
               (e.w ? " w=" + number(*e.w) : std::string());
      else if constexpr (std::is_same_v<T, AddNode>)
        return "+node " + std::to_string(e.id) + ' ' + std::string(to_string(e.label));
      else if constexpr (std::is_same_v<T, RemoveNode>)
        return "-node " + std::to_string(e.id);
      else {
        std::string s = "weight " + std::to_string(e.a) + ' ' + std::to_string(e.b);
        if (e.old_w)
          s += " w=" + number(*e.old_w);
        if (e.capacity)
          s += " capacity=" + number(*e.capacity);
        if (e.utilization)
          s += " utilization=" + number(*e.utilization);
        if (e.delay)
          s += " delay=" + number(*e.delay);
        return s;
      }
    },
    ev);
}

void
write_events(std::ostream& out, const EventScript& script)
{
  for (const auto& e : script.epochs) {
    if (e.reset_before)
      out << "reset\n";
    out << "epoch " << e.epoch << '\n';
    for (const auto& ev : e.events)
      out << format_event(ev) << '\n';
    for (const auto& p : e.policies) {
      if (p.add)
        out << "+policy " << p.id << ' ' << p.text << '\n';
      else
        out << "-policy " << p.id << '\n';
    }
    for (const auto& r : e.requests)
      out << "req " << r.flow_id << ' ' << r.src << ' ' << r.dst << '\n';
  }
}

void
write_rule_changes(std::ostream& out, std::uint64_t epoch, const RuleDeltaBatch& changes)
{
  for (const auto& r : changes)
    out << epoch << ',' << r.src << ',' << r.dst << ',' << r.next << ',' << format_cost(r.p_cost)
        << ',' << r.p_length << ',' << r.delta << '\n';
}

} // namespace deltapath
