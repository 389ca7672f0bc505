#include "genus/current_graph.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>

namespace genus {

int CurrentGraph::node_of_end(int end) const {
  for (size_t n = 0; n < node_rot.size(); ++n)
    for (int e : node_rot[n])
      if (e == end) return static_cast<int>(n);
  throw StructureError("end " + std::to_string(end) + " not in any rotation");
}

void CurrentGraph::validate_structure() const {
  std::vector<int> seen(2 * arcs.size(), 0);
  for (const auto& rot : node_rot)
    for (int e : rot) {
      if (e < 0 || e >= static_cast<int>(2 * arcs.size()))
        throw StructureError("rotation references unknown end " +
                             std::to_string(e));
      seen[e]++;
    }
  for (size_t e = 0; e < seen.size(); ++e)
    if (seen[e] != 1)
      throw StructureError("end " + std::to_string(e) + " placed " +
                           std::to_string(seen[e]) + " times");
  for (size_t a = 0; a < arcs.size(); ++a) {
    if (arcs[a].tail_end != tail_end_of(static_cast<int>(a)) ||
        arcs[a].head_end != head_end_of(static_cast<int>(a)))
      throw StructureError("arc " + std::to_string(a) + " has foreign ends");
  }
  for (auto& [node, letter] : vortex)
    if (node < 0 || node >= static_cast<int>(node_rot.size()))
      throw StructureError("vortex on unknown node " + std::to_string(node));
}

namespace {

// end -> node lookup table
std::vector<int> end_nodes(const CurrentGraph& cg) {
  std::vector<int> en(2 * cg.arcs.size(), -1);
  for (size_t n = 0; n < cg.node_rot.size(); ++n)
    for (int e : cg.node_rot[n]) en[e] = static_cast<int>(n);
  return en;
}

}  // namespace

std::vector<Circuit> trace_circuits(const CurrentGraph& cg) {
  auto en = end_nodes(cg);
  std::vector<std::array<bool, 2>> seen(cg.arcs.size(), {false, false});
  std::vector<Circuit> circuits;
  for (size_t a0 = 0; a0 < cg.arcs.size(); ++a0)
    for (int f0 = 1; f0 >= 0; --f0) {  // forward first
      bool fwd0 = f0 == 1;
      if (seen[a0][fwd0 ? 0 : 1]) continue;
      Circuit walk;
      int a = static_cast<int>(a0);
      bool fwd = fwd0;
      while (!seen[a][fwd ? 0 : 1]) {
        seen[a][fwd ? 0 : 1] = true;
        walk.push_back({a, fwd});
        int arrive = fwd ? cg.arcs[a].head_end : cg.arcs[a].tail_end;
        int n = en[arrive];
        if (n < 0) throw StructureError("dangling end during circuit trace");
        const auto& rot = cg.node_rot[n];
        auto it = std::find(rot.begin(), rot.end(), arrive);
        size_t i = it - rot.begin();
        int depart = rot[(i + rot.size() - 1) % rot.size()];
        a = arc_of_end(depart);
        fwd = end_is_tail(depart);
      }
      circuits.push_back(std::move(walk));
    }
  return circuits;
}

Log circuit_log(const CurrentGraph& cg, const Circuit& walk) {
  auto en = end_nodes(cg);
  Log out;
  int m = cg.modulus;
  for (const auto& tr : walk) {
    const Arc& a = cg.arcs[tr.arc];
    out.push_back(tr.forward ? a.current : (m - a.current) % m);
    int arrive = tr.forward ? a.head_end : a.tail_end;
    auto it = cg.vortex.find(en[arrive]);
    if (it != cg.vortex.end()) out.push_back(letter_vertex(it->second));
  }
  return out;
}

std::vector<std::array<int, 3>> circuit_labelings(
    const CurrentGraph& cg, const std::vector<Circuit>& circuits) {
  std::vector<std::array<int, 3>> valid;
  if (circuits.size() != 3) return valid;
  // (arc, fwd) -> circuit index
  std::vector<std::array<int, 2>> owner(cg.arcs.size(), {-1, -1});
  for (size_t ci = 0; ci < circuits.size(); ++ci)
    for (const auto& tr : circuits[ci])
      owner[tr.arc][tr.forward ? 0 : 1] = static_cast<int>(ci);
  std::array<int, 3> perm = {0, 1, 2};
  std::sort(perm.begin(), perm.end());
  do {
    bool ok = true;
    for (size_t a = 0; a < cg.arcs.size(); ++a) {
      int x = perm[owner[a][0]];  // circuit traversing forward
      int y = perm[owner[a][1]];
      if (((y - x) % 3 + 3) % 3 != cg.arcs[a].current % 3) {
        ok = false;
        break;
      }
    }
    if (ok) valid.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return valid;
}

std::string PrincipleReport::to_string() const {
  if (violations.empty()) return "all principles satisfied";
  std::ostringstream os;
  bool first = true;
  for (const auto& [p, ws] : violations) {
    if (!first) os << "; ";
    first = false;
    os << p << ":";
    for (const auto& w : ws) os << " " << w;
  }
  return os.str();
}

CircuitAnalysis verify_principles(const CurrentGraph& cg) {
  CircuitAnalysis res;
  auto& viol = res.report.violations;
  int m = cg.modulus;
  auto en = end_nodes(cg);

  for (size_t n = 0; n < cg.node_rot.size(); ++n) {
    size_t d = cg.node_rot[n].size();
    if (d != 1 && d != 3)
      viol["E1"].push_back("node " + std::to_string(n) + " degree " +
                           std::to_string(d));
  }
  res.circuits = trace_circuits(cg);
  if (res.circuits.size() != 3) {
    viol["E2"].push_back(std::to_string(res.circuits.size()) + " circuits");
    return res;
  }
  auto perms = circuit_labelings(cg, res.circuits);
  if (perms.empty()) {
    viol["E6"].push_back("no consistent circuit labeling");
    return res;
  }
  const auto& perm = perms.front();
  res.labeling = perm;
  std::vector<Circuit> ordered(3);
  for (int i = 0; i < 3; ++i) ordered[perm[i]] = res.circuits[i];
  res.circuits = std::move(ordered);

  int half = m % 2 == 0 ? m / 2 : -1;
  for (int li = 0; li < 3; ++li) {
    std::vector<int> cnt(m, 0);
    for (int e : circuit_log(cg, res.circuits[li]))
      if (!is_letter(e)) cnt[e]++;
    for (int v = 1; v < m; ++v) {
      int want = v == half ? 2 : 1;
      if (cnt[v] != want)
        viol["E3"].push_back("log[" + std::to_string(li) + "] has " +
                             std::to_string(cnt[v]) + " of element " +
                             std::to_string(v));
    }
  }

  for (size_t n = 0; n < cg.node_rot.size(); ++n) {
    if (cg.node_rot[n].size() != 3) continue;
    long exc = 0;
    for (int e : cg.node_rot[n]) {
      const Arc& a = cg.arcs[arc_of_end(e)];
      exc += end_is_tail(e) ? -a.current : a.current;
    }
    exc = ((exc % m) + m) % m;
    if (cg.vortex.count(static_cast<int>(n))) {
      if (std::gcd(exc, static_cast<long>(m)) != 3)
        viol["E5"].push_back("vortex node " + std::to_string(n) + " excess " +
                             std::to_string(exc));
    } else if (exc != 0) {
      viol["E4"].push_back("node " + std::to_string(n) + " excess " +
                           std::to_string(exc));
    }
  }

  for (const auto& [n, letter] : cg.vortex) {
    std::set<int> touched;
    for (int li = 0; li < 3; ++li)
      for (const auto& tr : res.circuits[li]) {
        int arrive =
            tr.forward ? cg.arcs[tr.arc].head_end : cg.arcs[tr.arc].tail_end;
        if (en[arrive] == n) touched.insert(li);
      }
    if (touched.size() != 3)
      viol["E5"].push_back("vortex node " + std::to_string(n) + " touches " +
                           std::to_string(touched.size()) + " circuits");
  }

  for (size_t n = 0; n < cg.node_rot.size(); ++n) {
    if (cg.node_rot[n].size() != 1) continue;
    int c = cg.arcs[arc_of_end(cg.node_rot[n][0])].current;
    int o = m / std::gcd(c, m);
    if (o != 2 && o != 3)
      viol["E7"].push_back("dead end node " + std::to_string(n) +
                           " current " + std::to_string(c) + " order " +
                           std::to_string(o));
  }
  return res;
}

std::vector<Log> logs_of(const CurrentGraph& cg) {
  auto res = verify_principles(cg);
  if (!res.report.ok())
    throw StructureError("construction principles violated: " +
                         res.report.to_string());
  std::vector<Log> logs;
  for (const auto& w : res.circuits) logs.push_back(circuit_log(cg, w));
  return logs;
}

RotationSystem derive_embedding(const CurrentGraph& cg) {
  int m = cg.modulus;
  auto logs = logs_of(cg);
  RotationSystem rot;
  rot.modulus = m;
  int half = m % 2 == 0 ? m / 2 : -1;
  for (int g = 0; g < m; ++g) {
    Row row;
    for (int e : logs[g % 3])
      row.push_back(is_letter(e) ? e : (e + g) % m);
    if (half >= 0) {
      // drop the second of the adjacent doubled order-2 entries (cyclically)
      int target = (g + half) % m;
      size_t n = row.size();
      std::vector<bool> drop(n, false);
      for (size_t i = 0; i < n; ++i) {
        size_t j = (i + 1) % n;
        if (!drop[i] && !drop[j] && row[i] == row[j] && row[i] == target)
          drop[j] = true;
      }
      Row out;
      for (size_t i = 0; i < n; ++i)
        if (!drop[i]) out.push_back(row[i]);
      row = std::move(out);
    }
    rot.rows[g] = std::move(row);
  }
  std::set<int> letters;
  for (auto& [node, letter] : cg.vortex) letters.insert(letter);
  for (int letter : letters) {
    Vertex w = letter_vertex(letter);
    Row row = {0};
    int cur = 0;
    while (true) {
      const Row& r = rot.rows.at(cur);
      auto it = std::find(r.begin(), r.end(), w);
      if (it == r.end())
        throw StructureError("vortex " + vertex_label(w) + " missing in row " +
                             std::to_string(cur));
      int nxt = r[(it - r.begin() + r.size() - 1) % r.size()];
      if (nxt == 0) break;
      if (std::find(row.begin(), row.end(), nxt) != row.end())
        throw StructureError("vortex " + vertex_label(w) +
                             " closure revisits " + std::to_string(nxt));
      row.push_back(nxt);
      cur = nxt;
      if (row.size() > static_cast<size_t>(m))
        throw StructureError("vortex closure overran");
    }
    if (row.size() != static_cast<size_t>(m))
      throw StructureError("vortex " + vertex_label(w) + " closure length " +
                           std::to_string(row.size()));
    rot.rows[w] = std::move(row);
  }
  return rot;
}

std::vector<LadderSpec> find_ladders(const CurrentGraph& cg) {
  int m = cg.modulus;
  std::vector<LadderSpec> out;
  auto logs = logs_of(cg);
  for (int li = 0; li < 3; ++li) {
    const Log& lg = logs[li];
    int n = static_cast<int>(lg.size());
    for (int p = 0; p < n; ++p) {
      int w[7];
      bool letters = false;
      for (int i = 0; i < 7; ++i) {
        w[i] = lg[(p + i) % n];
        letters |= is_letter(w[i]);
      }
      if (letters) continue;
      int g = w[3] % m;
      int r = w[2] % m;
      int t = (m - w[4] % m) % m;
      int h = ((w[5] - w[3]) % m + m) % m;
      if (h == 0 || h % 3 != 0) continue;
      if (((w[6] - w[2]) % m + m) % m != h) continue;
      if (((w[4] - w[0]) % m + m) % m != h) continue;
      if (((w[3] - w[1]) % m + m) % m != h) continue;
      out.push_back({g, r, t, h, li, p});
    }
  }
  return out;
}

std::vector<std::pair<int, int>> ladder_hexagon(const LadderSpec& lad, int m,
                                                int shift) {
  int g = lad.g, r = lad.r, t = lad.t, h = lad.h;
  std::vector<std::pair<int, int>> raw = {
      {0, (m - t % m) % m},
      {(m - t % m) % m, g % m},
      {g % m, h % m},
      {h % m, (r + h) % m},
      {(r + h) % m, (g + h) % m},
      {(g + h) % m, 0},
  };
  std::vector<std::pair<int, int>> out;
  for (auto& [u, v] : raw) {
    int a = (u + shift) % m, b = (v + shift) % m;
    out.push_back({std::min(a, b), std::max(a, b)});
  }
  return out;
}

RotationSystem subtract_handles(const RotationSystem& emb,
                                const LadderSpec& lad,
                                const std::vector<int>& shifts) {
  int m = emb.modulus;
  RotationSystem rot = emb;
  for (int sh : shifts) {
    if (sh % 3 != 0)
      throw StructureError("handle shift " + std::to_string(sh) +
                           " not divisible by 3");
    for (auto& [u, v] : ladder_hexagon(lad, m, sh)) {
      if (!rot.adjacent(u, v) || !rot.adjacent(v, u))
        throw StructureError("handle edge (" + std::to_string(u) + "," +
                             std::to_string(v) + ") absent at shift " +
                             std::to_string(sh));
      rot.remove_neighbor(u, v);
      rot.remove_neighbor(v, u);
    }
  }
  return rot;
}

void normalize_currents(CurrentGraph& cg) {
  int m = cg.modulus;
  for (size_t a = 0; a < cg.arcs.size(); ++a) {
    if (cg.keep_orientation.count(static_cast<int>(a))) continue;
    Arc& arc = cg.arcs[a];
    if (arc.current > m - arc.current) {
      // reverse the arc in place: the ends swap roles, current negates
      std::swap(arc.tail_end, arc.head_end);
      arc.current = m - arc.current;
    }
  }
}

int ArcBuilder::node() {
  cg_.node_rot.push_back({});
  slots_.push_back({});
  return static_cast<int>(cg_.node_rot.size()) - 1;
}

int ArcBuilder::arc(int tail_node, int head_node, long current) {
  int id = static_cast<int>(cg_.arcs.size());
  long c = current % cg_.modulus;
  if (c < 0) c += cg_.modulus;
  cg_.arcs.push_back({tail_end_of(id), head_end_of(id), static_cast<int>(c)});
  slots_[tail_node].push_back(tail_end_of(id));
  slots_[head_node].push_back(head_end_of(id));
  return id;
}

void ArcBuilder::set_rot(int node, const std::vector<int>& ends) {
  slots_[node] = ends;
}

CurrentGraph ArcBuilder::done() {
  for (size_t n = 0; n < cg_.node_rot.size(); ++n) cg_.node_rot[n] = slots_[n];
  cg_.validate_structure();
  return cg_;
}

// ---- text format ----

namespace {

std::string end_token(const CurrentGraph& cg, int end) {
  (void)cg;
  return std::to_string(arc_of_end(end)) + (end_is_tail(end) ? "t" : "h");
}

int parse_end_token(const std::string& tok) {
  if (tok.size() < 2) throw FormatError("bad end token '" + tok + "'");
  char side = tok.back();
  if (side != 't' && side != 'h')
    throw FormatError("end token must end in t or h: '" + tok + "'");
  int arc = std::stoi(tok.substr(0, tok.size() - 1));
  return side == 't' ? tail_end_of(arc) : head_end_of(arc);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct ParsedCG {
  CurrentGraph cg;
  std::vector<bool> assigned;
};

ParsedCG parse_current_graph(const std::string& text, bool allow_placeholder) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty current graph file");
  int modulus = -1;
  {
    std::istringstream hs(line);
    std::string word, kv;
    hs >> word;
    if (word != "currentgraph")
      throw FormatError("expected 'currentgraph' header");
    while (hs >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos || kv.substr(0, eq) != "modulus")
        throw FormatError("bad header token '" + kv + "'");
      modulus = std::stoi(kv.substr(eq + 1));
    }
    if (modulus <= 0) throw FormatError("missing modulus");
  }
  ParsedCG out;
  out.cg.modulus = modulus;

  struct NodeLine {
    int id;
    std::vector<int> ends;
    int vortex = -1;
  };
  std::vector<NodeLine> nodes;
  struct ArcLine {
    int id;
    int tail_node, tail_slot, head_node, head_slot;
    int current;
    bool has_current;
  };
  std::vector<ArcLine> arcs;

  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "node") {
      NodeLine nl;
      ls >> nl.id;
      std::string kv;
      while (ls >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw FormatError("bad node token '" + kv + "'");
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "rot") {
          for (const auto& tok : split(val, ','))
            nl.ends.push_back(parse_end_token(tok));
        } else if (key == "vortex") {
          if (val.size() != 1 || val[0] < 'a' || val[0] > 'h')
            throw FormatError("bad vortex letter '" + val + "'");
          nl.vortex = val[0] - 'a';
        } else {
          throw FormatError("unknown node key '" + key + "'");
        }
      }
      if (nl.ends.empty()) throw FormatError("node without rotation");
      nodes.push_back(std::move(nl));
    } else if (kind == "arc") {
      ArcLine al;
      ls >> al.id;
      std::string kv;
      al.has_current = false;
      al.tail_node = al.head_node = -1;
      while (ls >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw FormatError("bad arc token '" + kv + "'");
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        if (key == "tail" || key == "head") {
          auto dot = val.find('.');
          if (dot == std::string::npos)
            throw FormatError("bad node.slot '" + val + "'");
          int nd = std::stoi(val.substr(0, dot));
          int sl = std::stoi(val.substr(dot + 1));
          if (key == "tail") {
            al.tail_node = nd;
            al.tail_slot = sl;
          } else {
            al.head_node = nd;
            al.head_slot = sl;
          }
        } else if (key == "current") {
          if (val == "?") {
            if (!allow_placeholder)
              throw FormatError("unassigned current in current graph file");
            al.has_current = false;
          } else {
            al.current = std::stoi(val);
            al.has_current = true;
          }
        } else {
          throw FormatError("unknown arc key '" + key + "'");
        }
      }
      if (al.tail_node < 0 || al.head_node < 0)
        throw FormatError("arc " + std::to_string(al.id) +
                          " missing tail/head");
      arcs.push_back(al);
    } else {
      throw FormatError("unknown line kind '" + kind + "'");
    }
  }

  std::sort(nodes.begin(), nodes.end(),
            [](const NodeLine& a, const NodeLine& b) { return a.id < b.id; });
  std::sort(arcs.begin(), arcs.end(),
            [](const ArcLine& a, const ArcLine& b) { return a.id < b.id; });
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id != static_cast<int>(i))
      throw FormatError("node ids must be 0..N-1 without gaps");
  for (size_t i = 0; i < arcs.size(); ++i)
    if (arcs[i].id != static_cast<int>(i))
      throw FormatError("arc ids must be 0..A-1 without gaps");

  for (const auto& nl : nodes) {
    out.cg.node_rot.push_back(nl.ends);
    if (nl.vortex >= 0) out.cg.vortex[nl.id] = nl.vortex;
  }
  out.assigned.resize(arcs.size(), true);
  for (const auto& al : arcs) {
    int c = al.has_current ? ((al.current % out.cg.modulus) +
                              out.cg.modulus) % out.cg.modulus
                           : 0;
    out.cg.arcs.push_back({tail_end_of(al.id), head_end_of(al.id), c});
    out.assigned[al.id] = al.has_current;
    // validate the redundant slot references against the rotations
    auto check_slot = [&](int nd, int sl, int want_end, const char* what) {
      if (nd < 0 || nd >= static_cast<int>(out.cg.node_rot.size()))
        throw FormatError("arc references unknown node " + std::to_string(nd));
      const auto& rot = out.cg.node_rot[nd];
      if (sl < 0 || sl >= static_cast<int>(rot.size()))
        throw FormatError("arc references slot out of range on node " +
                          std::to_string(nd));
      if (rot[sl] != want_end)
        throw FormatError(std::string(what) + " slot of arc " +
                          std::to_string(al.id) +
                          " disagrees with node rotation");
    };
    check_slot(al.tail_node, al.tail_slot, tail_end_of(al.id), "tail");
    check_slot(al.head_node, al.head_slot, head_end_of(al.id), "head");
    if (al.has_current && c == 0)
      throw FormatError("arc " + std::to_string(al.id) + " has zero current");
  }
  out.cg.validate_structure();
  return out;
}

std::string format_current_graph(const CurrentGraph& cg,
                                 const std::vector<bool>* assigned) {
  std::ostringstream os;
  os << "currentgraph modulus=" << cg.modulus << "\n";
  auto en = end_nodes(cg);
  for (size_t n = 0; n < cg.node_rot.size(); ++n) {
    os << "node " << n << " rot=";
    for (size_t i = 0; i < cg.node_rot[n].size(); ++i) {
      if (i) os << ",";
      os << end_token(cg, cg.node_rot[n][i]);
    }
    auto it = cg.vortex.find(static_cast<int>(n));
    if (it != cg.vortex.end())
      os << " vortex=" << static_cast<char>('a' + it->second);
    os << "\n";
  }
  auto slot_of = [&](int end) {
    int n = en[end];
    const auto& rot = cg.node_rot[n];
    auto it = std::find(rot.begin(), rot.end(), end);
    return std::pair<int, int>(n, static_cast<int>(it - rot.begin()));
  };
  for (size_t a = 0; a < cg.arcs.size(); ++a) {
    auto [tn, ts] = slot_of(cg.arcs[a].tail_end);
    auto [hn, hs] = slot_of(cg.arcs[a].head_end);
    os << "arc " << a << " tail=" << tn << "." << ts << " head=" << hn << "."
       << hs << " current=";
    if (assigned && !(*assigned)[a]) os << "?";
    else os << cg.arcs[a].current;
    os << "\n";
  }
  return os.str();
}

}  // namespace

std::string write_current_graph(const CurrentGraph& cg) {
  return format_current_graph(cg, nullptr);
}

CurrentGraph read_current_graph(const std::string& text) {
  auto parsed = parse_current_graph(text, false);
  return parsed.cg;
}

std::string write_skeleton(const Skeleton& sk) {
  return format_current_graph(sk.cg, &sk.assigned);
}

Skeleton read_skeleton(const std::string& text) {
  auto parsed = parse_current_graph(text, true);
  return {parsed.cg, parsed.assigned};
}

}  // namespace genus
