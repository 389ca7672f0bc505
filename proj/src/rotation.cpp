#include "genus/rotation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace genus {

std::string vertex_label(Vertex v) {
  if (is_letter(v)) return std::string(1, letter_char(v));
  return std::to_string(v);
}

Vertex parse_vertex_label(const std::string& tok) {
  if (tok.empty()) throw FormatError("empty vertex label");
  if (tok.size() == 1 && tok[0] >= 'a' && tok[0] <= 'h')
    return letter_vertex(tok[0] - 'a');
  for (char c : tok)
    if (c < '0' || c > '9')
      throw FormatError("bad vertex label '" + tok + "'");
  return std::stoi(tok);
}

int RotationSystem::letters() const {
  int n = 0;
  for (const auto& [v, r] : rows)
    if (is_letter(v)) ++n;
  return n;
}

const Row& RotationSystem::row(Vertex v) const {
  auto it = rows.find(v);
  if (it == rows.end())
    throw StructureError("no row for vertex " + vertex_label(v));
  return it->second;
}

Row& RotationSystem::row_mut(Vertex v) {
  auto it = rows.find(v);
  if (it == rows.end())
    throw StructureError("no row for vertex " + vertex_label(v));
  return it->second;
}

long RotationSystem::edge_count() const {
  long ends = 0;
  for (const auto& [v, r] : rows) ends += static_cast<long>(r.size());
  return ends / 2;
}

int RotationSystem::index_of(Vertex u, Vertex nb) const {
  const Row& r = row(u);
  auto it = std::find(r.begin(), r.end(), nb);
  if (it == r.end()) return -1;
  return static_cast<int>(it - r.begin());
}

bool RotationSystem::adjacent(Vertex u, Vertex v) const {
  auto it = rows.find(u);
  if (it == rows.end()) return false;
  return std::find(it->second.begin(), it->second.end(), v) != it->second.end();
}

Vertex RotationSystem::succ(Vertex u, Vertex nb) const {
  const Row& r = row(u);
  int i = index_of(u, nb);
  if (i < 0)
    throw StructureError(vertex_label(nb) + " not in row " + vertex_label(u));
  return r[(i + 1) % r.size()];
}

Vertex RotationSystem::pred(Vertex u, Vertex nb) const {
  const Row& r = row(u);
  int i = index_of(u, nb);
  if (i < 0)
    throw StructureError(vertex_label(nb) + " not in row " + vertex_label(u));
  return r[(i + r.size() - 1) % r.size()];
}

void RotationSystem::insert_after(Vertex u, Vertex anchor, Vertex nb) {
  Row& r = row_mut(u);
  int i = index_of(u, anchor);
  if (i < 0)
    throw StructureError("anchor " + vertex_label(anchor) + " not in row " +
                         vertex_label(u));
  r.insert(r.begin() + i + 1, nb);
}

void RotationSystem::insert_before(Vertex u, Vertex anchor, Vertex nb) {
  Row& r = row_mut(u);
  int i = index_of(u, anchor);
  if (i < 0)
    throw StructureError("anchor " + vertex_label(anchor) + " not in row " +
                         vertex_label(u));
  r.insert(r.begin() + i, nb);
}

void RotationSystem::remove_neighbor(Vertex u, Vertex nb) {
  Row& r = row_mut(u);
  int i = index_of(u, nb);
  if (i < 0)
    throw StructureError(vertex_label(nb) + " not in row " + vertex_label(u));
  r.erase(r.begin() + i);
}

void RotationSystem::check() const {
  for (const auto& [u, r] : rows) {
    if (r.empty())
      throw StructureError("empty row at " + vertex_label(u));
    std::set<Vertex> seen;
    for (Vertex v : r) {
      if (v == u) throw StructureError("self-loop at " + vertex_label(u));
      if (!seen.insert(v).second)
        throw StructureError("duplicate neighbor " + vertex_label(v) +
                             " in row " + vertex_label(u));
      if (!adjacent(v, u))
        throw StructureError("asymmetric adjacency (" + vertex_label(u) + "," +
                             vertex_label(v) + ")");
    }
  }
}

std::vector<Face> trace_faces(const RotationSystem& rot) {
  // Directed edges in canonical order so face enumeration is deterministic.
  std::set<DirEdge, bool (*)(const DirEdge&, const DirEdge&)> untraced(
      +[](const DirEdge& a, const DirEdge& b) {
        VertexLess lt;
        if (lt(a.first, b.first)) return true;
        if (lt(b.first, a.first)) return false;
        return lt(a.second, b.second);
      });
  for (const auto& [u, r] : rot.rows)
    for (Vertex v : r) untraced.insert({u, v});

  std::vector<Face> faces;
  while (!untraced.empty()) {
    DirEdge start = *untraced.begin();
    Face face;
    DirEdge e = start;
    do {
      if (untraced.erase(e) == 0)
        throw StructureError("face tracing revisited a directed edge");
      face.push_back(e);
      e = {e.second, rot.pred(e.second, e.first)};
    } while (e != start);
    faces.push_back(std::move(face));
  }
  return faces;
}

std::string EmbeddingSummary::to_string() const {
  std::ostringstream os;
  os << "V=" << vertices << " E=" << edges << " F=" << faces
     << " genus=" << genus;
  if (triangular) os << " triangular";
  return os.str();
}

EmbeddingSummary analyze(const RotationSystem& rot) {
  rot.check();
  auto faces = trace_faces(rot);
  EmbeddingSummary s;
  s.vertices = rot.vertex_count();
  s.edges = rot.edge_count();
  s.faces = static_cast<long>(faces.size());
  long chi = s.vertices - s.edges + s.faces;
  if (chi % 2 != 0)
    throw StructureError("odd Euler characteristic — not an orientable map");
  s.genus = static_cast<int>((2 - chi) / 2);
  s.triangular = std::all_of(faces.begin(), faces.end(),
                             [](const Face& f) { return f.size() == 3; });
  return s;
}

bool is_triangular_ruler(const RotationSystem& rot) {
  // Directed edge (u,v) lies on a triangle iff with w = pred_v(u) we get
  // pred_w(v) == u; all faces are triangles iff this holds everywhere.
  for (const auto& [u, r] : rot.rows)
    for (Vertex v : r) {
      Vertex w = rot.pred(v, u);
      if (!rot.adjacent(w, v)) return false;
      if (rot.pred(w, v) != u) return false;
    }
  return true;
}

std::vector<std::pair<Vertex, Vertex>> deficit_edges(
    const RotationSystem& rot) {
  std::vector<Vertex> verts;
  for (const auto& [v, r] : rot.rows) verts.push_back(v);
  std::vector<std::pair<Vertex, Vertex>> out;
  for (size_t i = 0; i < verts.size(); ++i)
    for (size_t j = i + 1; j < verts.size(); ++j)
      if (!rot.adjacent(verts[i], verts[j]))
        out.push_back({verts[i], verts[j]});
  return out;
}

std::string Deficit::name() const {
  switch (kind) {
    case DeficitKind::Empty: return "Empty";
    case DeficitKind::Kl: return "K" + std::to_string(l);
    case DeficitKind::K13: return "K13";
    case DeficitKind::K14: return "K14";
    case DeficitKind::C4: return "C4";
    case DeficitKind::Other: return "Other";
  }
  return "Other";
}

Deficit classify_deficit(const RotationSystem& rot) {
  Deficit d;
  d.edges = deficit_edges(rot);
  if (d.edges.empty()) {
    d.kind = DeficitKind::Empty;
    return d;
  }
  std::set<Vertex, VertexLess> support;
  for (auto& [a, b] : d.edges) {
    support.insert(a);
    support.insert(b);
  }
  size_t k = support.size();
  if (d.edges.size() == k * (k - 1) / 2 && k <= 8) {
    // every support pair missing?
    bool complete = true;
    std::vector<Vertex> sv(support.begin(), support.end());
    for (size_t i = 0; i < sv.size() && complete; ++i)
      for (size_t j = i + 1; j < sv.size(); ++j)
        if (rot.adjacent(sv[i], sv[j])) {
          complete = false;
          break;
        }
    if (complete) {
      d.kind = DeficitKind::Kl;
      d.l = static_cast<int>(k);
      return d;
    }
  }
  // star K_{1,3} / K_{1,4}: all missing edges share one center vertex
  if (d.edges.size() == 3 || d.edges.size() == 4) {
    std::map<Vertex, int, VertexLess> cnt;
    for (auto& [a, b] : d.edges) {
      cnt[a]++;
      cnt[b]++;
    }
    for (auto& [v, c] : cnt)
      if (c == static_cast<int>(d.edges.size()) &&
          k == d.edges.size() + 1) {
        d.kind = d.edges.size() == 3 ? DeficitKind::K13 : DeficitKind::K14;
        return d;
      }
  }
  // 4-cycle: 4 missing edges, 4 support vertices, each of degree 2
  if (d.edges.size() == 4 && k == 4) {
    std::map<Vertex, int, VertexLess> cnt;
    for (auto& [a, b] : d.edges) {
      cnt[a]++;
      cnt[b]++;
    }
    bool all2 = std::all_of(cnt.begin(), cnt.end(),
                            [](auto& kv) { return kv.second == 2; });
    if (all2) {
      d.kind = DeficitKind::C4;
      return d;
    }
  }
  d.kind = DeficitKind::Other;
  return d;
}

int genus_Kn(int n) {
  if (n < 3) throw std::domain_error("genus_Kn requires n >= 3");
  long a = static_cast<long>(n - 3) * (n - 4);
  return static_cast<int>((a + 11) / 12);
}

bool mt_valid(int n, int t) {
  if (n < 4) return false;
  if (t < 0 || t > n - 6) return false;
  long a = static_cast<long>(n - 3) * (n - 4);
  if ((a - 2L * t) % 12 != 0) return false;
  if (n == 9 && t == 3) return false;
  return true;
}

Row canonical_row(const Row& r) {
  if (r.empty()) return r;
  VertexLess lt;
  size_t best = 0;
  for (size_t i = 1; i < r.size(); ++i)
    if (lt(r[i], r[best])) best = i;
  Row out;
  out.reserve(r.size());
  for (size_t i = 0; i < r.size(); ++i) out.push_back(r[(best + i) % r.size()]);
  return out;
}

bool cyclic_equal(const Row& a, const Row& b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  for (size_t s = 0; s < b.size(); ++s) {
    bool ok = true;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[(s + i) % b.size()]) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

std::string write_rotation(const RotationSystem& rot) {
  std::ostringstream os;
  os << "rotation modulus=" << rot.modulus << " letters=" << rot.letters()
     << "\n";
  for (const auto& [v, r] : rot.rows) {
    os << vertex_label(v) << ".";
    for (Vertex nb : canonical_row(r)) os << " " << vertex_label(nb);
    os << "\n";
  }
  return os.str();
}

RotationSystem read_rotation(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw FormatError("empty rotation file");
  int modulus = -1, letters = -1;
  {
    std::istringstream hs(line);
    std::string word, kv;
    hs >> word;
    if (word != "rotation")
      throw FormatError("expected 'rotation' header, got '" + word + "'");
    while (hs >> kv) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw FormatError("bad header token '" + kv + "'");
      std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
      if (key == "modulus") modulus = std::stoi(val);
      else if (key == "letters") letters = std::stoi(val);
      else throw FormatError("unknown header key '" + key + "'");
    }
  }
  if (modulus <= 0) throw FormatError("missing or non-positive modulus");
  if (letters < 0 || letters > kMaxLetters)
    throw FormatError("letters out of range");

  RotationSystem rot;
  rot.modulus = modulus;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string lab;
    ls >> lab;
    if (lab.empty() || lab.back() != '.')
      throw FormatError("row label must end with '.': '" + line + "'");
    Vertex v = parse_vertex_label(lab.substr(0, lab.size() - 1));
    Row r;
    std::string tok;
    while (ls >> tok) r.push_back(parse_vertex_label(tok));
    if (r.empty()) throw FormatError("empty row for " + vertex_label(v));
    if (rot.rows.count(v))
      throw FormatError("duplicate row for " + vertex_label(v));
    rot.rows[v] = std::move(r);
  }
  if (rot.rows.empty()) throw FormatError("rotation file has no rows");

  int num = 0, let = 0;
  for (const auto& [v, r] : rot.rows) {
    if (is_letter(v)) ++let;
    else ++num;
  }
  if (num != modulus)
    throw FormatError("modulus=" + std::to_string(modulus) + " but " +
                      std::to_string(num) + " numbered rows present");
  if (let != letters)
    throw FormatError("letters=" + std::to_string(letters) + " but " +
                      std::to_string(let) + " letter rows present");
  rot.check();
  return rot;
}

}  // namespace genus
