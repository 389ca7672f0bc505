#include "genus/surgery.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <sstream>

namespace genus {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw SurgeryError(msg);
}

std::string pair_str(Vertex a, Vertex b) {
  return "(" + vertex_label(a) + "," + vertex_label(b) + ")";
}

}  // namespace

std::vector<Corner> corners_of(const Face& face) {
  std::vector<Corner> out;
  size_t k = face.size();
  for (size_t i = 0; i < k; ++i)
    out.push_back({face[i].first, face[i].second,
                   face[(i + k - 1) % k].first});
  return out;
}

PairSet deficit_pairs(const RotationSystem& rot) {
  PairSet out;
  for (auto& [a, b] : deficit_edges(rot)) out.insert(VPair(a, b));
  return out;
}

PairSet letter_pairs(const RotationSystem& rot) {
  PairSet out;
  for (auto& [a, b] : deficit_edges(rot))
    if (is_letter(a) && is_letter(b)) out.insert(VPair(a, b));
  return out;
}

void insert_between(RotationSystem& rot, Vertex a, Vertex out_a, Vertex in_a,
                    Vertex b) {
  Row& r = rot.row_mut(a);
  size_t L = r.size();
  for (size_t p = 0; p < L; ++p)
    if (r[p] == out_a && r[(p + 1) % L] == in_a) {
      r.insert(r.begin() + p + 1, b);
      return;
    }
  throw SurgeryError("pair " + pair_str(out_a, in_a) +
                     " not adjacent in row " + vertex_label(a));
}

void add_edge_at(RotationSystem& rot, const Corner& ca, const Corner& cb) {
  require(ca.v != cb.v, "chord endpoints equal");
  require(!rot.adjacent(ca.v, cb.v),
          "edge " + pair_str(ca.v, cb.v) + " already present");
  insert_between(rot, ca.v, ca.out, ca.in, cb.v);
  insert_between(rot, cb.v, cb.out, cb.in, ca.v);
}

void delete_edge(RotationSystem& rot, Vertex u, Vertex v) {
  rot.remove_neighbor(u, v);
  rot.remove_neighbor(v, u);
}

void rotate_row(RotationSystem& rot, Vertex v, Vertex start) {
  Row& r = rot.row_mut(v);
  int i = rot.index_of(v, start);
  require(i >= 0, vertex_label(start) + " not in row " + vertex_label(v));
  std::rotate(r.begin(), r.begin() + i, r.end());
}

std::pair<Vertex, Vertex> edge_flip(RotationSystem& rot, Vertex u, Vertex v) {
  Vertex x = rot.succ(u, v);
  Vertex y = rot.succ(v, u);
  require(rot.pred(v, u) == x && rot.pred(u, v) == y,
          "flip " + pair_str(u, v) + ": not locally triangular");
  require(!rot.adjacent(x, y),
          "flip would duplicate edge " + pair_str(x, y));
  rot.remove_neighbor(u, v);
  rot.remove_neighbor(v, u);
  insert_between(rot, x, u, v, y);
  insert_between(rot, y, v, u, x);
  return {x, y};
}

void construction1(RotationSystem& rot, Vertex v, Vertex start_y,
                   Vertex start_z) {
  Row& r = rot.row_mut(v);
  int i = rot.index_of(v, start_y);
  int j = rot.index_of(v, start_z);
  require(0 < i && i < j && j < static_cast<int>(r.size()),
          "construction1: bad cuts in row " + vertex_label(v));
  Row nr;
  nr.insert(nr.end(), r.begin(), r.begin() + i);
  nr.insert(nr.end(), r.begin() + j, r.end());
  nr.insert(nr.end(), r.begin() + i, r.begin() + j);
  r = std::move(nr);
}

void construction2(RotationSystem& rot, Vertex v, Vertex start_y,
                   Vertex start_z, Vertex start_w) {
  Row& r = rot.row_mut(v);
  int i = rot.index_of(v, start_y);
  int j = rot.index_of(v, start_z);
  int k = rot.index_of(v, start_w);
  require(0 < i && i < j && j < k && k < static_cast<int>(r.size()),
          "construction2: bad cuts in row " + vertex_label(v));
  Row nr;
  nr.insert(nr.end(), r.begin(), r.begin() + i);
  nr.insert(nr.end(), r.begin() + k, r.end());
  nr.insert(nr.end(), r.begin() + j, r.begin() + k);
  nr.insert(nr.end(), r.begin() + i, r.begin() + j);
  r = std::move(nr);
}

void construction3(RotationSystem& rot, const Corner& ca, const Corner& cb) {
  add_edge_at(rot, ca, cb);
}

bool chords_cross(const CornerChord& c1, const CornerChord& c2, int k) {
  auto [i, j] = c1;
  auto [p, q] = c2;
  auto inside = [k](int x, int lo, int hi) {
    return (x - lo + k) % k < (hi - lo + k) % k && x != lo;
  };
  if (p == i || p == j || q == i || q == j) return false;
  return inside(p, i, j) != inside(q, i, j);
}

void apply_chords(RotationSystem& rot, const Face& face,
                  const std::vector<CornerChord>& chords) {
  int k = static_cast<int>(face.size());
  std::map<int, Corner> cor0;
  {
    auto cs = corners_of(face);
    for (int i = 0; i < k; ++i) cor0[i] = cs[i];
  }

  std::function<void(std::vector<CornerChord>, std::map<int, Corner>)> rec =
      [&](std::vector<CornerChord> pend, std::map<int, Corner> cor) {
        if (pend.empty()) return;
        auto [i, j] = pend.front();
        Corner a = cor.at(i), b = cor.at(j);
        add_edge_at(rot, a, b);
        Vertex va = a.v, vb = b.v;
        std::set<int> strict_a;
        for (int x = (i + 1) % k; x != j; x = (x + 1) % k) strict_a.insert(x);
        auto cor_a = cor;
        cor_a[i] = {va, a.out, vb};
        cor_a[j] = {vb, va, b.in};
        auto cor_b = cor;
        cor_b[i] = {va, vb, a.in};
        cor_b[j] = {vb, b.out, va};
        std::vector<CornerChord> pa, pb;
        for (size_t t = 1; t < pend.size(); ++t) {
          auto [p, q] = pend[t];
          std::vector<int> ends;
          for (int x : {p, q})
            if (x != i && x != j) ends.push_back(x);
          bool to_a = !ends.empty() &&
                      std::all_of(ends.begin(), ends.end(),
                                  [&](int x) { return strict_a.count(x); });
          (to_a ? pa : pb).push_back(pend[t]);
        }
        rec(std::move(pa), std::move(cor_a));
        rec(std::move(pb), std::move(cor_b));
      };
  rec(chords, cor0);
}

std::vector<CornerChord> place_chords(RotationSystem& rot, const Face& face,
                                      const std::vector<VPair>& pairs) {
  auto cor = corners_of(face);
  int k = static_cast<int>(face.size());
  std::map<Vertex, std::vector<int>, VertexLess> pos;
  for (int i = 0; i < k; ++i) pos[cor[i].v].push_back(i);

  std::vector<CornerChord> chosen;
  std::function<bool(size_t)> bt = [&](size_t t) {
    if (t == pairs.size()) return true;
    Vertex a = pairs[t].a, b = pairs[t].b;
    for (int i : pos.count(a) ? pos[a] : std::vector<int>{})
      for (int j : pos.count(b) ? pos[b] : std::vector<int>{}) {
        CornerChord c{i, j};
        bool ok = std::all_of(chosen.begin(), chosen.end(), [&](auto& d) {
          return !chords_cross(c, d, k);
        });
        if (!ok) continue;
        chosen.push_back(c);
        if (bt(t + 1)) return true;
        chosen.pop_back();
      }
    return false;
  };
  require(bt(0), "cannot place chords in face");
  apply_chords(rot, face, chosen);
  return chosen;
}

void find_fills(
    const std::vector<Vertex>& vals, const PairSet& allowed,
    const std::function<bool(const std::vector<CornerChord>&)>& cb) {
  int k = static_cast<int>(vals.size());
  PairSet used;
  std::vector<CornerChord> out;

  std::function<bool(std::vector<std::vector<int>>)> rec =
      [&](std::vector<std::vector<int>> regions) -> bool {
    if (regions.empty()) return cb(out);
    auto region = regions.front();
    std::vector<std::vector<int>> rest(regions.begin() + 1, regions.end());
    if (region.size() <= 3) return rec(rest);
    int m = static_cast<int>(region.size());
    int c0 = region.front(), cm = region.back();
    for (int t = 1; t < m - 1; ++t) {
      int ck = region[t];
      std::vector<CornerChord> need;
      if (t != 1) need.push_back({c0, ck});
      if (t != m - 2) need.push_back({ck, cm});
      bool ok = true;
      std::vector<VPair> prs;
      for (auto& [x, y] : need) {
        Vertex fx = vals[x], fy = vals[y];
        if (fx == fy) {
          ok = false;
          break;
        }
        VPair pr(fx, fy);
        if (!allowed.count(pr) || used.count(pr) ||
            std::find(prs.begin(), prs.end(), pr) != prs.end()) {
          ok = false;
          break;
        }
        prs.push_back(pr);
      }
      if (!ok) continue;
      for (auto& c : need) out.push_back(c);
      for (auto& pr : prs) used.insert(pr);
      std::vector<std::vector<int>> next;
      next.push_back(std::vector<int>(region.begin(), region.begin() + t + 1));
      next.push_back(std::vector<int>(region.begin() + t, region.end()));
      for (auto& r : rest) next.push_back(r);
      bool stop = rec(std::move(next));
      for (size_t q = 0; q < need.size(); ++q) out.pop_back();
      for (auto& pr : prs) used.erase(pr);
      if (stop) return true;
    }
    return false;
  };
  std::vector<int> all(k);
  for (int i = 0; i < k; ++i) all[i] = i;
  rec({all});
}

PairSet fill_face(RotationSystem& rot, const Face& face,
                  const PairSet& allowed) {
  std::vector<Vertex> vals;
  for (auto& c : corners_of(face)) vals.push_back(c.v);
  std::vector<CornerChord> found;
  bool got = false;
  find_fills(vals, allowed, [&](const std::vector<CornerChord>& chords) {
    found = chords;
    got = true;
    return true;
  });
  require(got, "no triangulating fill for face");
  apply_chords(rot, face, found);
  PairSet usedp;
  for (auto& [i, j] : found) usedp.insert(VPair(vals[i], vals[j]));
  return usedp;
}

void handle_candidates(
    const RotationSystem& rot, const PairSet& targets,
    const std::function<bool(const Face&)>& face_filter,
    const std::function<bool(RotationSystem&, const PairSet&)>& cb) {
  auto all_faces = trace_faces(rot);
  std::vector<Face> faces;
  for (auto& f : all_faces)
    if (!face_filter || face_filter(f)) faces.push_back(f);
  std::set<PairSet> seen;
  for (size_t fi = 0; fi < faces.size(); ++fi)
    for (size_t fj = 0; fj < faces.size(); ++fj) {
      if (fi == fj) continue;
      const Face& f1 = faces[fi];
      const Face& f2 = faces[fj];
      for (const auto& ca : corners_of(f1))
        for (const auto& cb2 : corners_of(f2)) {
          if (ca.v == cb2.v) continue;
          VPair pr(ca.v, cb2.v);
          if (!targets.count(pr)) continue;
          RotationSystem rot2 = rot;
          construction3(rot2, ca, cb2);
          auto faces2 = trace_faces(rot2);
          const Face* merged = nullptr;
          for (auto& f : faces2)
            if (std::find(f.begin(), f.end(),
                          DirEdge{ca.v, cb2.v}) != f.end()) {
              merged = &f;
              break;
            }
          if (!merged ||
              merged->size() != f1.size() + f2.size() + 2)
            continue;
          PairSet rest = targets;
          rest.erase(pr);
          std::vector<Vertex> vals;
          for (auto& c : corners_of(*merged)) vals.push_back(c.v);
          bool stop = false;
          find_fills(vals, rest, [&](const std::vector<CornerChord>& chords) {
            PairSet consumed;
            consumed.insert(pr);
            for (auto& [i, j] : chords)
              consumed.insert(VPair(vals[i], vals[j]));
            if (!seen.insert(consumed).second) return false;
            RotationSystem rot3 = rot2;
            apply_chords(rot3, *merged, chords);
            stop = cb(rot3, consumed);
            return stop;
          });
          if (stop) return;
        }
    }
}

// ---------------- pipelines ----------------

namespace {

std::string stage_name(const RotationSystem& rot, const EmbeddingSummary& s,
                       const Deficit& d) {
  long n = s.vertices;
  (void)rot;
  if (d.kind == DeficitKind::Empty) return "K" + std::to_string(n);
  return "(" + std::to_string(n) + "," + std::to_string(d.edges.size()) +
         ")-triangulation";
}

// faces of given length, with a uniqueness requirement
Face unique_face_of_length(const RotationSystem& rot, size_t len) {
  Face out;
  int count = 0;
  for (auto& f : trace_faces(rot))
    if (f.size() == len) {
      out = f;
      ++count;
    }
  require(count == 1, "expected a unique " + std::to_string(len) +
                          "-gon, found " + std::to_string(count));
  return out;
}

struct StarParts {
  DeficitKind kind;
  Vertex u;
  std::vector<Vertex> leaves;
};

StarParts star_parts(const RotationSystem& rot) {
  Deficit d = classify_deficit(rot);
  std::map<Vertex, int, VertexLess> deg;
  for (auto& [a, b] : d.edges) {
    deg[a]++;
    deg[b]++;
  }
  Vertex u = 0;
  int best = -1;
  for (auto& [v, c] : deg)
    if (c > best) {
      best = c;
      u = v;
    }
  std::vector<Vertex> leaves;
  for (auto& [v, c] : deg)
    if (v != u) leaves.push_back(v);
  return {d.kind, u, leaves};
}

}  // namespace

void push_stage(SurgeryOutcome& out, const RotationSystem& rot,
                const std::string& op_note) {
  Stage st;
  st.rot = rot;
  st.summary = analyze(rot);
  st.deficit = classify_deficit(rot);
  st.name = stage_name(rot, st.summary, st.deficit);
  if (!op_note.empty()) out.transcript.push_back(op_note);
  out.transcript.push_back("stage " + st.name + ": " + st.summary.to_string() +
                           " deficit=" + st.deficit.name());
  out.stages.push_back(std::move(st));
}

SurgeryOutcome complete_k2(const RotationSystem& rot) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  Deficit d = classify_deficit(rot);
  require(d.kind == DeficitKind::Kl && d.l == 2,
          "complete_k2 needs deficit K2, got " + d.name());
  Vertex v1 = d.edges[0].first, v2 = d.edges[0].second;
  auto faces = trace_faces(rot);
  const Face* f1 = nullptr;
  const Face* f2 = nullptr;
  for (auto& f : faces) {
    bool at1 = std::any_of(f.begin(), f.end(),
                           [&](const DirEdge& e) { return e.first == v1; });
    if (at1) {
      f1 = &f;
      break;
    }
  }
  require(f1 != nullptr, "no face at " + vertex_label(v1));
  for (auto& f : faces) {
    if (&f == f1) continue;
    bool at2 = std::any_of(f.begin(), f.end(),
                           [&](const DirEdge& e) { return e.first == v2; });
    if (at2) {
      f2 = &f;
      break;
    }
  }
  require(f2 != nullptr, "no second face at " + vertex_label(v2));
  Corner ca{}, cb{};
  for (auto& c : corners_of(*f1))
    if (c.v == v1) {
      ca = c;
      break;
    }
  for (auto& c : corners_of(*f2))
    if (c.v == v2) {
      cb = c;
      break;
    }
  RotationSystem work = rot;
  construction3(work, ca, cb);
  push_stage(out, work,
             "construction3: merge faces at " + vertex_label(v1) + " and " +
                 vertex_label(v2) + ", add edge " + pair_str(v1, v2));
  return out;
}

SurgeryOutcome complete_k3(const RotationSystem& rot) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  Deficit d = classify_deficit(rot);
  require(d.kind == DeficitKind::Kl && d.l == 3,
          "complete_k3 needs deficit K3, got " + d.name());
  std::set<Vertex, VertexLess> sup;
  for (auto& [x, y] : d.edges) {
    sup.insert(x);
    sup.insert(y);
  }
  auto it = sup.begin();
  Vertex a = *it++, b = *it++, c = *it;
  Vertex v = 0;
  bool found = false;
  for (auto& [x, r] : rot.rows)
    if (x != a && x != b && x != c) {
      v = x;
      found = true;
      break;
    }
  require(found, "no splitting vertex available");
  RotationSystem work = rot;
  rotate_row(work, v, a);
  Vertex y = b, z = c;
  if (work.index_of(v, b) > work.index_of(v, c)) std::swap(y, z);
  construction1(work, v, y, z);
  Face nine = unique_face_of_length(work, 9);
  place_chords(work, nine, {VPair(a, b), VPair(a, c), VPair(b, c)});
  push_stage(out, work,
             "construction1 at " + vertex_label(v) +
                 ", three chords close the triangle " + vertex_label(a) +
                 vertex_label(b) + vertex_label(c));
  return out;
}

namespace {

// Core of the K_{1,4} step: find a vertex v whose row realizes
// q1 q2 ... q3 q4 with u inside the right arc, split, fan four chords.
RotationSystem k14_apply(const RotationSystem& rot, Vertex u,
                         const std::array<Vertex, 4>& q) {
  auto [q1, q2, q3, q4] = q;
  for (auto& [v, r0] : rot.rows) {
    if (v == u) continue;
    if (std::find(q.begin(), q.end(), v) != q.end()) continue;
    if (!rot.adjacent(v, u)) continue;
    const Row& r = rot.row(v);
    int L = static_cast<int>(r.size());
    bool has_all = true;
    for (Vertex x : q)
      if (rot.index_of(v, x) < 0) has_all = false;
    if (!has_all) continue;
    int p1 = rot.index_of(v, q1), p3 = rot.index_of(v, q3);
    if (r[(p1 + 1) % L] != q2 || r[(p3 + 1) % L] != q4) continue;
    int pu = rot.index_of(v, u);
    std::array<Vertex, 4> sel;
    if (((pu - p3 - 1) % L + L) % L < ((p1 - p3 - 1) % L + L) % L)
      sel = {q1, q2, q3, q4};
    else if (((pu - p1 - 1) % L + L) % L < ((p3 - p1 - 1) % L + L) % L)
      sel = {q3, q4, q1, q2};
    else
      continue;
    RotationSystem work = rot;
    auto [a1, a2, a3, a4] = sel;
    rotate_row(work, v, work.succ(v, u));
    construction1(work, v, a2, a4);
    Face nine = unique_face_of_length(work, 9);
    place_chords(work, nine,
                 {VPair(u, a1), VPair(u, a2), VPair(u, a3), VPair(u, a4)});
    return work;
  }
  throw SurgeryError("no vertex with the required q-pattern");
}

}  // namespace

SurgeryOutcome complete_k14(const RotationSystem& rot) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  auto sp = star_parts(rot);
  require(sp.kind == DeficitKind::K14,
          "complete_k14 needs deficit K14");
  std::vector<Vertex> leaves = sp.leaves;
  std::sort(leaves.begin(), leaves.end(), VertexLess());
  std::vector<Vertex> perm = leaves;
  std::vector<std::string> tried;
  do {
    std::vector<Vertex> rev(perm.rbegin(), perm.rend());
    if (std::lexicographical_compare(rev.begin(), rev.end(), perm.begin(),
                                     perm.end(), VertexLess()))
      continue;  // pattern symmetric under full reversal
    try {
      RotationSystem work = k14_apply(
          rot, sp.u, {perm[0], perm[1], perm[2], perm[3]});
      push_stage(out, work,
                 "construction1 split + 4-chord fan restores the star at " +
                     vertex_label(sp.u));
      return out;
    } catch (const SurgeryError&) {
      std::string t;
      for (Vertex x : perm) t += vertex_label(x) + " ";
      tried.push_back(t);
    }
  } while (std::next_permutation(perm.begin(), perm.end(), VertexLess()));
  std::string msg = "K_{1,4} completion: no (v, labeling) found; tried:";
  for (auto& t : tried) msg += " [" + t + "]";
  throw SurgeryError(msg);
}

SurgeryOutcome complete_k13(const RotationSystem& rot) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  auto sp = star_parts(rot);
  require(sp.kind == DeficitKind::K13,
          "complete_k13 needs deficit K13");
  Vertex u = sp.u;
  std::vector<Vertex> leaves = sp.leaves;
  std::sort(leaves.begin(), leaves.end(), VertexLess());
  std::vector<Vertex> perm = leaves;
  do {
    Vertex a1 = perm[0], a2 = perm[1], a3 = perm[2];
    for (auto& [v, r0] : rot.rows) {
      if (v == u) continue;
      if (std::find(leaves.begin(), leaves.end(), v) != leaves.end()) continue;
      if (!rot.adjacent(v, u)) continue;
      const Row& r = rot.row(v);
      int L = static_cast<int>(r.size());
      if (rot.index_of(v, a1) < 0 || rot.index_of(v, a3) < 0) continue;
      int p1 = rot.index_of(v, a1);
      if (r[(p1 + 1) % L] != a2) continue;
      int p3 = rot.index_of(v, a3), pu = rot.index_of(v, u);
      if (!(((p3 - p1) % L + L) % L < ((pu - p1) % L + L) % L)) continue;
      try {
        RotationSystem work = rot;
        rotate_row(work, v, work.succ(v, u));
        construction1(work, v, a2, work.succ(v, a3));
        Face nine = unique_face_of_length(work, 9);
        place_chords(work, nine, {VPair(u, a1), VPair(u, a2), VPair(u, a3)});
        push_stage(out, work,
                   "construction1 at " + vertex_label(v) +
                       " + 3-chord fan restores the star at " +
                       vertex_label(u));
        return out;
      } catch (const SurgeryError&) {
        continue;
      }
    }
  } while (std::next_permutation(perm.begin(), perm.end(), VertexLess()));
  throw SurgeryError("K_{1,3} completion failed");
}

SurgeryOutcome complete_c4(const RotationSystem& rot) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  Deficit d = classify_deficit(rot);
  require(d.kind == DeficitKind::C4, "complete_c4 needs deficit C4");
  PairSet missing;
  for (auto& [x, y] : d.edges) missing.insert(VPair(x, y));
  std::set<Vertex, VertexLess> sup;
  for (auto& [x, y] : d.edges) {
    sup.insert(x);
    sup.insert(y);
  }
  Vertex a = *sup.begin();
  std::vector<Vertex> nbrs;
  for (Vertex v : sup)
    if (v != a && missing.count(VPair(a, v))) nbrs.push_back(v);
  require(nbrs.size() == 2, "C4 support malformed");
  Vertex b = nbrs[0], dd = nbrs[1];
  Vertex c = 0;
  for (Vertex v : sup)
    if (v != a && v != b && v != dd) c = v;
  auto faces = trace_faces(rot);
  const Face* f1 = nullptr;
  const Face* f2 = nullptr;
  for (auto& f : faces)
    if (std::find(f.begin(), f.end(), DirEdge{a, c}) != f.end()) {
      f1 = &f;
      break;
    }
  require(f1 != nullptr, "no face along diagonal " + pair_str(a, c));
  for (auto& f : faces) {
    if (&f == f1) continue;
    if (std::find(f.begin(), f.end(), DirEdge{b, dd}) != f.end()) {
      f2 = &f;
      break;
    }
  }
  require(f2 != nullptr, "no second face along diagonal " + pair_str(b, dd));
  Corner ca{}, cb{};
  for (auto& cr : corners_of(*f1))
    if (cr.v == a) {
      ca = cr;
      break;
    }
  for (auto& cr : corners_of(*f2))
    if (cr.v == b) {
      cb = cr;
      break;
    }
  RotationSystem work = rot;
  construction3(work, ca, cb);
  Face merged = unique_face_of_length(work, 8);
  place_chords(work, merged, {VPair(b, c), VPair(c, dd), VPair(dd, a)});
  push_stage(out, work,
             "construction3 along the diagonals + three chords restore the "
             "4-cycle");
  return out;
}

SurgeryOutcome lemma_k5(const RotationSystem& rot, Vertex u, Vertex v,
                        const std::array<Vertex, 4>& p) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  {
    Deficit d0 = classify_deficit(rot);
    require(d0.kind == DeficitKind::Kl && d0.l == 5,
            "lemma_k5 needs deficit K5, got " + d0.name());
  }
  auto [p1, p2, p3, p4] = p;
  Vertex a = rot.pred(u, p1), b = rot.succ(u, p1);
  Vertex c = rot.succ(u, p2);
  Vertex d = rot.succ(u, p3);
  Vertex e = rot.succ(u, p4);
  std::array<Vertex, 5> ltr = {a, b, c, d, e};
  require(std::all_of(ltr.begin(), ltr.end(), is_letter) &&
              std::set<Vertex>(ltr.begin(), ltr.end()).size() == 5,
          "row(u) lacks the a p1 b p2 c p3 d p4 e window");
  require(rot.pred(u, p2) == b && rot.pred(u, p3) == c && rot.pred(u, p4) == d,
          "row(u) window not contiguous");
  RotationSystem work = rot;
  auto expect_flip = [&](Vertex x, Vertex l1, Vertex l2) {
    auto [fa, fb] = edge_flip(work, u, x);
    require((fa == l1 && fb == l2) || (fa == l2 && fb == l1),
            "flip gained unexpected edge");
  };
  expect_flip(p1, a, b);
  expect_flip(p2, b, c);
  expect_flip(b, a, c);
  expect_flip(p3, c, d);
  expect_flip(p4, d, e);
  out.transcript.push_back(
      "five flips around " + vertex_label(u) + " gain (a,b),(b,c),(a,c),(c,d),(d,e)");
  auto faces = trace_faces(work);
  auto face_with_vertexset = [&](std::set<Vertex, VertexLess> want) {
    for (auto& f : faces) {
      std::set<Vertex, VertexLess> got;
      for (auto& e0 : f) got.insert(e0.first);
      if (got == want) return f;
    }
    throw SurgeryError("expected face not found");
  };
  Face f1 = face_with_vertexset({a, b, c});
  Face f2 = face_with_vertexset({u, d, e});
  Corner cb{}, cu{};
  for (auto& cr : corners_of(f1))
    if (cr.v == b) cb = cr;
  for (auto& cr : corners_of(f2))
    if (cr.v == u) cu = cr;
  construction3(work, cb, cu);
  Face merged = unique_face_of_length(work, 8);
  fill_face(work, merged, letter_pairs(work));
  out.transcript.push_back(
      "construction3 merges triangles {a,b,c} and {u,d,e}; 8-gon filled with "
      "letter chords");
  push_stage(out, work, "");
  {
    auto sp = star_parts(work);
    require(sp.kind == DeficitKind::K14 && sp.u == u,
            "lemma_k5 should leave the K_{1,4} star at u");
  }
  // K_{1,4} step with q drawn from adjacent p-pairs in row(v)
  std::array<Vertex, 4> perm = p;
  std::sort(perm.begin(), perm.end(), VertexLess());
  bool done = false;
  do {
    const Row& r = work.row(v);
    int L = static_cast<int>(r.size());
    int i0 = work.index_of(v, perm[0]), i2 = work.index_of(v, perm[2]);
    if (i0 < 0 || i2 < 0) continue;
    if (r[(i0 + 1) % L] != perm[1] || r[(i2 + 1) % L] != perm[3]) continue;
    try {
      RotationSystem full = k14_apply(work, u, perm);
      push_stage(out, full, "K_{1,4} fan completes the clique at " +
                                vertex_label(u));
      done = true;
      break;
    } catch (const SurgeryError&) {
      continue;
    }
  } while (std::next_permutation(perm.begin(), perm.end(), VertexLess()));
  require(done, "K_{1,4} step of lemma_k5 failed at v=" + vertex_label(v));
  return out;
}

SurgeryOutcome lemma_k6(const RotationSystem& rot, Vertex u) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  {
    Deficit d0 = classify_deficit(rot);
    require(d0.kind == DeficitKind::Kl && d0.l == 6,
            "lemma_k6 needs deficit K6, got " + d0.name());
  }
  const Row& r = rot.row(u);
  int L = static_cast<int>(r.size());
  struct Window {
    int i;
    Vertex l1, mid, l2;
  };
  std::vector<Window> cands;
  for (int i = 0; i < L; ++i)
    if (is_letter(r[i]) && !is_letter(r[(i + 1) % L]) &&
        is_letter(r[(i + 2) % L]))
      cands.push_back({i, r[i], r[(i + 1) % L], r[(i + 2) % L]});
  // three windows covering all six letters
  std::array<Window, 3> sel{};
  bool found = false;
  for (size_t x = 0; x < cands.size() && !found; ++x)
    for (size_t y = x + 1; y < cands.size() && !found; ++y)
      for (size_t z = y + 1; z < cands.size() && !found; ++z) {
        std::set<Vertex> ls = {cands[x].l1, cands[x].l2, cands[y].l1,
                               cands[y].l2, cands[z].l1, cands[z].l2};
        if (ls.size() == 6) {
          sel = {cands[x], cands[y], cands[z]};
          found = true;
        }
      }
  require(found, "no disjoint letter windows in row " + vertex_label(u));
  Vertex a = sel[0].l1, pp1 = sel[0].mid, b = sel[0].l2;
  Vertex c = sel[1].l1, pp2 = sel[1].mid, d = sel[1].l2;
  Vertex e = sel[2].l1, pp3 = sel[2].mid, f_ = sel[2].l2;
  RotationSystem work0 = rot;
  auto expect_flip = [&](RotationSystem& w, Vertex x, Vertex l1, Vertex l2) {
    auto [fa, fb] = edge_flip(w, u, x);
    require((fa == l1 && fb == l2) || (fa == l2 && fb == l1),
            "flip gained unexpected edge");
  };
  expect_flip(work0, pp1, a, b);
  expect_flip(work0, pp2, c, d);
  expect_flip(work0, pp3, e, f_);
  rotate_row(work0, u, b);
  construction1(work0, u, d, f_);
  out.transcript.push_back(
      "three flips at " + vertex_label(u) +
      " gain (a,b),(c,d),(e,f); construction1 opens a 9-gon");
  Face nine = unique_face_of_length(work0, 9);
  std::vector<Vertex> vals;
  for (auto& cr : corners_of(nine)) vals.push_back(cr.v);
  auto two_letters = [](const Face& fc) {
    int n = 0;
    for (auto& e0 : fc)
      if (is_letter(e0.first)) ++n;
    return n >= 2;
  };
  PairSet allowed = letter_pairs(work0);
  std::set<PairSet> seen;
  SurgeryOutcome result;
  bool done = false;
  find_fills(vals, allowed, [&](const std::vector<CornerChord>& chords) {
    PairSet key;
    for (auto& [i, j] : chords) key.insert(VPair(vals[i], vals[j]));
    if (!seen.insert(key).second) return false;
    RotationSystem w2 = work0;
    apply_chords(w2, nine, chords);
    RotationSystem n9 = w2;
    handle_candidates(
        w2, letter_pairs(w2), two_letters,
        [&](RotationSystem& cand, const PairSet& consumed) {
          if (consumed.size() != 6) return false;
          if (!letter_pairs(cand).empty()) return false;
          try {
            SurgeryOutcome tail = complete_k13(cand);
            result = out;
            push_stage(result, n9, "first handle: 9-gon triangulated");
            push_stage(result, cand,
                       "second handle consumes six letter pairs");
            push_stage(result, tail.stages.back().rot,
                       "K_{1,3} completion finishes the clique");
            result.transcript.insert(result.transcript.end(),
                                     tail.transcript.begin(),
                                     tail.transcript.end());
            done = true;
            return true;
          } catch (const SurgeryError&) {
            return false;
          }
        });
    return done;
  });
  require(done, "lemma_k6 handle cascade failed");
  return result;
}

SurgeryOutcome lemma_k8(const RotationSystem& rot, Vertex u, Vertex v,
                        const std::array<Vertex, 4>& p) {
  SurgeryOutcome out;
  push_stage(out, rot, "");
  {
    Deficit d0 = classify_deficit(rot);
    require(d0.kind == DeficitKind::Kl && d0.l == 8,
            "lemma_k8 needs deficit K8, got " + d0.name());
  }
  std::array<std::pair<Vertex, Vertex>, 4> pairs;
  for (int i = 0; i < 4; ++i) pairs[i] = {rot.pred(u, p[i]), rot.succ(u, p[i])};
  auto [a, b] = pairs[0];
  auto [c, d] = pairs[1];
  auto [e, f_] = pairs[2];
  auto [g, h] = pairs[3];
  std::array<Vertex, 8> ltr = {a, b, c, d, e, f_, g, h};
  require(std::all_of(ltr.begin(), ltr.end(), is_letter) &&
              std::set<Vertex>(ltr.begin(), ltr.end()).size() == 8,
          "row(u) lacks the four letter windows");
  RotationSystem work = rot;
  for (int i = 0; i < 4; ++i) {
    auto [fa, fb] = edge_flip(work, u, p[i]);
    require((fa == pairs[i].first && fb == pairs[i].second) ||
                (fa == pairs[i].second && fb == pairs[i].first),
            "flip gained unexpected edge");
  }
  rotate_row(work, u, h);
  construction2(work, u, b, d, f_);
  out.transcript.push_back(
      "four flips at " + vertex_label(u) +
      " gain the letter pairs; construction2 opens two hexagons");
  auto hexes = trace_faces(work);
  auto hex_with = [&](std::set<Vertex, VertexLess> want) {
    for (auto& fc : hexes) {
      if (fc.size() != 6) continue;
      std::set<Vertex, VertexLess> got;
      for (auto& e0 : fc) got.insert(e0.first);
      if (got == want) return fc;
    }
    throw SurgeryError("expected hexagon not found");
  };
  Face hx1 = hex_with({h, g, u, d, c});
  place_chords(work, hx1, {VPair(d, g), VPair(c, h)});
  hexes = trace_faces(work);
  Face hx2 = hex_with({f_, e, u, b, a});
  place_chords(work, hx2, {VPair(b, e), VPair(a, f_)});
  {
    int quads = 0;
    for (auto& fc : trace_faces(work))
      if (fc.size() == 4) ++quads;
    require(quads == 2, "expected two quadrilaterals after hexagon chords");
  }
  // (n,22) branch: triangulate both quads along their missing diagonals
  RotationSystem branch = work;
  for (int rep = 0; rep < 2; ++rep) {
    Face q4;
    for (auto& fc : trace_faces(branch))
      if (fc.size() == 4) {
        q4 = fc;
        break;
      }
    require(!q4.empty(), "quad vanished");
    std::vector<Vertex> vals;
    for (auto& cr : corners_of(q4)) vals.push_back(cr.v);
    PairSet lp = letter_pairs(branch);
    VPair dg = lp.count(VPair(vals[0], vals[2])) ? VPair(vals[0], vals[2])
                                                 : VPair(vals[1], vals[3]);
    place_chords(branch, q4, {dg});
  }
  push_stage(out, branch, "side branch: both quads triangulated arbitrarily");

  PairSet targets = letter_pairs(work);
  auto quad_filter = [](const Face& fc) {
    if (fc.size() == 4) return true;
    int n = 0;
    for (auto& e0 : fc)
      if (is_letter(e0.first)) ++n;
    return n >= 2;
  };
  auto only_quads = [](const Face& fc) { return fc.size() == 4; };
  RotationSystem n16, n10, n4;
  bool got = false;
  handle_candidates(
      work, targets, only_quads,
      [&](RotationSystem& cand, const PairSet& consumed) {
        if (consumed.size() != 8) return false;
        PairSet t3 = letter_pairs(cand);
        bool inner_done = false;
        handle_candidates(
            cand, t3, quad_filter,
            [&](RotationSystem& cand3, const PairSet& cons3) {
              if (cons3.size() != 6) return false;
              PairSet t4 = letter_pairs(cand3);
              bool deep_done = false;
              handle_candidates(
                  cand3, t4, quad_filter,
                  [&](RotationSystem& cand4, const PairSet& cons4) {
                    if (cons4.size() != 6) return false;
                    if (!letter_pairs(cand4).empty()) return false;
                    n16 = cand;
                    n10 = cand3;
                    n4 = cand4;
                    deep_done = true;
                    return true;
                  });
              inner_done = deep_done;
              return deep_done;
            });
        got = inner_done;
        return inner_done;
      });
  require(got, "lemma_k8 handle cascade failed");
  push_stage(out, n16, "handle merges the two quads, eight letter pairs");
  push_stage(out, n10, "handle consumes six letter pairs");
  push_stage(out, n4, "handle consumes the last six letter pairs");
  {
    auto sp = star_parts(n4);
    require(sp.kind == DeficitKind::K14 && sp.u == u,
            "lemma_k8 should leave the K_{1,4} star at u");
  }
  std::array<Vertex, 4> perm = p;
  std::sort(perm.begin(), perm.end(), VertexLess());
  bool done = false;
  do {
    const Row& r2 = n4.row(v);
    int L2 = static_cast<int>(r2.size());
    int i0 = n4.index_of(v, perm[0]), i2 = n4.index_of(v, perm[2]);
    if (i0 < 0 || i2 < 0) continue;
    if (r2[(i0 + 1) % L2] != perm[1] || r2[(i2 + 1) % L2] != perm[3]) continue;
    try {
      RotationSystem full = k14_apply(n4, u, perm);
      push_stage(out, full,
                 "K_{1,4} fan completes the clique at " + vertex_label(u));
      done = true;
      break;
    } catch (const SurgeryError&) {
      continue;
    }
  } while (std::next_permutation(perm.begin(), perm.end(), VertexLess()));
  require(done, "K_{1,4} step of lemma_k8 failed at v=" + vertex_label(v));
  return out;
}

// ---------------- witness searches and dispatch ----------------

SurgeryOutcome lemma_k5_search(const RotationSystem& rot) {
  // the window a p1 b p2 c p3 d p4 e pins u up to rotation; scan all u, all v
  for (auto& [u, r] : rot.rows) {
    if (is_letter(u)) continue;
    int L = static_cast<int>(r.size());
    for (int i = 0; i < L; ++i) {
      bool win = true;
      for (int k = 0; k < 9; ++k) {
        bool want_letter = k % 2 == 0;
        if (is_letter(r[(i + k) % L]) != want_letter) {
          win = false;
          break;
        }
      }
      if (!win) continue;
      std::array<Vertex, 4> p = {r[(i + 1) % L], r[(i + 3) % L],
                                 r[(i + 5) % L], r[(i + 7) % L]};
      for (auto& [v, rv] : rot.rows) {
        if (v == u || is_letter(v)) continue;
        try {
          return lemma_k5(rot, u, v, p);
        } catch (const SurgeryError&) {
          continue;
        }
      }
    }
  }
  throw SurgeryError("lemma_k5: no witness (u,v,p) admits the pipeline");
}

SurgeryOutcome lemma_k6_search(const RotationSystem& rot) {
  for (auto& [u, r] : rot.rows) {
    if (is_letter(u)) continue;
    try {
      return lemma_k6(rot, u);
    } catch (const SurgeryError&) {
      continue;
    }
  }
  throw SurgeryError("lemma_k6: no vertex admits the pipeline");
}

SurgeryOutcome lemma_k8_search(const RotationSystem& rot) {
  std::optional<SurgeryOutcome> result;
  for (auto& [u, r] : rot.rows) {
    if (is_letter(u)) continue;
    int L = static_cast<int>(r.size());
    // positions whose predecessor and successor are letters
    std::vector<Vertex> wins;
    for (int i = 0; i < L; ++i)
      if (!is_letter(r[i]) && is_letter(r[(i + L - 1) % L]) &&
          is_letter(r[(i + 1) % L]))
        wins.push_back(r[i]);
    if (wins.size() < 4) continue;
    std::sort(wins.begin(), wins.end(), VertexLess());
    std::vector<int> sel4(4);
    Vertex uu = u;
    std::function<bool(size_t, size_t)> pick = [&](size_t pos, size_t from) {
      if (pos == 4) {
        std::array<Vertex, 4> p = {wins[sel4[0]], wins[sel4[1]], wins[sel4[2]],
                                   wins[sel4[3]]};
        std::sort(p.begin(), p.end(), VertexLess());
        do {
          for (auto& [v, rv] : rot.rows) {
            if (v == uu || is_letter(v)) continue;
            try {
              result = lemma_k8(rot, uu, v, p);
              return true;
            } catch (const SurgeryError&) {
              continue;
            }
          }
        } while (std::next_permutation(p.begin(), p.end(), VertexLess()));
        return false;
      }
      for (size_t k = from; k < wins.size(); ++k) {
        sel4[pos] = static_cast<int>(k);
        if (pick(pos + 1, k + 1)) return true;
      }
      return false;
    };
    if (pick(0, 0)) return *result;
  }
  throw SurgeryError("lemma_k8: no witness (u,v,p) admits the pipeline");
}

SurgeryOutcome complete_any(const RotationSystem& rot) {
  Deficit d = classify_deficit(rot);
  switch (d.kind) {
    case DeficitKind::Empty:
      throw SurgeryError("embedding is already complete");
    case DeficitKind::K13:
      return complete_k13(rot);
    case DeficitKind::K14:
      return complete_k14(rot);
    case DeficitKind::C4:
      return complete_c4(rot);
    case DeficitKind::Kl:
      switch (d.l) {
        case 2: return complete_k2(rot);
        case 3: return complete_k3(rot);
        case 5: return lemma_k5_search(rot);
        case 6: return lemma_k6_search(rot);
        case 8: return lemma_k8_search(rot);
        default:
          throw SurgeryError("no completion pipeline for deficit " + d.name());
      }
    case DeficitKind::Other:
      break;
  }
  throw SurgeryError("no completion pipeline for deficit " + d.name());
}

RotationSystem subdivide_face(const RotationSystem& rot, const Face& face,
                              Vertex new_vertex) {
  require(!rot.has_vertex(new_vertex),
          "vertex " + vertex_label(new_vertex) + " already present");
  RotationSystem out = rot;
  Row wrow;
  for (auto& [x, y] : face) wrow.push_back(x);
  out.rows[new_vertex] = wrow;
  for (auto& cr : corners_of(face))
    insert_between(out, cr.v, cr.out, cr.in, new_vertex);
  return out;
}

RotationSystem amalgamate(const RotationSystem& rot, Vertex u, Vertex v,
                          Vertex new_name) {
  require(rot.adjacent(u, v), "amalgamate needs edge " + pair_str(u, v));
  const Row& ru = rot.row(u);
  const Row& rv = rot.row(v);
  for (Vertex x : ru)
    if (x != v)
      require(!rot.adjacent(v, x),
              "amalgamation conflict via " + vertex_label(x));
  int i = rot.index_of(u, v);
  int j = rot.index_of(v, u);
  Row splice(rv.begin() + j + 1, rv.end());
  splice.insert(splice.end(), rv.begin(), rv.begin() + j);
  Row merged(ru.begin(), ru.begin() + i);
  merged.insert(merged.end(), splice.begin(), splice.end());
  merged.insert(merged.end(), ru.begin() + i + 1, ru.end());
  RotationSystem out;
  out.modulus = rot.modulus;
  for (auto& [x, r] : rot.rows) {
    if (x == u || x == v) continue;
    Row nr;
    for (Vertex y : r) nr.push_back(y == u || y == v ? new_name : y);
    out.rows[x] = std::move(nr);
  }
  out.rows[new_name] = merged;
  out.check();
  return out;
}

}  // namespace genus
