#pragma once
// Embedding surgery: edge flips, the three handle constructions, chord
// placement inside polygonal faces, and the completion pipelines that add
// back the missing edges of a deficient triangular embedding.
//
// Face convention as in rotation.hpp: triangle [u,v,x] <=> row(u) has "v x"
// adjacent; corner i of a face is (vertex, out, in) with out immediately
// before in in that vertex's row.

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "genus/rotation.hpp"

namespace genus {

struct SurgeryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Corner {
  Vertex v, out, in;
};

std::vector<Corner> corners_of(const Face& face);

// Normalized unordered vertex pair.
struct VPair {
  Vertex a, b;
  VPair(Vertex x, Vertex y) {
    VertexLess lt;
    a = lt(x, y) ? x : y;
    b = lt(x, y) ? y : x;
  }
  bool operator<(const VPair& o) const {
    VertexLess lt;
    if (lt(a, o.a)) return true;
    if (lt(o.a, a)) return false;
    return lt(b, o.b);
  }
  bool operator==(const VPair& o) const { return a == o.a && b == o.b; }
};
using PairSet = std::set<VPair>;

PairSet deficit_pairs(const RotationSystem& rot);
PairSet letter_pairs(const RotationSystem& rot);

// ---- primitive edits ----

void insert_between(RotationSystem& rot, Vertex a, Vertex out_a, Vertex in_a,
                    Vertex b);
void add_edge_at(RotationSystem& rot, const Corner& ca, const Corner& cb);
void delete_edge(RotationSystem& rot, Vertex u, Vertex v);
void rotate_row(RotationSystem& rot, Vertex v, Vertex start);

// Flip edge (u,v) of a locally triangular region; returns the new edge.
std::pair<Vertex, Vertex> edge_flip(RotationSystem& rot, Vertex u, Vertex v);

// ---- handle constructions ----

// Row(v) = X Y Z  ->  X Z Y  (Y starts at start_y, Z at start_z; the caller
// rotates the row so X starts at position 0).  Adds one handle and opens a
// 9-gon when applied to a triangulation.
void construction1(RotationSystem& rot, Vertex v, Vertex start_y,
                   Vertex start_z);

// Row(v) = X Y Z W  ->  X W Z Y.  Adds one handle and opens two hexagons.
void construction2(RotationSystem& rot, Vertex v, Vertex start_y,
                   Vertex start_z, Vertex start_w);

// Merge two distinct faces with a handle by inserting an edge between a
// corner of each; the merged face has length |F1|+|F2|+2.
void construction3(RotationSystem& rot, const Corner& ca, const Corner& cb);

// ---- chords inside a face ----

using CornerChord = std::pair<int, int>;  // corner indices within a face

bool chords_cross(const CornerChord& c1, const CornerChord& c2, int k);

// Insert mutually non-crossing corner chords into a traced face.
void apply_chords(RotationSystem& rot, const Face& face,
                  const std::vector<CornerChord>& chords);

// Choose corners realizing the given vertex pairs without crossings and
// insert them; throws SurgeryError when impossible.
std::vector<CornerChord> place_chords(RotationSystem& rot, const Face& face,
                                      const std::vector<VPair>& pairs);

// Enumerate full triangulations of a polygon with corner values `vals`,
// using each allowed pair at most once.  The callback returns true to stop.
void find_fills(const std::vector<Vertex>& vals, const PairSet& allowed,
                const std::function<bool(const std::vector<CornerChord>&)>& cb);

// Triangulate `face` with chords drawn from `allowed`; returns pairs used.
PairSet fill_face(RotationSystem& rot, const Face& face,
                  const PairSet& allowed);

// Construction-3 merges of two faces whose merge edge is a target pair,
// followed by a full fill with target pairs; callback gets the resulting
// rotation and the set of pairs consumed, returns true to stop.
void handle_candidates(
    const RotationSystem& rot, const PairSet& targets,
    const std::function<bool(const Face&)>& face_filter,
    const std::function<bool(RotationSystem&, const PairSet&)>& cb);

// ---- pipelines ----

struct Stage {
  std::string name;  // "(17,1)-triangulation", "K17", ...
  RotationSystem rot;
  EmbeddingSummary summary;
  Deficit deficit;
};

struct SurgeryOutcome {
  std::vector<Stage> stages;
  std::vector<std::string> transcript;

  const RotationSystem& final_rot() const { return stages.back().rot; }
};

// Append a verified stage (analyze + classify) to an outcome.
void push_stage(SurgeryOutcome& out, const RotationSystem& rot,
                const std::string& op_note);

// Single missing edge: one Construction-3 handle.
SurgeryOutcome complete_k2(const RotationSystem& rot);
// Missing triangle: Construction 1 + three chords in the 9-gon.
SurgeryOutcome complete_k3(const RotationSystem& rot);
// Missing K_{1,3}: Construction 1 at a witness vertex + 3-chord fan.
SurgeryOutcome complete_k13(const RotationSystem& rot);
// Missing K_{1,4}: Construction 1 at a vertex with the interleaving pattern.
SurgeryOutcome complete_k14(const RotationSystem& rot);
// Missing 4-cycle: one handle merging the diagonal faces + three chords.
SurgeryOutcome complete_c4(const RotationSystem& rot);

// Missing K5: flips around u, one handle, fill, then the K_{1,4} step via a
// pair pattern in row(v).  Requires row(u) window a p1 b p2 c p3 d p4 e.
SurgeryOutcome lemma_k5(const RotationSystem& rot, Vertex u, Vertex v,
                        const std::array<Vertex, 4>& p);
// Missing K6: flips at three disjoint letter windows of row(u), then a
// two-handle cascade and the K_{1,3} step.
SurgeryOutcome lemma_k6(const RotationSystem& rot, Vertex u);
// Missing K8: four flips, Construction 2, quad surgery, three more handles,
// then the K_{1,4} step.  p as in lemma_k5 but with four letter pairs.
SurgeryOutcome lemma_k8(const RotationSystem& rot, Vertex u, Vertex v,
                        const std::array<Vertex, 4>& p);

// Dispatch on the classified deficit: Kl -> the matching pipeline (K2, K3,
// K5 via witness search, ...), K13/K14/C4 -> their completions.
SurgeryOutcome complete_any(const RotationSystem& rot);

// Witness search wrappers: try all (u,v,p) conforming to the lemma patterns.
SurgeryOutcome lemma_k5_search(const RotationSystem& rot);
SurgeryOutcome lemma_k6_search(const RotationSystem& rot);
SurgeryOutcome lemma_k8_search(const RotationSystem& rot);

// ---- subdivision & amalgamation ----

// Place a new vertex inside `face`, joined to every corner.
RotationSystem subdivide_face(const RotationSystem& rot, const Face& face,
                              Vertex new_vertex);

// Contract edge (u,v) into a single vertex named new_name; u and v must not
// share any neighbor.
RotationSystem amalgamate(const RotationSystem& rot, Vertex u, Vertex v,
                          Vertex new_name);

}  // namespace genus
