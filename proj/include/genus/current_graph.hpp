#pragma once
// Index-3 current graphs over Z_M: embedded directed multigraphs whose arcs
// carry nonzero group currents.  Face-boundary walks (circuits) of the
// embedding generate the rows of a derived rotation system.
//
// Ends are global ids; arc a owns tail end 2a and head end 2a+1.  Each end
// appears in exactly one node rotation.  Vortices are degree-3 nodes that
// violate KCL; they become letter vertices of the derived embedding.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "genus/rotation.hpp"

namespace genus {

struct Arc {
  int tail_end = -1;
  int head_end = -1;
  int current = 0;  // in 0..modulus-1; 0 only while unassigned in skeletons
};

inline int arc_of_end(int end) { return end / 2; }
inline bool end_is_tail(int end) { return end % 2 == 0; }
inline int tail_end_of(int arc) { return 2 * arc; }
inline int head_end_of(int arc) { return 2 * arc + 1; }

class CurrentGraph {
 public:
  int modulus = 0;
  std::vector<std::vector<int>> node_rot;  // node -> end ids, clockwise
  std::vector<Arc> arcs;
  std::map<int, int> vortex;  // node -> letter index 0..7
  // Arcs whose currents are exempt from canonical reorientation (the ladder
  // horizontals, kept in the 1 mod 3 class).
  std::set<int> keep_orientation;

  int node_of_end(int end) const;
  int degree(int node) const { return static_cast<int>(node_rot[node].size()); }
  void validate_structure() const;  // every end placed exactly once, etc.
};

// Traversal of an arc: forward = tail->head.
struct Traversal {
  int arc = 0;
  bool forward = true;
  bool operator==(const Traversal&) const = default;
};
using Circuit = std::vector<Traversal>;

// Face-boundary walks of the embedded current graph.  Deterministic order:
// seeded from arc 0 forward, then ascending.
std::vector<Circuit> trace_circuits(const CurrentGraph& cg);

// Log entry: group element (>= 0) or letter index encoded negative as in
// rotation.hpp.  A vortex letter is recorded right after the traversal that
// arrives at it.
using Log = std::vector<int>;
Log circuit_log(const CurrentGraph& cg, const Circuit& walk);

// All circuit labelings satisfying (E6): label(head circuit) - label(tail
// circuit) == current (mod 3) for every arc.  perm[i] = label of circuits[i].
std::vector<std::array<int, 3>> circuit_labelings(
    const CurrentGraph& cg, const std::vector<Circuit>& circuits);

struct PrincipleReport {
  // principle name ("E1".."E7") -> human-readable witnesses
  std::map<std::string, std::vector<std::string>> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

struct CircuitAnalysis {
  PrincipleReport report;
  std::vector<Circuit> circuits;  // reordered so index == label when labeled
  std::optional<std::array<int, 3>> labeling;
};

// Checks construction principles:
//   E1 node degrees in {1,3};            E2 exactly three circuits;
//   E3 each log covers every nonzero element once (order-2 element twice);
//   E4 KCL at ordinary degree-3 nodes;   E5 vortex excess has gcd 3 with M
//      and the vortex touches all three circuits;
//   E6 circuits admit a mod-3 labeling;  E7 dead-end currents of order 2 or 3.
CircuitAnalysis verify_principles(const CurrentGraph& cg);

// The three logs ordered by circuit label.  Throws StructureError with the
// report text if any principle fails.
std::vector<Log> logs_of(const CurrentGraph& cg);

// Row gamma of the derived rotation system is log[gamma mod 3] shifted by
// gamma; for even M the doubled order-2 entry is collapsed.  Vortex rows are
// recovered by closure and must form a single M-cycle.
RotationSystem derive_embedding(const CurrentGraph& cg);

// ---- arithmetic 3-ladders and handle subtraction ----

struct LadderSpec {
  int g = 0, r = 0, t = 0, h = 0;  // h != 0, h == 0 mod 3
  int log = 0, pos = 0;
};

// Scan the logs for the 7-entry window [-t-h, g-h, r, g, -t, g+h, r+h].
std::vector<LadderSpec> find_ladders(const CurrentGraph& cg);

// The six undirected edges removed per handle, translated by `shift`.
std::vector<std::pair<int, int>> ladder_hexagon(const LadderSpec& lad, int m,
                                                int shift);

// Delete the hexagon at every shift (each must be divisible by 3) from a
// derived triangular embedding.
RotationSystem subtract_handles(const RotationSystem& emb,
                                const LadderSpec& lad,
                                const std::vector<int>& shifts);

// Reorient arcs so currents lie in 1..floor(M/2) except keep_orientation.
void normalize_currents(CurrentGraph& cg);

// ---- convenience builder (ends allocated lazily, slots in call order) ----

class ArcBuilder {
 public:
  explicit ArcBuilder(int modulus) { cg_.modulus = modulus; }

  int node();
  // Adds an arc; its ends are appended to each endpoint's rotation in call
  // order.  Returns the arc id (ends are tail_end_of/head_end_of of it).
  int arc(int tail_node, int head_node, long current);
  void set_rot(int node, const std::vector<int>& ends);
  void set_vortex(int node, int letter_idx) { cg_.vortex[node] = letter_idx; }
  void keep(int arc_id) { cg_.keep_orientation.insert(arc_id); }
  CurrentGraph done();

 private:
  CurrentGraph cg_;
  std::vector<std::vector<int>> slots_;
};

// ---- Bit-exact text format ----
//
//   currentgraph modulus=<M>
//   node <id> rot=<end,...> [vortex=<letter>]      end token: <arc>t | <arc>h
//   arc <id> tail=<node>.<slot> head=<node>.<slot> current=<int>
//
// Node and arc lines are sorted by id; slots index the node rotation and the
// redundant tail/head references are validated on read.  A current of `?`
// marks an unassigned skeleton arc (read_skeleton only).
std::string write_current_graph(const CurrentGraph& cg);
CurrentGraph read_current_graph(const std::string& text);

struct Skeleton {
  CurrentGraph cg;               // currents 0 where unassigned
  std::vector<bool> assigned;    // per arc
};
std::string write_skeleton(const Skeleton& sk);
Skeleton read_skeleton(const std::string& text);

}  // namespace genus
