#pragma once
// Rotation systems for orientable combinatorial embeddings: face tracing,
// Euler/genus analysis, deficit classification, and the bit-exact text format.
//
// Vertices are either numbered (0..modulus-1) or lettered (a..h).  A letter
// vertex is encoded as a negative int: a=-1, b=-2, ..., h=-8.  Rotations are
// clockwise neighbor orders; traced faces come out counterclockwise.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace genus {

using Vertex = int;

constexpr int kMaxLetters = 8;

constexpr bool is_letter(Vertex v) { return v < 0; }
constexpr Vertex letter_vertex(int i) { return -(i + 1); }  // 0 -> 'a'
constexpr int letter_index(Vertex v) { return -v - 1; }
constexpr char letter_char(Vertex v) {
  return static_cast<char>('a' + letter_index(v));
}

// Canonical vertex order: numbered ascending, then a..h.
struct VertexLess {
  bool operator()(Vertex a, Vertex b) const {
    if (is_letter(a) != is_letter(b)) return is_letter(b);
    if (is_letter(a)) return letter_index(a) < letter_index(b);
    return a < b;
  }
};

std::string vertex_label(Vertex v);
Vertex parse_vertex_label(const std::string& tok);  // throws FormatError

using Row = std::vector<Vertex>;
using DirEdge = std::pair<Vertex, Vertex>;
using Face = std::vector<DirEdge>;

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class RotationSystem {
 public:
  int modulus = 0;  // count of numbered vertices present as rows
  std::map<Vertex, Row, VertexLess> rows;

  int letters() const;
  bool has_vertex(Vertex v) const { return rows.count(v) != 0; }
  const Row& row(Vertex v) const;
  Row& row_mut(Vertex v);

  long vertex_count() const { return static_cast<long>(rows.size()); }
  long edge_count() const;

  // Position of nb within row(u); -1 when absent.
  int index_of(Vertex u, Vertex nb) const;
  bool adjacent(Vertex u, Vertex v) const;
  Vertex succ(Vertex u, Vertex nb) const;  // next neighbor clockwise
  Vertex pred(Vertex u, Vertex nb) const;

  // Row edits used by the surgery operations.  All throw StructureError on
  // missing anchors.
  void insert_after(Vertex u, Vertex anchor, Vertex nb);
  void insert_before(Vertex u, Vertex anchor, Vertex nb);
  void remove_neighbor(Vertex u, Vertex nb);

  // Symmetry / simplicity check: every neighbor entry distinct, no loops,
  // u in row(v) iff v in row(u).  Throws StructureError naming the pair.
  void check() const;
};

// Heffter-Edmonds face tracing.  From directed edge (u,v) the successor is
// (v, w) with w = pred of u in row(v).  Faces are produced deterministically:
// each face starts at its canonically smallest untraced directed edge.
std::vector<Face> trace_faces(const RotationSystem& rot);

struct EmbeddingSummary {
  long vertices = 0;
  long edges = 0;
  long faces = 0;
  int genus = 0;
  bool triangular = false;

  std::string to_string() const;  // "V=17 E=135 F=90 genus=15 triangular"
};

EmbeddingSummary analyze(const RotationSystem& rot);

// Triangularity without tracing: every directed edge closes a triangle under
// the rotation rule.  Equivalent to all traced faces having length 3.
bool is_triangular_ruler(const RotationSystem& rot);

// Missing edges relative to the complete graph on all present vertices.
std::vector<std::pair<Vertex, Vertex>> deficit_edges(const RotationSystem& rot);

enum class DeficitKind { Empty, Kl, K13, K14, C4, Other };

struct Deficit {
  DeficitKind kind = DeficitKind::Empty;
  int l = 0;  // for Kl: size of the support clique (K2, K3, ..., K8)
  std::vector<std::pair<Vertex, Vertex>> edges;

  std::string name() const;  // "Empty", "K2", ..., "K13", "K14", "C4", "Other"
};

Deficit classify_deficit(const RotationSystem& rot);

// Ringel-Youngs genus of the complete graph, ceil((n-3)(n-4)/12); n >= 3.
int genus_Kn(int n);

// Whether an (n,t)-triangulation can exist: n >= 4, 0 <= t <= n-6,
// (n-3)(n-4) == 2t mod 12, and (n,t) != (9,3).
bool mt_valid(int n, int t);

// ---- Bit-exact text format ----
//
//   rotation modulus=<M> letters=<L>
//   0. 1 2 9 ...
//   ...
//   a. 0 1 2 ...
//
// Writer emits canonical form: rows in vertex order, each row rotated to
// start at its smallest numbered neighbor (letters sort after numbers).
// Reader accepts any cyclic phase and validates symmetry.
std::string write_rotation(const RotationSystem& rot);
RotationSystem read_rotation(const std::string& text);

// Rotate a row so it starts at its canonically smallest entry.
Row canonical_row(const Row& r);

// Cyclic equality of two rows (no reflection).
bool cyclic_equal(const Row& a, const Row& b);

}  // namespace genus
