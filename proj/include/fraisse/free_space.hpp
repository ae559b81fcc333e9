#ifndef FRAISSE_FREE_SPACE_HPP
#define FRAISSE_FREE_SPACE_HPP

// Lipschitz-free norms of finitely supported molecules over a pointed finite
// metric space.

#include "fraisse/metric.hpp"
#include "fraisse/normed.hpp"

#include <map>

namespace fraisse {

struct PointedSpace {
  MetricSpace space;
  std::string basepoint;

  Index base_index() const { return space.index_of(basepoint); }
  friend bool operator==(const PointedSpace&, const PointedSpace&) = default;
};

/// Throws StructuralError if the basepoint is not a point of the space.
PointedSpace make_pointed(MetricSpace space, std::string basepoint);

/// Coefficients by label. The basepoint absorbs the balance when it is
/// absent; when it is given explicitly the coefficients must sum to zero.
struct Molecule {
  std::map<std::string, Rational> coeffs;
  friend bool operator==(const Molecule&, const Molecule&) = default;
};

/// delta_x - delta_y
Molecule dirac_difference(const std::string& x, const std::string& y);

/// Balanced coefficient vector indexed like the space.
VectorXq molecule_vector(const PointedSpace& space, const Molecule& m);

struct FlowEdge {
  Index from;
  Index to;
  Rational amount;
};

struct FreeNormResult {
  Rational value;
  std::vector<FlowEdge> flow;  // optimal transport plan, nonzero edges only
};

/// Minimum cost of a flow whose net outflow at each point is m(x).
FreeNormResult free_norm(const PointedSpace& space, const Molecule& m);

struct DualResult {
  Rational value;
  VectorXq f;  // 1-Lipschitz, f(basepoint) = 0
};

/// Maximum of sum m(x) f(x) over 1-Lipschitz f vanishing at the basepoint.
/// Solved as its own LP; a mismatch with free_norm is an InternalError.
DualResult kantorovich_dual(const PointedSpace& space, const Molecule& m);

/// Images of the points; a missing basepoint means 0.
using PointMap = std::map<std::string, VectorXq>;

struct LiftEntry {
  Rational free_norm;
  Rational dual;
  Rational image_norm;  // ||Phi(m)|| in the target
  Rational bound;       // L * free_norm
};

struct LiftReport {
  std::vector<LiftEntry> entries;
  std::vector<Index> violations;  // molecules with image_norm > bound
  bool ok() const { return violations.empty(); }
};

/// Checks ||Phi(m)|| <= L * ||m|| for the linear extension Phi of F.
/// F must vanish at the basepoint and be L-Lipschitz into the target
/// (PreconditionError naming the offending pair otherwise).
LiftReport lift_check(const PointedSpace& space, const PartialNormSpace& target, const PointMap& f, const Rational& lipschitz,
                      const std::vector<Molecule>& molecules);

}  // namespace fraisse

#endif  // FRAISSE_FREE_SPACE_HPP
