#ifndef FRAISSE_DECORATE_HPP
#define FRAISSE_DECORATE_HPP

#include "fraisse/metric.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fraisse {

enum class AgeClass { metric, age1, age2, age3, age4 };

std::string to_string(AgeClass c);
AgeClass age_class_from_string(const std::string& name);

/// Age1: rational relations p_n on n-tuples, 1-Lipschitz for the sum metric.
/// values[i] is indexed by TupleMetric codes for arity arities[i].
/// With no arities this is a plain metric space.
struct RelationDecoration {
  std::vector<int> arities;
  std::vector<VectorXq> values;
};

/// Age2: a distance-like function p and a 1-Lipschitz retraction r onto its zero set.
struct RetractDecoration {
  VectorXq p;
  std::vector<Index> r;
};

/// Finite stand-in for a compact space; every label counts as a net point.
struct CompactProxy {
  MetricSpace space;
  Rational net_radius;
};

/// Age3: f(a, q) = max(0, max_{m in control} values(a, m) - d_K(m, q)).
struct ControlledDecoration {
  CompactProxy proxy;
  std::vector<Index> control;  // proxy indices
  MatrixXq values;             // points x control
};

/// Finite stand-in for the target of an L-Lipschitz map.
struct TargetProxy {
  MetricSpace space;
  Rational lipschitz;
};

/// Age4: an L-Lipschitz assignment of proxy points.
struct LipschitzDecoration {
  TargetProxy target;
  std::vector<Index> assignment;  // proxy indices
};

using Decoration = std::variant<RelationDecoration, RetractDecoration, ControlledDecoration, LipschitzDecoration>;

struct DecoratedSpace {
  MetricSpace space;
  Decoration decoration;

  AgeClass age() const;
  Index size() const { return space.size(); }
};

bool operator==(const CompactProxy& a, const CompactProxy& b);
bool operator==(const TargetProxy& a, const TargetProxy& b);
bool operator==(const DecoratedSpace& a, const DecoratedSpace& b);

DecoratedSpace metric_only(MetricSpace space);

/// Induced Age3 values on every proxy point, points x proxy.
MatrixXq induced_control_values(const ControlledDecoration& dec);

/// Same structure with the control set enlarged to the whole proxy.
ControlledDecoration with_full_control(const ControlledDecoration& dec);

/// Throws StructuralError when the decoration refers to unknown points or has the wrong shape.
void check_decoration_shape(const DecoratedSpace& ds);

ValidationReport validate_decoration(const DecoratedSpace& ds);
ValidationReport validate_decorated(const DecoratedSpace& ds);

/// Decorated substructure on the given points, in the given order. Age2
/// substructures must be closed under r.
DecoratedSpace restrict_decorated(const DecoratedSpace& ds, const std::vector<Index>& points);
bool is_closed_substructure(const DecoratedSpace& ds, const std::vector<Index>& points);

/// True when the injection small -> big preserves distances and decorations.
bool preserves_structure(const DecoratedSpace& small, const DecoratedSpace& big, const std::vector<Index>& map);

std::vector<std::vector<Index>> enumerate_decorated_embeddings(const DecoratedSpace& small, const DecoratedSpace& big);

/// Greatest 1-Lipschitz extension of values given on `known` elements of a
/// finite set with distance `dist(i, j)`: v(t) = min_s value(s) + dist(t, s).
template <typename Distance>
VectorXq lipschitz_extend_greatest(Index size, const std::vector<Index>& known, const VectorXq& values, Distance dist) {
  if (known.empty()) throw PreconditionError("greatest Lipschitz extension needs at least one known value");
  for (std::size_t i = 0; i < known.size(); ++i)
    for (std::size_t j = i + 1; j < known.size(); ++j)
      if (abs(values(static_cast<Index>(i)) - values(static_cast<Index>(j))) > dist(known[i], known[j]))
        throw PreconditionError("given values are not 1-Lipschitz at elements " + std::to_string(known[i]) + ", " +
                                std::to_string(known[j]));
  VectorXq out(size);
  for (Index t = 0; t < size; ++t) {
    Rational best;
    for (std::size_t s = 0; s < known.size(); ++s) {
      Rational v = values(static_cast<Index>(s)) + dist(t, known[s]);
      if (s == 0 || v < best) best = std::move(v);
    }
    out(t) = std::move(best);
  }
  for (std::size_t s = 0; s < known.size(); ++s) out(known[s]) = values(static_cast<Index>(s));
  return out;
}

/// Point version: values on `known` points of `space`.
VectorXq lipschitz_extend_greatest(const MetricSpace& space, const std::vector<Index>& known, const VectorXq& values);

/// Tuple version: values on `known` tuple codes of the given arity, sum metric.
VectorXq lipschitz_extend_greatest_tuples(const MetricSpace& space, int arity, const std::vector<Index>& known,
                                          const VectorXq& values);

struct DecoratedAmalgam {
  DecoratedSpace space;
  std::vector<Index> left_map;
  std::vector<Index> right_map;
};

/// Decorated greatest amalgam. The base must be a decorated substructure of
/// both sides (matched by label). With `validate` the output is re-checked and
/// an InternalError is raised on failure.
DecoratedAmalgam amalgamate_decorated(const DecoratedSpace& left, const DecoratedSpace& right, const DecoratedSpace& base,
                                      bool validate = true);

/// Far-apart constant: 1 + max of both diameters and the decoration scale.
Rational far_apart_constant(const DecoratedSpace& a, const DecoratedSpace& b);

/// Joint embedding with every cross distance 2M.
DecoratedAmalgam joint_embed_far_apart(const DecoratedSpace& a, const DecoratedSpace& b);

// One-point extension descriptors. The profile is aligned with the points of
// the substructure the descriptor refers to.

struct RelationExtension {
  // values[i]: arity arities[i], tuples over (sub + new point) that contain
  // the new point, in increasing tuple-code order.
  std::vector<VectorXq> values;
};

struct RetractExtension {
  Rational p;
  std::optional<Index> retract_to;  // index into the substructure; empty means r(b) = b
};

struct ControlledExtension {
  VectorXq values;  // f(b, q) for every proxy point q
};

struct LipschitzExtension {
  // Either a proxy index, or (almost-extensions only) the distances from an
  // abstract target point to every proxy point.
  std::variant<Index, VectorXq> target;
};

using ExtensionPayload = std::variant<std::monostate, RelationExtension, RetractExtension, ControlledExtension,
                                      LipschitzExtension>;

struct PointExtension {
  VectorXq profile;
  ExtensionPayload payload;
};

bool operator==(const PointExtension& a, const PointExtension& b);

/// Tuple codes (over n + 1 points, the new point last) that contain the new point.
std::vector<Index> tuples_with_last(Index n, int arity);

/// The exact one-point extension of `sub` described by `ext`, new point last.
DecoratedSpace build_extension(const DecoratedSpace& sub, const PointExtension& ext, const std::string& label);

/// Descriptor of point x relative to the points `sub` (x not among them).
PointExtension extract_extension(const DecoratedSpace& ds, const std::vector<Index>& sub, Index x);

/// Empty if `ext` is a valid one-point extension of ds, else the first problem.
std::optional<Violation> extension_violation(const DecoratedSpace& ds, const PointExtension& ext);

/// Rational realization of an abstract one-point extension with distances
/// moved up by less than eps and decoration values copied.
DecoratedSpace almost_one_point_extend(const DecoratedSpace& ds, const PointExtension& abstract, const Rational& eps,
                                       const std::string& label = "b'");

}  // namespace fraisse

#endif  // FRAISSE_DECORATE_HPP
